//! The billiard map: first return of the flow to the boundary, orbits,
//! itineraries and the phase-space metric.

use std::f64::consts::FRAC_PI_2;

use crate::geom::{ray_line_params, Point2, EPS_GEOM};
use crate::polygon::{angle_gap, Polygon};

/// Impacts closer than this (arc length) to a vertex are corner hits.
pub const EPS_CORNER: f64 = 1e-9;

/// State of the billiard map: a foot point in the open side `side` and an
/// outgoing direction. `theta` is measured from the inward normal, positive
/// toward the side's counterclockwise tangent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePoint {
    pub side: usize,
    pub s: f64,
    pub theta: f64,
}

impl PhasePoint {
    pub fn new(side: usize, s: f64, theta: f64) -> Self {
        PhasePoint { side, s, theta }
    }

    /// Phase point leaving `side` at parameter `s` along `direction`, if the
    /// direction points strictly inward.
    pub fn from_direction(p: &Polygon, side: usize, s: f64, direction: Point2) -> Option<Self> {
        let n = p.inward_normal(side);
        let t = p.tangent(side);
        let along_n = direction.dot(n);
        if along_n <= 0.0 {
            return None;
        }
        Some(PhasePoint::new(side, s, direction.dot(t).atan2(along_n)))
    }

    pub fn is_valid(&self, p: &Polygon) -> bool {
        (1..=p.k()).contains(&self.side)
            && self.s > 0.0
            && self.s < 1.0
            && self.theta.abs() < FRAC_PI_2
    }

    pub fn foot(&self, p: &Polygon) -> Point2 {
        p.side(self.side).at(self.s)
    }

    /// Unit outgoing direction in the plane.
    pub fn direction(&self, p: &Polygon) -> Point2 {
        let (sin, cos) = self.theta.sin_cos();
        p.inward_normal(self.side) * cos + p.tangent(self.side) * sin
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepOutcome {
    Next(PhasePoint),
    /// The flight ends within [`EPS_CORNER`] of vertex `vertex`.
    CornerHit { vertex: usize, time: f64 },
    /// The reflected direction grazes side `side`.
    Tangency { side: usize, time: f64 },
    /// No boundary crossing beyond [`EPS_GEOM`] was found; tolerances are
    /// in conflict with the data.
    NumericalStall,
}

/// First boundary point hit by a ray.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RayHit {
    Side { side: usize, s: f64, time: f64 },
    Corner { vertex: usize, time: f64 },
    Miss,
}

/// Casts the ray `origin + t·dir` (unit `dir`) and returns its first
/// boundary crossing with `t > EPS_GEOM`.
pub fn cast_ray(p: &Polygon, origin: Point2, dir: Point2) -> RayHit {
    let mut best: Option<(f64, usize, f64)> = None;
    for (i, seg) in p.sides() {
        let len = seg.length();
        let slack = EPS_CORNER / len;
        if let Some((t, u)) = ray_line_params(origin, dir, &seg) {
            if t > EPS_GEOM
                && u >= -slack
                && u <= 1.0 + slack
                && best.is_none_or(|(bt, _, _)| t < bt)
            {
                best = Some((t, i, u));
            }
        }
    }
    let Some((time, side, u)) = best else {
        return RayHit::Miss;
    };
    let len = p.side(side).length();
    if u * len <= EPS_CORNER {
        RayHit::Corner {
            vertex: side,
            time,
        }
    } else if (1.0 - u) * len <= EPS_CORNER {
        RayHit::Corner {
            vertex: side % p.k() + 1,
            time,
        }
    } else {
        RayHit::Side { side, s: u, time }
    }
}

/// Reflects `dir` in the line of side `side`.
pub fn reflect_direction(p: &Polygon, side: usize, dir: Point2) -> Point2 {
    let n = p.inward_normal(side);
    dir - n * (2.0 * dir.dot(n))
}

/// One application of the billiard map `T`.
pub fn billiard_step(p: &Polygon, u: &PhasePoint) -> StepOutcome {
    let origin = u.foot(p);
    let dir = u.direction(p);
    match cast_ray(p, origin, dir) {
        RayHit::Miss => StepOutcome::NumericalStall,
        RayHit::Corner { vertex, time } => StepOutcome::CornerHit { vertex, time },
        RayHit::Side { side, s, time } => {
            let out = reflect_direction(p, side, dir);
            let n = p.inward_normal(side);
            let t = p.tangent(side);
            let theta = out.dot(t).atan2(out.dot(n));
            if FRAC_PI_2 - theta.abs() <= EPS_GEOM {
                StepOutcome::Tangency { side, time }
            } else {
                StepOutcome::Next(PhasePoint::new(side, s, theta))
            }
        }
    }
}

/// Why an orbit computation stopped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Termination {
    /// All requested steps were taken.
    Completed,
    CornerHit { vertex: usize, step: usize },
    Tangency { side: usize, step: usize },
    NumericalStall { step: usize },
}

impl Termination {
    pub fn describe(&self) -> String {
        match self {
            Termination::Completed => "completed".to_string(),
            Termination::CornerHit { vertex, step } => {
                format!("corner hit at vertex {vertex} on step {step}")
            }
            Termination::Tangency { side, step } => {
                format!("tangency on side {side} at step {step}")
            }
            Termination::NumericalStall { step } => format!("numerical stall at step {step}"),
        }
    }
}

/// Symbolic forward itinerary: `symbols[i]` is the side of `T^i(origin)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Itinerary {
    pub symbols: Vec<usize>,
    pub origin: PhasePoint,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Orbit {
    /// `T^0 u, …, T^m u` for the completed steps.
    pub points: Vec<PhasePoint>,
    pub itinerary: Itinerary,
    pub termination: Termination,
}

/// Applies [`billiard_step`] up to `n` times.
pub fn iterate(p: &Polygon, u: &PhasePoint, n: usize) -> Orbit {
    let mut points = Vec::with_capacity(n + 1);
    points.push(*u);
    let mut termination = Termination::Completed;
    let mut cur = *u;
    for step in 1..=n {
        match billiard_step(p, &cur) {
            StepOutcome::Next(next) => {
                points.push(next);
                cur = next;
            }
            StepOutcome::CornerHit { vertex, .. } => {
                termination = Termination::CornerHit { vertex, step };
                break;
            }
            StepOutcome::Tangency { side, .. } => {
                termination = Termination::Tangency { side, step };
                break;
            }
            StepOutcome::NumericalStall => {
                termination = Termination::NumericalStall { step };
                break;
            }
        }
    }
    let symbols = points.iter().map(|q| q.side).collect();
    Orbit {
        points,
        itinerary: Itinerary {
            symbols,
            origin: *u,
        },
        termination,
    }
}

/// `max(|foot(u) − foot(v)|, gap between directions)`, with directions
/// compared as global angles on the circle.
pub fn rho_distance(p: &Polygon, u: &PhasePoint, v: &PhasePoint) -> f64 {
    let foot = u.foot(p).dist(v.foot(p));
    let gap = angle_gap(u.direction(p).angle(), v.direction(p).angle());
    foot.max(gap)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Periodicity {
    /// `rho(T^period u, u) < tol`.
    Periodic { period: usize },
    /// The itinerary repeats with this period but the phase point does not
    /// come back within tolerance.
    CombinatorialOnly { period: usize },
    NotFound,
    Terminated(Termination),
}

/// Smallest `n <= max_n` with `rho(T^n u, u) < tol`.
pub fn is_periodic(p: &Polygon, u: &PhasePoint, max_n: usize, tol: f64) -> Periodicity {
    let orbit = iterate(p, u, 2 * max_n.max(1));
    if let Some(n) = (1..orbit.points.len().min(max_n + 1))
        .find(|&n| rho_distance(p, &orbit.points[n], u) < tol)
    {
        return Periodicity::Periodic { period: n };
    }
    if orbit.termination != Termination::Completed {
        return Periodicity::Terminated(orbit.termination);
    }
    let sym = &orbit.itinerary.symbols;
    match (1..=max_n).find(|&n| (0..sym.len() - n).all(|i| sym[i] == sym[i + n])) {
        Some(period) => Periodicity::CombinatorialOnly { period },
        None => Periodicity::NotFound,
    }
}

/// Least `i <= horizon` where the itineraries of `u` and `v` differ; `None`
/// when they agree through the horizon or one orbit ends first.
pub fn symbolic_separation_index(
    p: &Polygon,
    u: &PhasePoint,
    v: &PhasePoint,
    horizon: usize,
) -> Option<usize> {
    let a = iterate(p, u, horizon);
    let b = iterate(p, v, horizon);
    a.itinerary
        .symbols
        .iter()
        .zip(&b.itinerary.symbols)
        .position(|(x, y)| x != y)
}
