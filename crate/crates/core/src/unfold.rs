//! Unfolding: replace each reflection of the trajectory by a reflection of
//! the table, so an orbit segment becomes a straight chord through a
//! corridor of reflected copies.
//!
//! Convention: `frames[0]` is the identity and
//! `frames[i + 1] = frames[i] ∘ R(σ_i)`, where `R(σ)` reflects in the line of
//! side `σ` of the original table. Gate `i` is `frames[i](side σ_i)`. A
//! chord crosses gate `i` out of copy `i` into copy `i + 1`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rayon::prelude::*;
use thiserror::Error;

use crate::billiard::{cast_ray, reflect_direction, PhasePoint, RayHit};
use crate::geom::{compose, Isometry2, Point2, Segment, EPS_GEOM};
use crate::polygon::Polygon;

/// Margin for strict crossing of an open gate.
pub const EPS_GATE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum UnfoldError {
    #[error("empty symbol sequence")]
    Empty,
    #[error("RepeatedSymbol: symbol {symbol} repeats at position {index}")]
    RepeatedSymbol { index: usize, symbol: usize },
    #[error("BadSymbol: {symbol} is not a side of a {k}-gon")]
    BadSymbol { symbol: usize, k: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Corridor {
    pub symbols: Vec<usize>,
    /// `symbols.len() + 1` frames; the last one is the terminal isometry.
    pub frames: Vec<Isometry2>,
    pub gates: Vec<Segment>,
}

impl Corridor {
    pub fn terminal(&self) -> &Isometry2 {
        self.frames.last().expect("corridor has frames")
    }

    /// Vertices of copy `j` of the table.
    pub fn copy(&self, p: &Polygon, j: usize) -> Vec<Point2> {
        p.vertices().iter().map(|&v| self.frames[j].apply(v)).collect()
    }

    /// Endpoints of gate `i` as (left, right) relative to a chord crossing
    /// it from copy `i` into copy `i + 1`.
    pub fn gate_sides(&self, i: usize) -> (Point2, Point2) {
        gate_sides(&self.gates[i], &self.frames[i])
    }
}

fn gate_sides(gate: &Segment, frame: &Isometry2) -> (Point2, Point2) {
    // The copy lies to the left of the gate when the frame preserves
    // orientation; leaving it puts the gate's end on the chord's left.
    if frame.is_reversing() {
        (gate.a, gate.b)
    } else {
        (gate.b, gate.a)
    }
}

pub(crate) fn side_reflection(p: &Polygon, side: usize) -> Isometry2 {
    let seg = p.side(side);
    Isometry2::reflection(seg.a, seg.b).expect("validated polygon has non-degenerate sides")
}

/// Unfolds a symbol sequence into its corridor.
pub fn unfold_code(p: &Polygon, symbols: &[usize]) -> Result<Corridor, UnfoldError> {
    if symbols.is_empty() {
        return Err(UnfoldError::Empty);
    }
    let k = p.k();
    if let Some(&symbol) = symbols.iter().find(|&&s| s == 0 || s > k) {
        return Err(UnfoldError::BadSymbol { symbol, k });
    }
    if let Some(index) = symbols.windows(2).position(|w| w[0] == w[1]) {
        return Err(UnfoldError::RepeatedSymbol {
            index,
            symbol: symbols[index],
        });
    }
    let mut frames = Vec::with_capacity(symbols.len() + 1);
    let mut gates = Vec::with_capacity(symbols.len());
    frames.push(Isometry2::IDENTITY);
    for &s in symbols {
        let frame = *frames.last().unwrap();
        let side = p.side(s);
        gates.push(Segment::new(frame.apply(side.a), frame.apply(side.b)));
        frames.push(compose(&frame, &side_reflection(p, s)));
    }
    Ok(Corridor {
        symbols: symbols.to_vec(),
        frames,
        gates,
    })
}

/// Unfolded impact points of an orbit: point `i` is `frames[i]` applied to
/// the foot of `orbit[i]`.
pub fn unfolded_impacts(p: &Polygon, orbit: &[PhasePoint]) -> Vec<Point2> {
    let mut frame = Isometry2::IDENTITY;
    let mut out = Vec::with_capacity(orbit.len());
    for u in orbit {
        out.push(frame.apply(u.foot(p)));
        frame = compose(&frame, &side_reflection(p, u.side));
    }
    out
}

/// Maximum perpendicular deviation of the unfolded impact points from
/// their total-least-squares line.
pub fn straightness_check(p: &Polygon, orbit: &[PhasePoint]) -> f64 {
    max_line_deviation(&unfolded_impacts(p, orbit))
}

pub(crate) fn max_line_deviation(pts: &[Point2]) -> f64 {
    if pts.len() < 3 {
        return 0.0;
    }
    let n = pts.len() as f64;
    let c = pts.iter().fold(Point2::ORIGIN, |acc, &q| acc + q) * (1.0 / n);
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for q in pts {
        let d = *q - c;
        sxx += d.x * d.x;
        sxy += d.x * d.y;
        syy += d.y * d.y;
    }
    // Principal axis of the scatter matrix.
    let phi = 0.5 * (2.0 * sxy).atan2(sxx - syy);
    let normal = Point2::from_angle(phi).perp();
    pts.iter()
        .map(|q| (*q - c).dot(normal).abs())
        .fold(0.0, f64::max)
}

/// Orbit segment from corner `start` to corner `end` reflecting off the
/// sides in `code`, with no corner in between.
#[derive(Debug, Clone, PartialEq)]
pub struct SaddleConnection {
    pub start: usize,
    pub end: usize,
    pub code: Vec<usize>,
    /// Initial direction angle (radians, global frame).
    pub direction: f64,
    pub length: f64,
}

/// Traces a billiard ray from `origin` along `dir`, expecting to reflect in
/// `code` and then hit `corner`. Returns the final flight direction.
fn trace_to_corner(
    p: &Polygon,
    origin: Point2,
    dir: Point2,
    code: &[usize],
    corner: usize,
) -> Option<Point2> {
    let mut pos = origin;
    let mut d = dir;
    for &side in code {
        match cast_ray(p, pos, d) {
            RayHit::Side { side: hit, s, .. } if hit == side => {
                pos = p.side(side).at(s);
                d = reflect_direction(p, side, d);
            }
            _ => return None,
        }
    }
    match cast_ray(p, pos, d) {
        RayHit::Corner { vertex, .. } if vertex == corner => Some(d),
        _ => None,
    }
}

/// Angular arcs `(lo, hi)` measured from a reference direction, all inside
/// `(-π, π]`.
type Arcs = Vec<(f64, f64)>;

fn wrap(a: f64) -> f64 {
    let mut r = (a + PI).rem_euclid(2.0 * PI) - PI;
    if r <= -PI {
        r += 2.0 * PI;
    }
    r
}

/// Directions from `apex`, relative to `reference`, that cross the open
/// segment `gate`; as one or two arcs inside `(-π, π]`.
fn gate_arcs(apex: Point2, reference: f64, gate: &Segment) -> Arcs {
    let a = wrap((gate.a - apex).angle() - reference);
    let sweep = wrap((gate.b - apex).angle() - (gate.a - apex).angle());
    let (lo, hi) = if sweep >= 0.0 { (a, a + sweep) } else { (a + sweep, a) };
    let mut out = Vec::with_capacity(2);
    if lo < -PI {
        out.push((lo + 2.0 * PI, PI));
        out.push((-PI, hi));
    } else if hi > PI {
        out.push((lo, PI));
        out.push((-PI, hi - 2.0 * PI));
    } else {
        out.push((lo, hi));
    }
    out
}

fn intersect_arcs(a: &Arcs, b: &Arcs) -> Arcs {
    let mut out = Vec::new();
    for &(alo, ahi) in a {
        for &(blo, bhi) in b {
            let lo = alo.max(blo);
            let hi = ahi.min(bhi);
            // Keep touching arcs: pruning must never drop a feasible branch.
            if hi >= lo - 1e-12 {
                out.push((lo, hi));
            }
        }
    }
    out
}

fn arcs_contain(arcs: &Arcs, x: f64, margin: f64) -> bool {
    arcs.iter().any(|&(lo, hi)| x > lo + margin && x < hi - margin)
}

struct SaddleSearch<'a> {
    p: &'a Polygon,
    start: usize,
    apex: Point2,
    reference: f64,
    max_depth: usize,
    found: Vec<SaddleConnection>,
}

impl SaddleSearch<'_> {
    fn visit(&mut self, code: &mut Vec<usize>, frame: Isometry2, arcs: &Arcs) {
        let p = self.p;
        // Try to end the connection at a corner of the current copy.
        for w in 1..=p.k() {
            let target = frame.apply(p.vertex(w));
            let v = target - self.apex;
            let len = v.norm();
            if len <= EPS_GEOM {
                continue;
            }
            let rel = wrap(v.angle() - self.reference);
            if !arcs_contain(arcs, rel, 1e-12) {
                continue;
            }
            let dir = v * (1.0 / len);
            if trace_to_corner(p, self.apex, dir, code, w).is_some() {
                self.found.push(SaddleConnection {
                    start: self.start,
                    end: w,
                    code: code.clone(),
                    direction: dir.angle(),
                    length: len,
                });
            }
        }
        if code.len() + 1 >= self.max_depth {
            return;
        }
        for side in 1..=p.k() {
            if code.last() == Some(&side) {
                continue;
            }
            if code.is_empty() && (side == self.start || side % p.k() + 1 == self.start) {
                continue;
            }
            let seg = p.side(side);
            let gate = Segment::new(frame.apply(seg.a), frame.apply(seg.b));
            let next = intersect_arcs(arcs, &gate_arcs(self.apex, self.reference, &gate));
            if next.is_empty() {
                continue;
            }
            code.push(side);
            self.visit(code, compose(&frame, &side_reflection(p, side)), &next);
            code.pop();
        }
    }
}

/// Canonical orientation: lower start index first; for loops, the smaller
/// of the code and its reversal.
fn canonical_orientation(c: &SaddleConnection, final_dir: Point2) -> SaddleConnection {
    let mut rev_code = c.code.clone();
    rev_code.reverse();
    let reverse = c.start > c.end || (c.start == c.end && rev_code < c.code);
    if reverse {
        SaddleConnection {
            start: c.end,
            end: c.start,
            code: rev_code,
            direction: (-final_dir).angle(),
            length: c.length,
        }
    } else {
        c.clone()
    }
}

/// Enumerates saddle connections made of at most `max_depth` straight
/// flights (so codes of length `< max_depth`), deduplicated by
/// `(start, end, code)` in canonical orientation.
pub fn find_saddle_connections(p: &Polygon, max_depth: usize) -> Vec<SaddleConnection> {
    if max_depth == 0 {
        return Vec::new();
    }
    let per_start: Vec<Vec<(SaddleConnection, Point2)>> = (1..=p.k())
        .into_par_iter()
        .map(|start| {
            let apex = p.vertex(start);
            let interior = p.angle(start);
            // Directions from the corner into the table span the interior
            // angle, starting along the outgoing side.
            let out_side = p.tangent(start).angle();
            let reference = out_side + 0.5 * interior;
            let half = 0.5 * interior;
            let arcs = vec![(-half, half)];
            let mut search = SaddleSearch {
                p,
                start,
                apex,
                reference,
                max_depth,
                found: Vec::new(),
            };
            let mut code = Vec::new();
            search.visit(&mut code, Isometry2::IDENTITY, &arcs);
            search
                .found
                .into_iter()
                .map(|c| {
                    let last = final_direction(p, &c);
                    (c, last)
                })
                .collect()
        })
        .collect();
    let mut merged: BTreeMap<(usize, usize, Vec<usize>), SaddleConnection> = BTreeMap::new();
    for (c, last) in per_start.into_iter().flatten() {
        let c = canonical_orientation(&c, last);
        merged.entry((c.start, c.end, c.code.clone())).or_insert(c);
    }
    merged.into_values().collect()
}

fn final_direction(p: &Polygon, c: &SaddleConnection) -> Point2 {
    let mut d = Point2::from_angle(c.direction);
    for &side in &c.code {
        d = reflect_direction(p, side, d);
    }
    d
}
