//! Billiard tables: validated simple polygons with labeled sides and
//! rational-angle structure.
//!
//! Sides and vertices are numbered from 1 in counterclockwise order; side
//! `i` runs from vertex `i` to vertex `i + 1` (mod `k`).

use std::f64::consts::PI;
use std::fmt;

use num_integer::Integer;
use thiserror::Error;

use crate::geom::{Point2, Segment, EPS_GEOM};

/// Largest denominator tried when recognizing `angle / π` from floats.
pub const RECOGNITION_MAX_DENOMINATOR: u64 = 64;
/// Residual allowed when recognizing `angle / π`.
pub const RECOGNITION_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolygonError {
    #[error("a polygon needs at least 3 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("DegenerateVertex: vertex {0} coincides with its neighbour or folds back")]
    DegenerateVertex(usize),
    #[error("StraightAngle: interior angle at vertex {0} is π")]
    StraightAngle(usize),
    #[error("SelfIntersecting: sides {0} and {1} intersect")]
    SelfIntersecting(usize, usize),
    #[error("NonClosing: boundary walk misses its start by {0:e}")]
    NonClosing(f64),
    #[error("non-finite coordinate at vertex {0}")]
    NonFinite(usize),
    #[error("expected {expected} entries, got {got}")]
    CountMismatch { expected: usize, got: usize },
    #[error("side lengths must be positive")]
    BadLength,
    #[error("invalid angle fraction {0}")]
    BadFraction(String),
    #[error("invalid side labels: {0}")]
    BadLabels(String),
}

/// Interior angle `num/den · π`, stored reduced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AngleFraction {
    pub num: u64,
    pub den: u64,
}

impl AngleFraction {
    pub fn new(num: u64, den: u64) -> Result<Self, PolygonError> {
        if den == 0 || num == 0 || num >= 2 * den || num == den {
            return Err(PolygonError::BadFraction(format!("{num}/{den}")));
        }
        let g = num.gcd(&den);
        Ok(AngleFraction {
            num: num / g,
            den: den / g,
        })
    }

    pub fn radians(&self) -> f64 {
        PI * self.num as f64 / self.den as f64
    }
}

impl fmt::Display for AngleFraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    vertices: Vec<Point2>,
    labels: Vec<String>,
    angles: Vec<f64>,
    exact: Option<Vec<AngleFraction>>,
    reoriented: bool,
}

impl Polygon {
    /// Validates a vertex list. Clockwise input is reversed and flagged.
    pub fn new(vertices: Vec<Point2>) -> Result<Self, PolygonError> {
        let k = vertices.len();
        if k < 3 {
            return Err(PolygonError::TooFewVertices(k));
        }
        if let Some(i) = vertices.iter().position(|p| !p.is_finite()) {
            return Err(PolygonError::NonFinite(i + 1));
        }
        let mut vertices = vertices;
        let reoriented = signed_area(&vertices) < 0.0;
        if reoriented {
            vertices.reverse();
        }
        for i in 0..k {
            if vertices[i].dist(vertices[(i + 1) % k]) <= EPS_GEOM {
                return Err(PolygonError::DegenerateVertex(i + 1));
            }
        }
        let angles = interior_angles(&vertices)?;
        check_simple(&vertices)?;
        // A simple polygon traversed counterclockwise has positive area; a
        // zero-area input would have failed the simplicity check.
        Ok(Polygon {
            labels: (1..=k).map(|i| i.to_string()).collect(),
            vertices,
            angles,
            exact: None,
            reoriented,
        })
    }

    /// Builds a polygon by a turtle walk: starts at the origin heading along
    /// +x, walks `lengths[i]` along side `i + 1`, then turns to leave vertex
    /// `i + 2` with interior angle `fractions[i + 1]`.
    pub fn from_exact_angles(
        fractions: &[AngleFraction],
        lengths: &[f64],
    ) -> Result<Self, PolygonError> {
        let k = fractions.len();
        if k < 3 {
            return Err(PolygonError::TooFewVertices(k));
        }
        if lengths.len() != k {
            return Err(PolygonError::CountMismatch {
                expected: k,
                got: lengths.len(),
            });
        }
        if lengths.iter().any(|&l| !(l > 0.0) || !l.is_finite()) {
            return Err(PolygonError::BadLength);
        }
        // Angle sum must be (k - 2)π exactly.
        let lcm = fractions.iter().fold(1u64, |acc, f| acc.lcm(&f.den));
        let total: u64 = fractions.iter().map(|f| f.num * (lcm / f.den)).sum();
        let perimeter: f64 = lengths.iter().sum();
        if total != (k as u64 - 2) * lcm {
            return Err(PolygonError::NonClosing(f64::NAN));
        }

        let mut heading = 0.0f64;
        let mut p = Point2::ORIGIN;
        let mut vertices = Vec::with_capacity(k);
        for i in 0..k {
            vertices.push(p);
            p = p + Point2::from_angle(heading) * lengths[i];
            let next = &fractions[(i + 1) % k];
            // Exterior turn = π − interior angle, computed exactly in units of π.
            heading += PI * (next.den as f64 - next.num as f64) / next.den as f64;
        }
        let residual = p.dist(vertices[0]);
        if residual > EPS_GEOM * perimeter.max(1.0) {
            return Err(PolygonError::NonClosing(residual));
        }
        let mut poly = Polygon::new(vertices)?;
        if poly.reoriented {
            return Err(PolygonError::SelfIntersecting(1, k));
        }
        poly.exact = Some(fractions.to_vec());
        Ok(poly)
    }

    /// Replaces the default `1..k` side labels.
    pub fn with_labels<S: AsRef<str>>(mut self, labels: &[S]) -> Result<Self, PolygonError> {
        if labels.len() != self.k() {
            return Err(PolygonError::CountMismatch {
                expected: self.k(),
                got: labels.len(),
            });
        }
        let labels: Vec<String> = labels.iter().map(|s| s.as_ref().trim().to_string()).collect();
        for (i, l) in labels.iter().enumerate() {
            if l.is_empty() || l.contains(',') || l.contains(char::is_whitespace) {
                return Err(PolygonError::BadLabels(format!("bad label {l:?}")));
            }
            if labels[..i].contains(l) {
                return Err(PolygonError::BadLabels(format!("duplicate label {l:?}")));
            }
        }
        // Reversed input shifts side numbering; keep labels attached to the
        // sides the caller meant.
        self.labels = if self.reoriented {
            let k = labels.len();
            // Original side j (p_j -> p_{j+1}) becomes side k - j after reversal.
            (1..=k).map(|i| labels[(2 * k - i - 1) % k].clone()).collect()
        } else {
            labels
        };
        Ok(self)
    }

    pub fn k(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    /// Vertex `i`, 1-based.
    pub fn vertex(&self, i: usize) -> Point2 {
        self.vertices[(i + self.k() - 1) % self.k()]
    }

    /// Side `i`, 1-based, oriented counterclockwise.
    pub fn side(&self, i: usize) -> Segment {
        Segment::new(self.vertex(i), self.vertex(i + 1))
    }

    pub fn sides(&self) -> impl Iterator<Item = (usize, Segment)> + '_ {
        (1..=self.k()).map(move |i| (i, self.side(i)))
    }

    /// Unit tangent of side `i`.
    pub fn tangent(&self, i: usize) -> Point2 {
        self.side(i).vector().normalized()
    }

    /// Unit inward normal of side `i`.
    pub fn inward_normal(&self, i: usize) -> Point2 {
        self.tangent(i).perp()
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i - 1]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn has_default_labels(&self) -> bool {
        self.labels
            .iter()
            .enumerate()
            .all(|(i, l)| *l == (i + 1).to_string())
    }

    /// Side index for a label or a plain 1-based number.
    pub fn parse_side(&self, token: &str) -> Option<usize> {
        let token = token.trim();
        if let Some(i) = self.labels.iter().position(|l| l == token) {
            return Some(i + 1);
        }
        token
            .parse::<usize>()
            .ok()
            .filter(|i| (1..=self.k()).contains(i))
    }

    /// Interior angle at vertex `i` in radians.
    pub fn angle(&self, i: usize) -> f64 {
        self.angles[(i + self.k() - 1) % self.k()]
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn exact_angles(&self) -> Option<&[AngleFraction]> {
        self.exact.as_deref()
    }

    /// Input was clockwise and has been reversed.
    pub fn was_reoriented(&self) -> bool {
        self.reoriented
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    pub fn perimeter(&self) -> f64 {
        self.sides().map(|(_, s)| s.length()).sum()
    }

    pub fn diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for (i, a) in self.vertices.iter().enumerate() {
            for b in &self.vertices[i + 1..] {
                d = d.max(a.dist(*b));
            }
        }
        d
    }

    /// Position of a boundary point as arc length from vertex 1.
    pub fn arc_position(&self, side: usize, s: f64) -> f64 {
        let before: f64 = (1..side).map(|j| self.side(j).length()).sum();
        before + s * self.side(side).length()
    }

    /// Applies an orientation-preserving map to every vertex, keeping
    /// labels and exact angle tags.
    pub fn map_points<F: Fn(Point2) -> Point2>(&self, f: F) -> Result<Polygon, PolygonError> {
        let mut out = Polygon::new(self.vertices.iter().map(|&p| f(p)).collect())?;
        if out.reoriented {
            return Err(PolygonError::BadLabels(
                "map reverses orientation".to_string(),
            ));
        }
        out.labels = self.labels.clone();
        out.exact = self.exact.clone();
        Ok(out)
    }

    /// Renumbers sides so that new side `i` is old side `i + offset`.
    pub fn rotate_labels(&self, offset: usize) -> Polygon {
        let k = self.k();
        let o = offset % k;
        let mut out = self.clone();
        out.vertices.rotate_left(o);
        out.labels.rotate_left(o);
        out.angles.rotate_left(o);
        if let Some(e) = out.exact.as_mut() {
            e.rotate_left(o);
        }
        out
    }

    pub fn rationality(&self) -> RationalityInfo {
        rationality(self)
    }
}

fn signed_area(v: &[Point2]) -> f64 {
    let k = v.len();
    0.5 * (0..k).map(|i| v[i].cross(v[(i + 1) % k])).sum::<f64>()
}

fn interior_angles(v: &[Point2]) -> Result<Vec<f64>, PolygonError> {
    let k = v.len();
    (0..k)
        .map(|i| {
            let prev = v[(i + k - 1) % k];
            let next = v[(i + 1) % k];
            let e_in = v[i] - prev;
            let e_out = next - v[i];
            let turn = e_in.cross(e_out).atan2(e_in.dot(e_out));
            if turn.abs() <= EPS_GEOM {
                Err(PolygonError::StraightAngle(i + 1))
            } else if PI - turn.abs() <= EPS_GEOM {
                Err(PolygonError::DegenerateVertex(i + 1))
            } else {
                Ok(PI - turn)
            }
        })
        .collect()
}

fn segments_intersect(a: Segment, b: Segment) -> bool {
    let d1 = a.vector().cross(b.a - a.a);
    let d2 = a.vector().cross(b.b - a.a);
    let d3 = b.vector().cross(a.a - b.a);
    let d4 = b.vector().cross(a.b - b.a);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    let on = |p: Point2, s: Segment| {
        crate::geom::line_distance(p, s.a, s.b) <= EPS_GEOM && {
            let t = (p - s.a).dot(s.vector()) / s.vector().dot(s.vector());
            (-EPS_GEOM..=1.0 + EPS_GEOM).contains(&t)
        }
    };
    on(b.a, a) || on(b.b, a) || on(a.a, b) || on(a.b, b)
}

fn check_simple(v: &[Point2]) -> Result<(), PolygonError> {
    let k = v.len();
    let seg = |i: usize| Segment::new(v[i], v[(i + 1) % k]);
    for i in 0..k {
        for j in i + 1..k {
            let adjacent = j == i + 1 || (i == 0 && j == k - 1);
            if adjacent {
                // Adjacent sides may only share their common vertex; overlap
                // would show up as a degenerate angle, already rejected.
                continue;
            }
            if segments_intersect(seg(i), seg(j)) {
                return Err(PolygonError::SelfIntersecting(i + 1, j + 1));
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RationalityKind {
    Rational,
    Irrational,
    Undetermined,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RationalityInfo {
    pub kind: RationalityKind,
    /// Per-vertex fractions of π when rational.
    pub fractions: Vec<AngleFraction>,
    /// lcm of the denominators.
    pub n: Option<u64>,
    /// Fractions were inferred from coordinates rather than given.
    pub recognized: bool,
    /// Direction angle of side 1; the dihedral reflection axes are this
    /// angle plus multiples of `π / N`.
    pub reference_angle: f64,
}

impl RationalityInfo {
    pub fn is_rational(&self) -> bool {
        self.kind == RationalityKind::Rational
    }
}

/// Best rational approximation `p/q` with `q <= max_den` within `tol`, via
/// continued-fraction convergents.
pub fn recognize_fraction(x: f64, max_den: u64, tol: f64) -> Option<(u64, u64)> {
    if !(x > 0.0) || !x.is_finite() {
        return None;
    }
    let (mut h0, mut h1) = (0u64, 1u64);
    let (mut k0, mut k1) = (1u64, 0u64);
    let mut r = x;
    for _ in 0..64 {
        let a = r.floor();
        if a > 1e12 {
            break;
        }
        let a = a as u64;
        let h2 = a * h1 + h0;
        let k2 = a * k1 + k0;
        if k2 > max_den {
            break;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        if (x - h1 as f64 / k1 as f64).abs() <= tol {
            return Some((h1, k1));
        }
        let frac = r - a as f64;
        if frac <= f64::EPSILON {
            break;
        }
        r = 1.0 / frac;
    }
    None
}

/// Rational-angle structure. Never reports `Irrational` from floats.
pub fn rationality(p: &Polygon) -> RationalityInfo {
    let reference_angle = p.tangent(1).angle();
    let build = |fractions: Vec<AngleFraction>, recognized: bool| {
        let n = fractions.iter().fold(1u64, |acc, f| acc.lcm(&f.den));
        RationalityInfo {
            kind: RationalityKind::Rational,
            fractions,
            n: Some(n),
            recognized,
            reference_angle,
        }
    };
    if let Some(exact) = p.exact_angles() {
        return build(exact.to_vec(), false);
    }
    let recognized: Option<Vec<AngleFraction>> = p
        .angles()
        .iter()
        .map(|a| {
            recognize_fraction(a / PI, RECOGNITION_MAX_DENOMINATOR, RECOGNITION_TOLERANCE)
                .and_then(|(m, n)| AngleFraction::new(m, n).ok())
        })
        .collect();
    match recognized {
        Some(fr) => build(fr, true),
        None => RationalityInfo {
            kind: RationalityKind::Undetermined,
            fractions: Vec::new(),
            n: None,
            recognized: false,
            reference_angle,
        },
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OrbitError {
    #[error("NotRational: the dihedral direction group needs a rational polygon")]
    NotRational,
}

/// Reduces an angle to `[0, 2π)`.
pub fn normalize_angle(a: f64) -> f64 {
    let r = a.rem_euclid(2.0 * PI);
    if r >= 2.0 * PI {
        0.0
    } else {
        r
    }
}

/// Distance between two directions on the circle.
pub fn angle_gap(a: f64, b: f64) -> f64 {
    // |a − b| keeps the result exactly symmetric in its arguments.
    let d = normalize_angle((a - b).abs());
    d.min(2.0 * PI - d)
}

/// Orbit of the global direction `theta` under the dihedral group `D_N`
/// generated by reflections in the polygon's side directions. Sorted in
/// `[0, 2π)`, duplicates merged within [`EPS_GEOM`].
pub fn dihedral_orbit(theta: f64, info: &RationalityInfo) -> Result<Vec<f64>, OrbitError> {
    let n = match (info.kind, info.n) {
        (RationalityKind::Rational, Some(n)) => n,
        _ => return Err(OrbitError::NotRational),
    };
    let axis = info.reference_angle;
    let mut out: Vec<f64> = Vec::with_capacity(2 * n as usize);
    for j in 0..n {
        let rot = 2.0 * PI * j as f64 / n as f64;
        out.push(normalize_angle(theta + rot));
        // Reflection in the axis at angle `axis + jπ/N`.
        out.push(normalize_angle(2.0 * axis + rot - theta));
    }
    Ok(dedup_angles(out))
}

/// Sorts and merges directions closer than [`EPS_GEOM`] (cyclically).
pub fn dedup_angles(mut angles: Vec<f64>) -> Vec<f64> {
    angles.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = Vec::with_capacity(angles.len());
    for a in angles {
        if out.last().is_none_or(|&b| angle_gap(a, b) > EPS_GEOM) {
            out.push(a);
        }
    }
    if out.len() > 1 && angle_gap(out[0], *out.last().unwrap()) <= EPS_GEOM {
        out.pop();
    }
    out
}
