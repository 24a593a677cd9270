//! Planar primitives and the isometry algebra behind unfolding.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use thiserror::Error;

/// Point/line incidence tolerance.
pub const EPS_GEOM: f64 = 1e-9;
/// Isometry classification tolerance.
pub const EPS_ISO: f64 = 1e-7;

/// Compositions allowed before the linear part is re-orthonormalized.
const RENORMALIZE_EVERY: u32 = 16;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("degenerate line: endpoints coincide")]
    DegenerateLine,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const ORIGIN: Point2 = Point2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    /// Unit vector at angle `phi` (radians, counterclockwise from +x).
    pub fn from_angle(phi: f64) -> Self {
        Point2::new(phi.cos(), phi.sin())
    }

    pub fn dot(self, other: Point2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3D cross product.
    pub fn cross(self, other: Point2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, other: Point2) -> f64 {
        (self - other).norm()
    }

    pub fn normalized(self) -> Point2 {
        let n = self.norm();
        Point2::new(self.x / n, self.y / n)
    }

    /// Rotation by +90 degrees.
    pub fn perp(self) -> Point2 {
        Point2::new(-self.y, self.x)
    }

    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }

    pub fn lerp(self, other: Point2, t: f64) -> Point2 {
        self + (other - self) * t
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, o: Point2) -> Point2 {
        Point2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, o: Point2) -> Point2 {
        Point2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, k: f64) -> Point2 {
        Point2::new(self.x * k, self.y * k)
    }
}

impl Neg for Point2 {
    type Output = Point2;
    fn neg(self) -> Point2 {
        Point2::new(-self.x, -self.y)
    }
}

impl fmt::Display for Point2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Closed segment from `a` to `b`. Whether the endpoints count is up to the caller.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub a: Point2,
    pub b: Point2,
}

impl Segment {
    pub const fn new(a: Point2, b: Point2) -> Self {
        Segment { a, b }
    }

    pub fn at(&self, s: f64) -> Point2 {
        self.a.lerp(self.b, s)
    }

    pub fn vector(&self) -> Point2 {
        self.b - self.a
    }

    pub fn length(&self) -> f64 {
        self.vector().norm()
    }

    pub fn midpoint(&self) -> Point2 {
        self.at(0.5)
    }
}

/// Open interval of reals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    pub fn unit() -> Self {
        Interval::new(0.0, 1.0)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn is_empty(&self) -> bool {
        !(self.hi > self.lo)
    }

    pub fn contains(&self, x: f64) -> bool {
        x > self.lo && x < self.hi
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn intersect(&self, other: &Interval) -> Interval {
        Interval::new(self.lo.max(other.lo), self.hi.min(other.hi))
    }
}

/// Mirror image of `p` in the line through `a` and `b`.
pub fn reflect_across_line(p: Point2, a: Point2, b: Point2) -> Result<Point2, GeomError> {
    Ok(Isometry2::reflection(a, b)?.apply(p))
}

/// Distance from `p` to the infinite line through `a`, `b`.
pub fn line_distance(p: Point2, a: Point2, b: Point2) -> f64 {
    let d = b - a;
    (d.cross(p - a)).abs() / d.norm()
}

/// Orientation flag of an isometry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    Preserving,
    Reversing,
}

/// Planar isometry `p -> L p + t`, with `L` orthogonal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Isometry2 {
    /// Row-major linear part.
    pub linear: [[f64; 2]; 2],
    pub translation: Point2,
    compositions: u32,
}

impl Isometry2 {
    pub const IDENTITY: Isometry2 = Isometry2 {
        linear: [[1.0, 0.0], [0.0, 1.0]],
        translation: Point2::ORIGIN,
        compositions: 0,
    };

    pub fn new(linear: [[f64; 2]; 2], translation: Point2) -> Self {
        Isometry2 {
            linear,
            translation,
            compositions: 0,
        }
    }

    pub fn translation(v: Point2) -> Self {
        Isometry2::new([[1.0, 0.0], [0.0, 1.0]], v)
    }

    /// Rotation by `angle` about `center`.
    pub fn rotation(center: Point2, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        let linear = [[c, -s], [s, c]];
        let rc = apply_linear(&linear, center);
        Isometry2::new(linear, center - rc)
    }

    /// Reflection in the line through `a` and `b`.
    pub fn reflection(a: Point2, b: Point2) -> Result<Self, GeomError> {
        let d = b - a;
        if d.norm() <= EPS_GEOM {
            return Err(GeomError::DegenerateLine);
        }
        let u = d.normalized();
        let linear = [
            [2.0 * u.x * u.x - 1.0, 2.0 * u.x * u.y],
            [2.0 * u.x * u.y, 2.0 * u.y * u.y - 1.0],
        ];
        let la = apply_linear(&linear, a);
        Ok(Isometry2::new(linear, a - la))
    }

    pub fn apply(&self, p: Point2) -> Point2 {
        apply_linear(&self.linear, p) + self.translation
    }

    /// Applies only the linear part (for direction vectors).
    pub fn apply_vector(&self, v: Point2) -> Point2 {
        apply_linear(&self.linear, v)
    }

    pub fn determinant(&self) -> f64 {
        let l = &self.linear;
        l[0][0] * l[1][1] - l[0][1] * l[1][0]
    }

    pub fn orientation(&self) -> Orientation {
        if self.determinant() >= 0.0 {
            Orientation::Preserving
        } else {
            Orientation::Reversing
        }
    }

    pub fn is_reversing(&self) -> bool {
        self.orientation() == Orientation::Reversing
    }

    pub fn inverse(&self) -> Isometry2 {
        // Orthogonal: inverse of L is its transpose.
        let l = &self.linear;
        let lt = [[l[0][0], l[1][0]], [l[0][1], l[1][1]]];
        let t = -apply_linear(&lt, self.translation);
        Isometry2 {
            linear: lt,
            translation: t,
            compositions: self.compositions,
        }
    }

    /// True when the linear part is orthogonal within `tol`.
    pub fn is_orthogonal(&self, tol: f64) -> bool {
        let l = &self.linear;
        let r0 = l[0][0].hypot(l[0][1]);
        let r1 = l[1][0].hypot(l[1][1]);
        let dot = l[0][0] * l[1][0] + l[0][1] * l[1][1];
        (r0 - 1.0).abs() <= tol && (r1 - 1.0).abs() <= tol && dot.abs() <= tol
    }

    fn orthonormalized(mut self) -> Self {
        let l = &mut self.linear;
        let mut c0 = Point2::new(l[0][0], l[1][0]);
        c0 = c0.normalized();
        let c1 = Point2::new(l[0][1], l[1][1]);
        let c1 = (c1 - c0 * c0.dot(c1)).normalized();
        *l = [[c0.x, c1.x], [c0.y, c1.y]];
        self.compositions = 0;
        self
    }
}

impl fmt::Display for Isometry2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let l = &self.linear;
        write!(
            f,
            "[[{:.12}, {:.12}], [{:.12}, {:.12}]] + {}",
            l[0][0], l[0][1], l[1][0], l[1][1], self.translation
        )
    }
}

fn apply_linear(l: &[[f64; 2]; 2], p: Point2) -> Point2 {
    Point2::new(l[0][0] * p.x + l[0][1] * p.y, l[1][0] * p.x + l[1][1] * p.y)
}

/// `a ∘ b`: applies `b` first, then `a`.
pub fn compose(a: &Isometry2, b: &Isometry2) -> Isometry2 {
    let la = &a.linear;
    let lb = &b.linear;
    let mut linear = [[0.0; 2]; 2];
    for (i, row) in linear.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = la[i][0] * lb[0][j] + la[i][1] * lb[1][j];
        }
    }
    let out = Isometry2 {
        linear,
        translation: a.apply(b.translation),
        compositions: a.compositions + b.compositions + 1,
    };
    if out.compositions >= RENORMALIZE_EVERY {
        out.orthonormalized()
    } else {
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IsometryClass {
    Identity,
    Translation {
        vector: Point2,
    },
    Rotation {
        center: Point2,
        angle: f64,
    },
    /// Reflection in the line through `point` with unit `direction`.
    Reflection {
        point: Point2,
        direction: Point2,
    },
    /// Reflection followed by translation by `vector` along the axis.
    Glide {
        point: Point2,
        direction: Point2,
        vector: Point2,
    },
}

impl IsometryClass {
    pub fn kind_name(&self) -> &'static str {
        match self {
            IsometryClass::Identity => "identity",
            IsometryClass::Translation { .. } => "translation",
            IsometryClass::Rotation { .. } => "rotation",
            IsometryClass::Reflection { .. } => "reflection",
            IsometryClass::Glide { .. } => "glide",
        }
    }
}

impl fmt::Display for IsometryClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IsometryClass::Identity => write!(f, "identity"),
            IsometryClass::Translation { vector } => write!(f, "translation {}", vector),
            IsometryClass::Rotation { center, angle } => {
                write!(f, "rotation {} about {}", angle, center)
            }
            IsometryClass::Reflection { point, direction } => {
                write!(f, "reflection axis {} dir {}", point, direction)
            }
            IsometryClass::Glide {
                point,
                direction,
                vector,
            } => write!(f, "glide axis {} dir {} by {}", point, direction, vector),
        }
    }
}

/// Classifies `g` by orientation and fixed-point structure. Near-ties go to
/// the more degenerate class.
pub fn classify(g: &Isometry2, tol: f64) -> IsometryClass {
    let l = &g.linear;
    let t = g.translation;
    match g.orientation() {
        Orientation::Preserving => {
            let angle = l[1][0].atan2(l[0][0]);
            if angle.abs() <= tol {
                if t.norm() <= tol {
                    IsometryClass::Identity
                } else {
                    IsometryClass::Translation { vector: t }
                }
            } else {
                // (I - L) c = t
                let a = 1.0 - l[0][0];
                let b = -l[0][1];
                let c = -l[1][0];
                let d = 1.0 - l[1][1];
                let det = a * d - b * c;
                let center = Point2::new((d * t.x - b * t.y) / det, (a * t.y - c * t.x) / det);
                IsometryClass::Rotation { center, angle }
            }
        }
        Orientation::Reversing => {
            // L = [[cos 2φ, sin 2φ], [sin 2φ, -cos 2φ]]
            let phi = 0.5 * l[1][0].atan2(l[0][0]);
            let u = Point2::from_angle(phi);
            let n = u.perp();
            let along = t.dot(u);
            let point = n * (0.5 * t.dot(n));
            if along.abs() <= tol {
                IsometryClass::Reflection {
                    point,
                    direction: u,
                }
            } else {
                IsometryClass::Glide {
                    point,
                    direction: u,
                    vector: u * along,
                }
            }
        }
    }
}

/// Parameters `s ∈ (0, 1)` for which the ray from `base.at(s)` in direction
/// `v` crosses the open segment `target`. The result is a single open
/// interval; `None` when empty.
pub fn chord_param_interval(base: &Segment, v: Point2, target: &Segment) -> Option<Interval> {
    let w = base.vector();
    let k = v.cross(w);
    if k.abs() <= EPS_GEOM * v.norm() * w.norm() {
        return None;
    }
    // Side of endpoint A relative to the ray line through base(s):
    // cross(v, A - base(s)) = cross(v, A - base.a) - s k.
    let side = |p: Point2| v.cross(p - base.a) / k;
    let (sa, sb) = (side(target.a), side(target.b));
    let mut iv = Interval::new(sa.min(sb), sa.max(sb)).intersect(&Interval::unit());

    // Ray parameter of the crossing is affine in s; keep the part with t > 0.
    let g = target.vector();
    let denom = v.cross(g);
    if denom.abs() <= EPS_GEOM * v.norm() * g.norm() {
        return None;
    }
    // t(s) = cross(target.a - base(s), g) / denom
    let t0 = (target.a - base.a).cross(g) / denom;
    let t1 = -w.cross(g) / denom;
    if t1.abs() <= f64::EPSILON {
        if t0 <= 0.0 {
            return None;
        }
    } else {
        let root = -t0 / t1;
        if t1 > 0.0 {
            iv.lo = iv.lo.max(root);
        } else {
            iv.hi = iv.hi.min(root);
        }
    }
    (!iv.is_empty()).then_some(iv)
}

/// Parameter along `seg` and along the ray where the ray `origin + t v`
/// meets the segment's supporting line, if not parallel.
pub fn ray_line_params(origin: Point2, v: Point2, seg: &Segment) -> Option<(f64, f64)> {
    let g = seg.vector();
    let denom = v.cross(g);
    if denom.abs() <= 1e-15 * v.norm() * g.norm() {
        return None;
    }
    let d = seg.a - origin;
    let t = d.cross(g) / denom;
    let s = d.cross(v) / denom;
    Some((t, s))
}
