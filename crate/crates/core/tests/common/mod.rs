//! Tables and random starts shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use billiards::polygon::AngleFraction;
use billiards::{PhasePoint, Point2, Polygon};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn rect(w: f64, h: f64) -> Polygon {
    Polygon::new(vec![
        Point2::new(0., 0.),
        Point2::new(w, 0.),
        Point2::new(w, h),
        Point2::new(0., h),
    ])
    .unwrap()
}

pub fn square() -> Polygon {
    rect(1.0, 1.0)
}

/// The 1×3 L-shaped table, labeled bottom, right, top of the short arm,
/// inner wall, top, left.
pub fn l_table() -> Polygon {
    Polygon::new(vec![
        Point2::new(0., 0.),
        Point2::new(5., 0.),
        Point2::new(5., 1.),
        Point2::new(3., 1.),
        Point2::new(3., 3.),
        Point2::new(0., 3.),
    ])
    .unwrap()
    .with_labels(&["b", "r", "t", "s", "u", "l"])
    .unwrap()
}

pub fn equilateral() -> Polygon {
    Polygon::from_exact_angles(&[AngleFraction::new(1, 3).unwrap(); 3], &[1.0; 3]).unwrap()
}

pub fn right_isoceles() -> Polygon {
    let q = AngleFraction::new(1, 4).unwrap();
    let r = AngleFraction::new(1, 2).unwrap();
    Polygon::from_exact_angles(&[q, r, q], &[1.0, 1.0, 2f64.sqrt()]).unwrap()
}

/// Star-shaped about the origin, with no angle near π.
pub fn random_hexagon(rng: &mut ChaCha8Rng) -> Polygon {
    loop {
        let mut angles: Vec<f64> = (0..6).map(|_| rng.gen_range(0.0..2.0 * PI)).collect();
        angles.sort_by(f64::total_cmp);
        let v = angles
            .iter()
            .map(|&a| Point2::from_angle(a) * rng.gen_range(0.6..1.4))
            .collect();
        if let Ok(p) = Polygon::new(v) {
            if p.angles().iter().all(|&a| (a - PI).abs() > 0.05) {
                return p;
            }
        }
    }
}

pub fn random_start(p: &Polygon, rng: &mut ChaCha8Rng) -> PhasePoint {
    PhasePoint::new(
        rng.gen_range(1..=p.k()),
        rng.gen_range(0.01..0.99),
        rng.gen_range(-1.4..1.4),
    )
}
