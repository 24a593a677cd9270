//! Comparing the periodic-code spectra of two tables at bounded depth and
//! recovering the similarity (or affine map) behind an equality.

use std::fmt;

use rayon::prelude::*;
use thiserror::Error;

use crate::billiard::{iterate, PhasePoint};
use crate::geom::Point2;
use crate::periodic::{enumerate_spectrum, CylinderFamily, Spectrum, SpectrumError, SpectrumOptions};
use crate::polygon::Polygon;

/// Relative vertex residual accepted by [`similarity_recover`].
pub const EPS_SIM: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    EqualToDepth,
    Differ,
    /// An enumeration hit its node budget, so neither answer is trustworthy.
    InconclusivePartial,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::EqualToDepth => "equal_to_depth",
            Verdict::Differ => "differ",
            Verdict::InconclusivePartial => "inconclusive_partial",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SimilarityKind {
    /// Rotation by `rotation` radians and uniform `scale`, after a mirror
    /// when `reflected`.
    Similar {
        scale: f64,
        rotation: f64,
        reflected: bool,
    },
    AffinelySimilar,
}

/// `x ↦ linear·x + translation`, taking P's vertices onto Q's.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Similarity {
    pub kind: SimilarityKind,
    pub linear: [[f64; 2]; 2],
    pub translation: Point2,
    /// Largest vertex error divided by the diameter of Q.
    pub residual: f64,
}

impl Similarity {
    pub fn apply(&self, p: Point2) -> Point2 {
        let m = &self.linear;
        Point2::new(
            m[0][0] * p.x + m[0][1] * p.y,
            m[1][0] * p.x + m[1][1] * p.y,
        ) + self.translation
    }

    pub fn is_similar(&self) -> bool {
        matches!(self.kind, SimilarityKind::Similar { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Witness {
    /// Canonical word in the shared side numbering.
    pub code: Vec<usize>,
    /// Present in P's spectrum (otherwise only in Q's).
    pub in_p: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub depth: usize,
    /// Q's side `i` is identified with P's side `i + offset`.
    pub offset: usize,
    /// Q's labeling runs clockwise against P's.
    pub reflected_labeling: bool,
    pub verdict: Verdict,
    pub witnesses: Vec<Witness>,
    pub similarity: Option<Similarity>,
    pub n_p: Option<u64>,
    pub n_q: Option<u64>,
    pub codes_p: usize,
    pub codes_q: usize,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CompareError {
    #[error("SideCountMismatch: {p} sides against {q}")]
    SideCountMismatch { p: usize, q: usize },
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RecoverError {
    #[error("InsufficientMatches: need two matched families with independent directions")]
    InsufficientMatches,
}

/// Writes `x` with 12 significant digits, trailing zeros trimmed.
pub fn sig12(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x.is_finite() { "0".to_string() } else { x.to_string() };
    }
    let e = x.abs().log10().floor() as i32;
    if (-5..12).contains(&e) {
        let s = format!("{:.*}", (11 - e).max(0) as usize, x);
        let s = if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        };
        if s == "-0" {
            "0".to_string()
        } else {
            s
        }
    } else {
        format!("{x:.11e}")
    }
}

impl ComparisonReport {
    /// Plain-text block: verdict and context lines, one witness per line,
    /// similarity parameters to 12 significant digits.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("verdict: {}\n", self.verdict));
        out.push_str(&format!("depth: {}\n", self.depth));
        out.push_str(&format!("offset: {}\n", self.offset));
        if self.reflected_labeling {
            out.push_str("labeling: reflected (clockwise identification)\n");
        }
        out.push_str(&format!("codes: P={} Q={}\n", self.codes_p, self.codes_q));
        let n = |v: Option<u64>| v.map_or("none".to_string(), |n| n.to_string());
        out.push_str(&format!("N_P: {}\nN_Q: {}\n", n(self.n_p), n(self.n_q)));
        for w in &self.witnesses {
            let word: Vec<String> = w.code.iter().map(|s| s.to_string()).collect();
            let side = if w.in_p { "P" } else { "Q" };
            out.push_str(&format!("witness {side}: {}\n", word.join(",")));
        }
        match &self.similarity {
            None => out.push_str("similarity: none\n"),
            Some(s) => {
                match s.kind {
                    SimilarityKind::Similar {
                        scale,
                        rotation,
                        reflected,
                    } => out.push_str(&format!(
                        "similarity: similar scale={} rotation_deg={} reflected={}\n",
                        sig12(scale),
                        sig12(rotation.to_degrees()),
                        reflected
                    )),
                    SimilarityKind::AffinelySimilar => out.push_str("similarity: affinely_similar\n"),
                }
                let m = &s.linear;
                out.push_str(&format!(
                    "linear: {} {} {} {}\n",
                    sig12(m[0][0]),
                    sig12(m[0][1]),
                    sig12(m[1][0]),
                    sig12(m[1][1])
                ));
                out.push_str(&format!(
                    "translation: {} {}\n",
                    sig12(s.translation.x),
                    sig12(s.translation.y)
                ));
                out.push_str(&format!("residual: {}\n", sig12(s.residual)));
            }
        }
        out
    }
}

/// Q relabeled so that its side `i` becomes side `i - offset`; with
/// `reflected`, Q is first mirrored so its sides run the other way.
fn relabel(q: &Polygon, offset: usize, reflected: bool) -> Polygon {
    let k = q.k();
    let base = if reflected { mirror(q) } else { q.clone() };
    base.rotate_labels((k - offset % k) % k)
}

fn mirror(q: &Polygon) -> Polygon {
    let v: Vec<Point2> = q.vertices().iter().map(|p| Point2::new(-p.x, p.y)).collect();
    Polygon::new(v).expect("mirror image of a valid polygon is valid")
}

fn mat_mul(a: &[[f64; 2]; 2], b: &[[f64; 2]; 2]) -> [[f64; 2]; 2] {
    [
        [
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
        ],
        [
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        ],
    ]
}

fn apply(m: &[[f64; 2]; 2], p: Point2) -> Point2 {
    Point2::new(m[0][0] * p.x + m[0][1] * p.y, m[1][0] * p.x + m[1][1] * p.y)
}

/// Recovers the map taking P onto Q from matched families: the linear part
/// is the least-squares fit sending each P translation vector to its Q
/// partner (general when `N_P = 2`, conformal otherwise); the translation
/// and the acceptance test come from the vertices, matched by index.
pub fn similarity_recover(
    p: &Polygon,
    q: &Polygon,
    matched: &[(CylinderFamily, CylinderFamily)],
) -> Result<Option<Similarity>, RecoverError> {
    let pairs: Vec<(Point2, Point2)> = matched
        .iter()
        .map(|(a, b)| (a.translation, b.translation))
        .collect();
    // Normal matrix of the P vectors; singular when they are all parallel.
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (a, _) in &pairs {
        sxx += a.x * a.x;
        sxy += a.x * a.y;
        syy += a.y * a.y;
    }
    let det = sxx * syy - sxy * sxy;
    let trace = sxx + syy;
    if pairs.len() < 2 || det <= 1e-12 * trace * trace {
        return Err(RecoverError::InsufficientMatches);
    }

    let general = p.rationality().n == Some(2);
    let linear = if general {
        // A = (Σ q aᵀ)(Σ a aᵀ)⁻¹
        let (mut m00, mut m01, mut m10, mut m11) = (0.0, 0.0, 0.0, 0.0);
        for (a, b) in &pairs {
            m00 += b.x * a.x;
            m01 += b.x * a.y;
            m10 += b.y * a.x;
            m11 += b.y * a.y;
        }
        let inv = [[syy / det, -sxy / det], [-sxy / det, sxx / det]];
        mat_mul(&[[m00, m01], [m10, m11]], &inv)
    } else {
        let (mut dot, mut cross) = (0.0, 0.0);
        for (a, b) in &pairs {
            dot += a.dot(*b);
            cross += a.cross(*b);
        }
        let (c, s) = (dot / trace, cross / trace);
        [[c, -s], [s, c]]
    };

    let k = p.k();
    let mut t = Point2::ORIGIN;
    for i in 1..=k {
        t = t + (q.vertex(i) - apply(&linear, p.vertex(i)));
    }
    let t = t * (1.0 / k as f64);
    let err = (1..=k)
        .map(|i| (apply(&linear, p.vertex(i)) + t).dist(q.vertex(i)))
        .fold(0.0, f64::max);
    let residual = err / q.diameter();
    if !(residual < EPS_SIM) {
        return Ok(None);
    }

    let [[a, b], [c, d]] = linear;
    let scale = (a * d - b * c).abs().sqrt();
    let conformal = (a - d).abs() <= EPS_SIM * scale && (b + c).abs() <= EPS_SIM * scale;
    let kind = if conformal {
        SimilarityKind::Similar {
            scale: (a * a + c * c).sqrt(),
            rotation: c.atan2(a),
            reflected: false,
        }
    } else {
        SimilarityKind::AffinelySimilar
    };
    Ok(Some(Similarity {
        kind,
        linear,
        translation: t,
        residual,
    }))
}

fn spectrum(p: &Polygon, depth: usize, opts: SpectrumOptions) -> Result<Spectrum, SpectrumError> {
    enumerate_spectrum(p, depth, opts)
}

fn build_report(
    p: &Polygon,
    q: &Polygon,
    qr: &Polygon,
    sp_p: &Spectrum,
    sp_q: &Spectrum,
    offset: usize,
    reflected: bool,
) -> ComparisonReport {
    let a = sp_p.codes();
    let b = sp_q.codes();
    let mut witnesses: Vec<Witness> = a
        .difference(&b)
        .map(|c| Witness {
            code: c.clone(),
            in_p: true,
        })
        .chain(b.difference(&a).map(|c| Witness {
            code: c.clone(),
            in_p: false,
        }))
        .collect();
    witnesses.sort();
    let verdict = if sp_p.partial || sp_q.partial {
        Verdict::InconclusivePartial
    } else if witnesses.is_empty() {
        Verdict::EqualToDepth
    } else {
        Verdict::Differ
    };
    let similarity = if verdict == Verdict::EqualToDepth {
        let matched: Vec<(CylinderFamily, CylinderFamily)> = sp_p
            .families
            .iter()
            .filter_map(|(w, f)| sp_q.families.get(w).map(|g| (f.clone(), g.clone())))
            .collect();
        similarity_recover(p, qr, &matched)
            .ok()
            .flatten()
            .map(|s| if reflected { unmirror(s) } else { s })
    } else {
        None
    };
    ComparisonReport {
        depth: sp_p.depth,
        offset,
        reflected_labeling: reflected,
        verdict,
        witnesses,
        similarity,
        n_p: p.rationality().n,
        n_q: q.rationality().n,
        codes_p: a.len(),
        codes_q: b.len(),
    }
}

/// Composes a map onto the mirrored Q with the mirror, giving a map onto Q.
fn unmirror(s: Similarity) -> Similarity {
    let m = [[-1.0, 0.0], [0.0, 1.0]];
    let linear = mat_mul(&m, &s.linear);
    let translation = Point2::new(-s.translation.x, s.translation.y);
    let kind = match s.kind {
        SimilarityKind::Similar { scale, .. } => SimilarityKind::Similar {
            scale,
            rotation: linear[1][0].atan2(linear[0][0]),
            reflected: true,
        },
        other => other,
    };
    Similarity {
        kind,
        linear,
        translation,
        residual: s.residual,
    }
}

/// Compares the spectra of P and of Q relabeled by `offset` up to code
/// length `depth`, attempting similarity recovery when they agree.
pub fn compare_spectra(
    p: &Polygon,
    q: &Polygon,
    depth: usize,
    offset: usize,
    opts: SpectrumOptions,
) -> Result<ComparisonReport, CompareError> {
    compare_labeled(p, q, depth, offset, false, opts)
}

fn compare_labeled(
    p: &Polygon,
    q: &Polygon,
    depth: usize,
    offset: usize,
    reflected: bool,
    opts: SpectrumOptions,
) -> Result<ComparisonReport, CompareError> {
    if p.k() != q.k() {
        return Err(CompareError::SideCountMismatch { p: p.k(), q: q.k() });
    }
    let qr = relabel(q, offset, reflected);
    let (sp_p, sp_q) = rayon::join(|| spectrum(p, depth, opts), || spectrum(&qr, depth, opts));
    let (sp_p, sp_q) = (sp_p?, sp_q?);
    Ok(build_report(p, q, &qr, &sp_p, &sp_q, offset % p.k(), reflected))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BestLabeling {
    pub offset: usize,
    pub report: ComparisonReport,
    /// Every labeling with an `equal_to_depth` verdict, as
    /// `(offset, reflected)`.
    pub equal_labelings: Vec<(usize, bool)>,
}

/// Tries every cyclic identification of Q's sides with P's (and the
/// clockwise ones when `reflected` is set). Prefers an equal verdict, then
/// fewer witnesses, then non-reflected, then the smaller offset.
pub fn best_labeling(
    p: &Polygon,
    q: &Polygon,
    depth: usize,
    reflected: bool,
    opts: SpectrumOptions,
) -> Result<BestLabeling, CompareError> {
    if p.k() != q.k() {
        return Err(CompareError::SideCountMismatch { p: p.k(), q: q.k() });
    }
    let sp_p = spectrum(p, depth, opts)?;
    let k = p.k();
    let flips: &[bool] = if reflected { &[false, true] } else { &[false] };
    let candidates: Vec<(usize, bool)> = flips
        .iter()
        .flat_map(|&f| (0..k).map(move |o| (o, f)))
        .collect();
    let reports = candidates
        .par_iter()
        .map(|&(o, f)| {
            let qr = relabel(q, o, f);
            let sp_q = spectrum(&qr, depth, opts)?;
            Ok(build_report(p, q, &qr, &sp_p, &sp_q, o, f))
        })
        .collect::<Result<Vec<ComparisonReport>, CompareError>>()?;
    let equal_labelings = reports
        .iter()
        .filter(|r| r.verdict == Verdict::EqualToDepth)
        .map(|r| (r.offset, r.reflected_labeling))
        .collect();
    let rank = |r: &ComparisonReport| {
        (
            r.verdict != Verdict::EqualToDepth,
            r.witnesses.len(),
            r.reflected_labeling,
            r.offset,
        )
    };
    let report = reports
        .into_iter()
        .min_by_key(rank)
        .expect("at least one labeling");
    Ok(BestLabeling {
        offset: report.offset,
        report,
        equal_labelings,
    })
}

/// Finite-horizon probe of code equivalence: whether the itineraries of
/// `u` on P and `v` on Q agree for `horizon` steps, or agree up to a
/// termination that happens on the same step in both. Agreement is
/// evidence, not proof.
pub fn code_equivalence_probe(
    p: &Polygon,
    q: &Polygon,
    u: &PhasePoint,
    v: &PhasePoint,
    horizon: usize,
) -> bool {
    let a = iterate(p, u, horizon);
    let b = iterate(q, v, horizon);
    a.itinerary.symbols == b.itinerary.symbols
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Isometry2;

    fn rect(w: f64, h: f64) -> Polygon {
        Polygon::new(vec![
            Point2::new(0., 0.),
            Point2::new(w, 0.),
            Point2::new(w, h),
            Point2::new(0., h),
        ])
        .unwrap()
    }

    fn opts() -> SpectrumOptions {
        SpectrumOptions::default()
    }

    #[test]
    fn sig12_formatting() {
        assert_eq!(sig12(2.0), "2");
        assert_eq!(sig12(-0.0), "0");
        assert_eq!(sig12(1.0 / 3.0), "0.333333333333");
        assert_eq!(sig12(12345.678), "12345.678");
        assert_eq!(sig12(1e-9), "1.00000000000e-9");
    }

    #[test]
    fn square_against_itself() {
        let sq = rect(1.0, 1.0);
        let r = compare_spectra(&sq, &sq, 6, 0, opts()).unwrap();
        assert_eq!(r.verdict, Verdict::EqualToDepth);
        let s = r.similarity.unwrap();
        assert!(s.is_similar());
        assert!(s.apply(Point2::new(0.3, 0.7)).dist(Point2::new(0.3, 0.7)) < 1e-9);
    }

    #[test]
    fn scaled_rotated_square() {
        let sq = rect(1.0, 1.0);
        let g = Isometry2::rotation(Point2::ORIGIN, 30f64.to_radians());
        let q = sq.map_points(|p| g.apply(p * 3.0)).unwrap();
        let r = compare_spectra(&sq, &q, 6, 0, opts()).unwrap();
        assert_eq!(r.verdict, Verdict::EqualToDepth);
        match r.similarity.unwrap().kind {
            SimilarityKind::Similar { scale, rotation, .. } => {
                assert!((scale - 3.0).abs() < 1e-6);
                assert!((rotation.to_degrees() - 30.0).abs() < 1e-6);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rectangle_is_affinely_similar() {
        let r = compare_spectra(&rect(1.0, 1.0), &rect(2.0, 1.0), 6, 0, opts()).unwrap();
        assert_eq!(r.verdict, Verdict::EqualToDepth);
        let s = r.similarity.unwrap();
        assert_eq!(s.kind, SimilarityKind::AffinelySimilar);
        assert!(s.residual < 1e-6);
        assert!(r.to_text().contains("affinely_similar"));
    }

    #[test]
    fn side_count_mismatch() {
        let tri = Polygon::new(vec![Point2::new(0., 0.), Point2::new(1., 0.), Point2::new(0., 1.)]).unwrap();
        assert_eq!(
            compare_spectra(&rect(1.0, 1.0), &tri, 4, 0, opts()),
            Err(CompareError::SideCountMismatch { p: 4, q: 3 })
        );
    }

    #[test]
    fn relabeled_copy_is_found() {
        let l = Polygon::new(vec![
            Point2::new(0., 0.),
            Point2::new(5., 0.),
            Point2::new(5., 1.),
            Point2::new(3., 1.),
            Point2::new(3., 3.),
            Point2::new(0., 3.),
        ])
        .unwrap();
        let q = l.rotate_labels(2);
        let best = best_labeling(&l, &q, 6, false, opts()).unwrap();
        assert_eq!(best.offset, 2);
        assert_eq!(best.report.verdict, Verdict::EqualToDepth);
        assert_eq!(best.equal_labelings, vec![(2, false)]);
        let s = best.report.similarity.unwrap();
        assert!(s.residual < 1e-9);
        let same = best_labeling(&l, &l, 6, false, opts()).unwrap();
        assert_eq!(same.offset, 0);
    }

    #[test]
    fn mirrored_table_needs_reflected_labeling() {
        let table = Polygon::new(vec![
            Point2::new(0., 0.),
            Point2::new(5., 0.),
            Point2::new(5., 1.),
            Point2::new(3., 1.),
            Point2::new(3., 3.),
            Point2::new(0., 3.),
        ])
        .unwrap();
        let q = mirror(&table);
        let plain = best_labeling(&table, &q, 6, false, opts()).unwrap();
        assert_eq!(plain.report.verdict, Verdict::Differ);
        let both = best_labeling(&table, &q, 6, true, opts()).unwrap();
        assert_eq!(both.report.verdict, Verdict::EqualToDepth);
        assert!(both.report.reflected_labeling);
        let s = both.report.similarity.unwrap();
        assert!(matches!(s.kind, SimilarityKind::Similar { reflected: true, .. }));
        for v in table.vertices() {
            assert!(q.vertices().iter().any(|w| w.dist(s.apply(*v)) < 1e-9));
        }
    }

    #[test]
    fn probe_examples() {
        let sq = rect(1.0, 1.0);
        let re = rect(2.0, 1.0);
        let perp = PhasePoint::new(1, 0.5, 0.0);
        assert!(code_equivalence_probe(&sq, &sq, &perp, &perp, 50));
        assert!(code_equivalence_probe(&sq, &re, &perp, &perp, 200));
        let diag = PhasePoint::new(1, 0.5, std::f64::consts::FRAC_PI_4);
        assert!(!code_equivalence_probe(&sq, &sq, &perp, &diag, 2));
    }

    #[test]
    fn collinear_translations_are_insufficient() {
        let sq = rect(1.0, 1.0);
        let sp = enumerate_spectrum(&sq, 2, opts()).unwrap();
        let f = sp.families[&vec![1, 3]].clone();
        assert_eq!(
            similarity_recover(&sq, &sq, &[(f.clone(), f)]),
            Err(RecoverError::InsufficientMatches)
        );
    }
}
