//! Periodic orbits: realizing codes as cylinders, enumerating the set of
//! periodic codes up to a length bound, and a brute-force scan used to
//! cross-check the enumeration.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};

use rayon::prelude::*;
use thiserror::Error;

use crate::billiard::{iterate, reflect_direction, rho_distance, PhasePoint, Termination};
use crate::codes::{canonical_rotation, is_orbit_code, itinerary_to_code, CodeError, PillowcaseCode};
use crate::geom::{classify, compose, Interval, IsometryClass, Point2, EPS_ISO};
use crate::polygon::{normalize_angle, Polygon};
use crate::unfold::{side_reflection, unfold_code, Corridor, EPS_GATE};

/// Default cap on DFS nodes for [`enumerate_spectrum`].
pub const DEFAULT_BUDGET: u64 = 10_000_000;

/// Relative phase-space tolerance for confirming that a start closes up.
pub const CLOSURE_TOL: f64 = 1e-7;

/// A maximal family of parallel periodic orbits sharing one code.
#[derive(Debug, Clone, PartialEq)]
pub struct CylinderFamily {
    pub code: PillowcaseCode,
    /// Side the orbits start from: the first symbol of the realized rotation.
    pub base_side: usize,
    /// Open interval of side parameters that start a family orbit.
    pub base_interval: Interval,
    /// Unit direction of the unfolded chord, parallel to `translation`.
    pub direction: Point2,
    /// Translation part of the corridor's terminal isometry.
    pub translation: Point2,
    /// Geometric length of one period.
    pub length: f64,
    /// Perpendicular width of the cylinder.
    pub width: f64,
    /// Narrower than [`EPS_GATE`]; counted but worth a manual look.
    pub marginal: bool,
}

impl CylinderFamily {
    /// Phase point of the family orbit leaving the base side at `s`.
    pub fn start(&self, p: &Polygon, s: f64) -> PhasePoint {
        let inward = reflect_direction(p, self.base_side, self.direction);
        PhasePoint::from_direction(p, self.base_side, s, inward)
            .expect("family direction points out of the base side")
    }

    /// Direction of the unfolded chord in degrees, in `[0, 360)`.
    pub fn direction_degrees(&self) -> f64 {
        normalize_angle(self.direction.angle()).to_degrees()
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NoFamily {
    #[error("NotTranslation: terminal isometry is a {0}")]
    NotTranslation(IsometryClass),
    #[error("EmptyCorridor: no chord runs through every gate")]
    EmptyCorridor,
}

fn closure_tol(p: &Polygon) -> f64 {
    CLOSURE_TOL * p.diameter().max(1.0)
}

/// Whether the orbit of `u` follows `word` for one period and closes up.
pub(crate) fn follows_code(p: &Polygon, u: &PhasePoint, word: &[usize], tol: f64) -> bool {
    let m = word.len();
    let orbit = iterate(p, u, m);
    orbit.termination == Termination::Completed
        && orbit.itinerary.symbols[..m] == *word
        && rho_distance(p, &orbit.points[m], u) < tol
}

/// Realizes a code as a cylinder of periodic orbits, or says why not.
pub fn realize_code(p: &Polygon, code: &PillowcaseCode) -> Result<CylinderFamily, NoFamily> {
    realize_rotation(p, code, 0)
}

/// Like [`realize_code`], with the orbit based on the side of symbol
/// `start` of the canonical word instead of its first symbol.
pub fn realize_rotation(
    p: &Polygon,
    code: &PillowcaseCode,
    start: usize,
) -> Result<CylinderFamily, NoFamily> {
    let mut word = code.word().to_vec();
    let n = word.len();
    word.rotate_left(start % n);
    let corridor = unfold_code(p, &word).map_err(|_| NoFamily::EmptyCorridor)?;
    realize_corridor(p, code, &word, &corridor)
}

fn realize_corridor(
    p: &Polygon,
    code: &PillowcaseCode,
    word: &[usize],
    corridor: &Corridor,
) -> Result<CylinderFamily, NoFamily> {
    let m = word.len();
    let translation = match classify(corridor.terminal(), EPS_ISO) {
        IsometryClass::Translation { vector } => vector,
        other => return Err(NoFamily::NotTranslation(other)),
    };
    let base_side = word[0];
    let base = p.side(base_side);
    // The chord leaves the table through the base side.
    if translation.dot(p.inward_normal(base_side)) >= 0.0 {
        return Err(NoFamily::EmptyCorridor);
    }

    let mut iv = Interval::unit();
    for gate in &corridor.gates[1..] {
        match crate::geom::chord_param_interval(&base, translation, gate) {
            Some(g) => iv = iv.intersect(&g),
            None => return Err(NoFamily::EmptyCorridor),
        }
        if iv.is_empty() {
            return Err(NoFamily::EmptyCorridor);
        }
    }

    // Parameters where the chord's line passes a corner of some copy: the
    // only places the combinatorics of the chord can change.
    let w = base.vector();
    let k = translation.cross(w);
    let mut cuts: Vec<f64> = vec![iv.lo, iv.hi];
    for j in 0..=m {
        for v in corridor.copy(p, j) {
            let s = translation.cross(v - base.a) / k;
            if iv.contains(s) {
                cuts.push(s);
            }
        }
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() <= 1e-12);

    let direction = translation.normalized();
    let tol = closure_tol(p);
    let inward = reflect_direction(p, base_side, direction);
    let valid: Vec<bool> = cuts
        .windows(2)
        .map(|c| {
            let s = 0.5 * (c[0] + c[1]);
            PhasePoint::from_direction(p, base_side, s, inward)
                .is_some_and(|u| follows_code(p, &u, word, tol))
        })
        .collect();

    // Merge consecutive valid pieces and keep the widest run.
    let mut best: Option<Interval> = None;
    let mut run_start: Option<usize> = None;
    for i in 0..=valid.len() {
        let ok = i < valid.len() && valid[i];
        match (ok, run_start) {
            (true, None) => run_start = Some(i),
            (false, Some(st)) => {
                let run = Interval::new(cuts[st], cuts[i]);
                if best.is_none_or(|b| run.width() > b.width()) {
                    best = Some(run);
                }
                run_start = None;
            }
            _ => {}
        }
    }
    let interval = best.ok_or(NoFamily::EmptyCorridor)?;
    let width = interval.width() * w.cross(direction).abs();
    Ok(CylinderFamily {
        code: code.clone(),
        base_side,
        base_interval: interval,
        direction,
        translation,
        length: translation.norm(),
        width,
        marginal: width <= EPS_GATE,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumOptions {
    /// DFS node cap; the result is marked partial when it is hit.
    pub budget: u64,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        SpectrumOptions {
            budget: DEFAULT_BUDGET,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SpectrumError {
    #[error("code length bound must be even and at least 2, got {0}")]
    BadDepth(usize),
}

/// Periodic codes of a table up to a length bound, with one cylinder
/// witness per code.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub depth: usize,
    /// Keyed by canonical word.
    pub families: BTreeMap<Vec<usize>, CylinderFamily>,
    /// The node budget ran out; some codes may be missing.
    pub partial: bool,
    pub nodes: u64,
}

impl Spectrum {
    pub fn codes(&self) -> BTreeSet<Vec<usize>> {
        self.families.keys().cloned().collect()
    }

    pub fn len(&self) -> usize {
        self.families.len()
    }

    pub fn is_empty(&self) -> bool {
        self.families.is_empty()
    }

    fn code_label(p: &Polygon, family: &CylinderFamily) -> String {
        family.code.format_with(|s| p.label(s).to_string())
    }

    /// One line per code: `length=<2n> dir=<deg> width=<w> <symbols>`,
    /// lines sorted bytewise; a `# PARTIAL` header when incomplete.
    pub fn serialize(&self, p: &Polygon) -> String {
        let mut lines: Vec<String> = self
            .families
            .values()
            .map(|f| {
                format!(
                    "length={} dir={:.9} width={:.12} {}",
                    f.code.len(),
                    f.direction_degrees(),
                    f.width,
                    Self::code_label(p, f)
                )
            })
            .collect();
        lines.sort();
        let mut out = String::new();
        if self.partial {
            out.push_str("# PARTIAL\n");
        }
        for l in lines {
            out.push_str(&l);
            out.push('\n');
        }
        out
    }

    /// Sorted code lines only; invariant under similarities of the table.
    pub fn codes_text(&self, p: &Polygon) -> String {
        let mut lines: Vec<String> = self
            .families
            .values()
            .map(|f| Self::code_label(p, f))
            .collect();
        lines.sort();
        lines.iter().map(|l| format!("{l}\n")).collect()
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectrumParseError {
    #[error("line {line}: unknown side label {label:?}")]
    UnknownLabel { line: usize, label: String },
    #[error("line {line}: {source}")]
    BadCode { line: usize, source: CodeError },
}

/// Parsed spectrum file: canonical codes and whether it was marked partial.
pub fn parse_spectrum(
    text: &str,
    p: &Polygon,
) -> Result<(BTreeSet<Vec<usize>>, bool), SpectrumParseError> {
    let mut codes = BTreeSet::new();
    let mut partial = false;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            partial |= comment.trim() == "PARTIAL";
            continue;
        }
        let symbols = line.split_whitespace().last().unwrap_or_default();
        let word = symbols
            .split(',')
            .map(|t| {
                p.parse_side(t).ok_or_else(|| SpectrumParseError::UnknownLabel {
                    line: i + 1,
                    label: t.to_string(),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        let code = crate::codes::validate_code(&word, p.k())
            .map_err(|source| SpectrumParseError::BadCode { line: i + 1, source })?;
        codes.insert(code.into_word());
    }
    Ok((codes, partial))
}

/// Whether some oriented line has every `left` point weakly on its left and
/// every `right` point weakly on its right. If one exists, one exists
/// through two of the points.
fn weakly_separable(left: &[Point2], right: &[Point2]) -> bool {
    let pts: Vec<Point2> = left.iter().chain(right).copied().collect();
    for (i, &a) in pts.iter().enumerate() {
        for &b in &pts[i + 1..] {
            let d = b - a;
            let dn = d.norm();
            if dn <= 1e-12 {
                continue;
            }
            for dir in [d, -d] {
                let slack = |q: Point2| 1e-9 * dn * (1.0 + (q - a).norm());
                if left.iter().all(|&q| dir.cross(q - a) >= -slack(q))
                    && right.iter().all(|&q| dir.cross(q - a) <= slack(q))
                {
                    return true;
                }
            }
        }
    }
    pts.len() <= 2
}

struct SpectrumSearch<'a> {
    p: &'a Polygon,
    max_len: usize,
    budget: u64,
    nodes: &'a AtomicU64,
    exhausted: &'a AtomicBool,
}

struct Branch {
    word: Vec<usize>,
    lefts: Vec<Point2>,
    rights: Vec<Point2>,
}

impl SpectrumSearch<'_> {
    /// Depth-first over prefixes of necklaces (least rotations), pruned by
    /// cyclic adjacency and by the existence of a line through all gates.
    fn visit(
        &self,
        branch: &mut Branch,
        period: usize,
        frame: crate::geom::Isometry2,
        out: &mut BTreeMap<Vec<usize>, CylinderFamily>,
    ) {
        if self.nodes.fetch_add(1, Ordering::Relaxed) >= self.budget {
            self.exhausted.store(true, Ordering::Relaxed);
            return;
        }
        let word = &branch.word;
        let n = word.len();
        if n >= 2
            && n.is_multiple_of(2)
            && n.is_multiple_of(period)
            && word[n - 1] != word[0]
            && is_orbit_code(word)
        {
            let code = crate::codes::validate_code(word, self.p.k())
                .expect("necklace search yields valid codes");
            debug_assert_eq!(canonical_rotation(word).1, *word);
            if let Ok(f) = realize_code(self.p, &code) {
                out.insert(word.clone(), f);
            }
        }
        if n == self.max_len {
            return;
        }
        let from = branch.word[n - period];
        for c in from..=self.p.k() {
            if c == branch.word[n - 1] {
                continue;
            }
            let next_period = if c == from { period } else { n + 1 };
            let side = self.p.side(c);
            let gate = crate::geom::Segment::new(frame.apply(side.a), frame.apply(side.b));
            let (l, r) = if frame.is_reversing() {
                (gate.a, gate.b)
            } else {
                (gate.b, gate.a)
            };
            branch.word.push(c);
            branch.lefts.push(l);
            branch.rights.push(r);
            if weakly_separable(&branch.lefts, &branch.rights) {
                let next = compose(&frame, &side_reflection(self.p, c));
                self.visit(branch, next_period, next, out);
            }
            branch.word.pop();
            branch.lefts.pop();
            branch.rights.pop();
        }
    }
}

/// All periodic codes of length at most `max_len`, each with a cylinder
/// witness. Output is keyed by canonical word, so ordering is deterministic.
pub fn enumerate_spectrum(
    p: &Polygon,
    max_len: usize,
    opts: SpectrumOptions,
) -> Result<Spectrum, SpectrumError> {
    if max_len < 2 || max_len % 2 == 1 {
        return Err(SpectrumError::BadDepth(max_len));
    }
    let nodes = AtomicU64::new(0);
    let exhausted = AtomicBool::new(false);
    let search = SpectrumSearch {
        p,
        max_len,
        budget: opts.budget,
        nodes: &nodes,
        exhausted: &exhausted,
    };
    let parts: Vec<BTreeMap<Vec<usize>, CylinderFamily>> = (1..=p.k())
        .into_par_iter()
        .map(|first| {
            let side = p.side(first);
            let mut branch = Branch {
                word: vec![first],
                lefts: vec![side.b],
                rights: vec![side.a],
            };
            let mut out = BTreeMap::new();
            search.visit(&mut branch, 1, side_reflection(p, first), &mut out);
            out
        })
        .collect();
    let mut families = BTreeMap::new();
    for part in parts {
        families.extend(part);
    }
    Ok(Spectrum {
        depth: max_len,
        families,
        partial: exhausted.load(Ordering::Relaxed),
        nodes: nodes.load(Ordering::Relaxed),
    })
}

/// Period words found by launching orbits in global direction `theta` from
/// `grid` evenly spaced foot points on every side the direction enters
/// through. A start counts as periodic with period `n` when `n` is the
/// smallest step with `T^n u` on the starting side and `rho(T^n u, u) < tol`,
/// and the itinerary repeats with period `n` over the whole horizon. The
/// second condition rejects near-returns that drift apart again, which a
/// loose `tol` would otherwise admit. One witness per distinct word.
pub fn direction_scan_oracle(
    p: &Polygon,
    theta: f64,
    max_steps: usize,
    grid: usize,
    tol: f64,
) -> Vec<(Vec<usize>, PhasePoint)> {
    let dir = Point2::from_angle(theta);
    let mut seen: BTreeMap<Vec<usize>, PhasePoint> = BTreeMap::new();
    for side in 1..=p.k() {
        for j in 0..grid {
            let s = (j as f64 + 0.5) / grid as f64;
            let Some(u) = PhasePoint::from_direction(p, side, s, dir) else {
                continue;
            };
            let orbit = iterate(p, &u, max_steps);
            let symbols = &orbit.itinerary.symbols;
            let period = (1..orbit.points.len()).find(|&n| {
                orbit.points[n].side == side && rho_distance(p, &orbit.points[n], &u) < tol
            });
            let Some(n) = period else { continue };
            let sustained = symbols.len() > 2 * n
                && (n..symbols.len()).all(|i| symbols[i] == symbols[i - n]);
            if sustained {
                seen.entry(symbols[..n].to_vec()).or_insert(u);
            }
        }
    }
    seen.into_iter().collect()
}

/// Canonical codes of length at most `max_len` seen by
/// [`direction_scan_oracle`] over `directions` equally spaced directions.
pub fn oracle_codes(
    p: &Polygon,
    directions: usize,
    grid: usize,
    max_steps: usize,
    tol: f64,
    max_len: usize,
) -> BTreeSet<Vec<usize>> {
    (0..directions)
        .into_par_iter()
        .flat_map_iter(|i| {
            let theta = 2.0 * PI * i as f64 / directions as f64;
            direction_scan_oracle(p, theta, max_steps, grid, tol)
                .into_iter()
                .filter_map(|(word, _)| itinerary_to_code(&word).ok())
                .filter(|c| c.len() <= max_len)
                .map(PillowcaseCode::into_word)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct DoublingReport {
    /// Code of the doubled word.
    pub code: PillowcaseCode,
    pub family: CylinderFamily,
    /// The unique start in the family with the odd period.
    pub center: PhasePoint,
    pub center_period: usize,
    /// Foot points of the odd orbit, one per symbol.
    pub center_orbit: Vec<PhasePoint>,
    /// Perturbed starts and their periods.
    pub neighbors: Vec<(PhasePoint, usize)>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DoublingError {
    #[error("word must have odd length, got {0}")]
    EvenLength(usize),
    #[error(transparent)]
    BadWord(#[from] CodeError),
    #[error("NoFamily: {0}")]
    NoFamily(NoFamily),
    #[error("no sign change of the half-period return map on the family")]
    NoCenter,
}

fn first_return_period(p: &Polygon, u: &PhasePoint, max_n: usize, tol: f64) -> Option<usize> {
    let orbit = iterate(p, u, max_n);
    (1..orbit.points.len()).find(|&n| rho_distance(p, &orbit.points[n], u) < tol)
}

/// Odd-period check: realizes `word·word`, locates the one start whose
/// orbit closes after `|word|` steps by bisection on the half-period return
/// map, and confirms that perturbed starts close after `2·|word|`.
pub fn verify_t1_doubling(p: &Polygon, word: &[usize]) -> Result<DoublingReport, DoublingError> {
    let n = word.len();
    if n.is_multiple_of(2) {
        return Err(DoublingError::EvenLength(n));
    }
    let code = itinerary_to_code(word)?;
    crate::codes::validate_code(code.word(), p.k())?;
    let family = realize_code(p, &code).map_err(DoublingError::NoFamily)?;
    let tol = closure_tol(p);

    // After n steps a family orbit is back on the base side, mirrored about
    // the cylinder's core; g(s) = s' - s changes sign across the core.
    let half_return = |s: f64| -> Option<f64> {
        let orbit = iterate(p, &family.start(p, s), n);
        (orbit.termination == Termination::Completed).then(|| {
            let last = orbit.points[n];
            debug_assert_eq!(last.side, family.base_side);
            last.s - s
        })
    };
    let iv = family.base_interval;
    let margin = 1e-6 * iv.width();
    let (mut lo, mut hi) = (iv.lo + margin, iv.hi - margin);
    let (glo, ghi) = match (half_return(lo), half_return(hi)) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(DoublingError::NoCenter),
    };
    if glo.signum() == ghi.signum() {
        return Err(DoublingError::NoCenter);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let g = half_return(mid).ok_or(DoublingError::NoCenter)?;
        if g.signum() == glo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 {
            break;
        }
    }
    let center = family.start(p, 0.5 * (lo + hi));
    let center_period = first_return_period(p, &center, 2 * n, tol).ok_or(DoublingError::NoCenter)?;
    let center_orbit = iterate(p, &center, n - 1).points;
    let neighbors = [-0.25, 0.25]
        .iter()
        .map(|f| {
            let s = center.s + f * iv.width();
            let u = family.start(p, s);
            (u, first_return_period(p, &u, 2 * n, tol).unwrap_or(0))
        })
        .collect();
    Ok(DoublingReport {
        code,
        family,
        center,
        center_period,
        center_orbit,
        neighbors,
    })
}
