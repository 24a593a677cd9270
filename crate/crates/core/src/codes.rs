//! Pillowcase codes: even-length cyclic words over side labels with no
//! cyclically adjacent repeats, kept in least-rotation form.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CodeError {
    #[error("empty word")]
    Empty,
    #[error("OddLength: code length {0} is odd")]
    OddLength(usize),
    #[error("AdjacentRepeat: symbol {symbol} repeats at position {index} (cyclically)")]
    AdjacentRepeat { index: usize, symbol: usize },
    #[error("BadSymbol: {symbol} is not a side of a {k}-gon")]
    BadSymbol { symbol: usize, k: usize },
    #[error("LengthMismatch: sequences have lengths {0} and {1}")]
    LengthMismatch(usize, usize),
    #[error("sequences need at least 3 points, got {0}")]
    TooShort(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PillowcaseCode {
    word: Vec<usize>,
}

impl PillowcaseCode {
    pub fn word(&self) -> &[usize] {
        &self.word
    }

    pub fn len(&self) -> usize {
        self.word.len()
    }

    pub fn is_empty(&self) -> bool {
        self.word.is_empty()
    }

    /// Comma-separated symbols, mapped through `label`.
    pub fn format_with<F: Fn(usize) -> String>(&self, label: F) -> String {
        self.word
            .iter()
            .map(|&s| label(s))
            .collect::<Vec<_>>()
            .join(",")
    }

    pub fn into_word(self) -> Vec<usize> {
        self.word
    }
}

impl fmt::Display for PillowcaseCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.format_with(|s| s.to_string()))
    }
}

/// Index of the lexicographically least rotation (smallest such index for
/// periodic words) and the rotated word.
pub fn canonical_rotation(word: &[usize]) -> (usize, Vec<usize>) {
    let n = word.len();
    if n == 0 {
        return (0, Vec::new());
    }
    let (mut i, mut j, mut k) = (0usize, 1usize, 0usize);
    while i < n && j < n && k < n {
        let a = word[(i + k) % n];
        let b = word[(j + k) % n];
        if a == b {
            k += 1;
            continue;
        }
        if a > b {
            i += k + 1;
        } else {
            j += k + 1;
        }
        if i == j {
            j += 1;
        }
        k = 0;
    }
    let start = i.min(j);
    let mut out = word.to_vec();
    out.rotate_left(start);
    (start, out)
}

fn first_cyclic_repeat(word: &[usize]) -> Option<usize> {
    let n = word.len();
    (0..n).find(|&i| word[i] == word[(i + 1) % n])
}

/// Checks even length, alphabet `1..=k` and cyclic adjacency, and stores the
/// least rotation.
pub fn validate_code(word: &[usize], k: usize) -> Result<PillowcaseCode, CodeError> {
    if word.is_empty() {
        return Err(CodeError::Empty);
    }
    if word.len() % 2 == 1 {
        return Err(CodeError::OddLength(word.len()));
    }
    if let Some(&symbol) = word.iter().find(|&&s| s == 0 || s > k) {
        return Err(CodeError::BadSymbol { symbol, k });
    }
    if let Some(index) = first_cyclic_repeat(word) {
        return Err(CodeError::AdjacentRepeat {
            index,
            symbol: word[index],
        });
    }
    Ok(PillowcaseCode {
        word: canonical_rotation(word).1,
    })
}

/// Same length and equal up to rotation.
pub fn codes_equivalent(a: &[usize], b: &[usize]) -> bool {
    a.len() == b.len() && canonical_rotation(a).1 == canonical_rotation(b).1
}

/// Code of a closed orbit from its exact period word. Odd periods are
/// doubled: the closed curve of an odd orbit crosses the boundary twice per
/// geometric period.
pub fn itinerary_to_code(symbols: &[usize]) -> Result<PillowcaseCode, CodeError> {
    if symbols.is_empty() {
        return Err(CodeError::Empty);
    }
    if let Some(index) = first_cyclic_repeat(symbols) {
        return Err(CodeError::AdjacentRepeat {
            index,
            symbol: symbols[index],
        });
    }
    let word = if symbols.len() % 2 == 1 {
        symbols.repeat(2)
    } else {
        symbols.to_vec()
    };
    Ok(PillowcaseCode {
        word: canonical_rotation(&word).1,
    })
}

/// Shortest `p` dividing `n` with `word` equal to its rotation by `p`.
pub fn primitive_period(word: &[usize]) -> usize {
    let n = word.len();
    (1..=n)
        .find(|&p| n.is_multiple_of(p) && (0..n).all(|i| word[i] == word[(i + p) % n]))
        .unwrap_or(n)
}

/// Whether a code can be the code of a primitive closed orbit: the word is
/// primitive, or it is the square of an odd primitive word.
pub fn is_orbit_code(word: &[usize]) -> bool {
    let n = word.len();
    let p = primitive_period(word);
    p == n || (2 * p == n && p % 2 == 1)
}

/// Least rotation of the word or of its reversal, whichever is smaller.
/// Reversal is not part of code equivalence; this is an exploration aid.
pub fn merge_reversal(code: &PillowcaseCode) -> PillowcaseCode {
    let mut rev = code.word.clone();
    rev.reverse();
    let rev = canonical_rotation(&rev).1;
    PillowcaseCode {
        word: rev.min(code.word.clone()),
    }
}

/// `true` iff `pos` lies on the closed counterclockwise arc from `from` to
/// `to`. Positions are cyclic boundary coordinates; only their order is used.
fn on_closed_arc(pos: f64, from: f64, to: f64) -> bool {
    if from <= to {
        from <= pos && pos <= to
    } else {
        pos >= from || pos <= to
    }
}

/// Whether two sequences of boundary positions have the same combinatorial
/// order over their first `horizon` terms: `x_k ∈ [x_l, x_m] ⇔ y_k ∈ [y_l, y_m]`.
///
/// Positions are counterclockwise boundary coordinates (e.g. arc length
/// from a fixed vertex) on each polygon.
pub fn combinatorial_order_equal(xs: &[f64], ys: &[f64], horizon: usize) -> Result<bool, CodeError> {
    if xs.len() != ys.len() {
        return Err(CodeError::LengthMismatch(xs.len(), ys.len()));
    }
    if xs.len() < 3 {
        return Err(CodeError::TooShort(xs.len()));
    }
    let h = horizon.min(xs.len());
    for l in 0..h {
        for m in 0..h {
            for k in 0..h {
                if on_closed_arc(xs[k], xs[l], xs[m]) != on_closed_arc(ys[k], ys[l], ys[m]) {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn naive_least_rotation(word: &[usize]) -> (usize, Vec<usize>) {
        let n = word.len();
        (0..n)
            .map(|r| {
                let mut w = word.to_vec();
                w.rotate_left(r);
                (w, r)
            })
            .min()
            .map(|(w, r)| (r, w))
            .unwrap()
    }

    #[test]
    fn validate_examples() {
        assert_eq!(validate_code(&[1, 3], 4).unwrap().word(), &[1, 3]);
        assert_eq!(validate_code(&[1, 2, 1], 4), Err(CodeError::OddLength(3)));
        assert_eq!(
            validate_code(&[1, 2, 2, 3], 4),
            Err(CodeError::AdjacentRepeat {
                index: 1,
                symbol: 2
            })
        );
        // Last-to-first repeat.
        assert_eq!(
            validate_code(&[1, 2, 3, 1], 4),
            Err(CodeError::AdjacentRepeat {
                index: 3,
                symbol: 1
            })
        );
        assert_eq!(
            validate_code(&[1, 5], 4),
            Err(CodeError::BadSymbol { symbol: 5, k: 4 })
        );
        assert_eq!(validate_code(&[], 4), Err(CodeError::Empty));
    }

    #[test]
    fn rotation_examples() {
        assert_eq!(canonical_rotation(&[3, 1]), (1, vec![1, 3]));
        assert_eq!(canonical_rotation(&[2, 1, 2, 1]), (1, vec![1, 2, 1, 2]));
        // Rotations of (1,3,1,2): 1312, 3121, 1213, 2131 -> least is 1213.
        assert_eq!(canonical_rotation(&[1, 3, 1, 2]), (2, vec![1, 2, 1, 3]));
    }

    #[test]
    fn equivalence_examples() {
        assert!(codes_equivalent(&[1, 3], &[3, 1]));
        assert!(!codes_equivalent(&[1, 3], &[1, 3, 1, 3]));
        assert!(!codes_equivalent(&[1, 2, 3, 4], &[1, 4, 3, 2]));
    }

    #[test]
    fn itinerary_examples() {
        assert_eq!(itinerary_to_code(&[1, 3]).unwrap().word(), &[1, 3]);
        assert_eq!(
            itinerary_to_code(&[1, 2, 3]).unwrap().word(),
            &[1, 2, 3, 1, 2, 3]
        );
        assert_eq!(itinerary_to_code(&[2, 3, 4, 1]).unwrap().word(), &[1, 2, 3, 4]);
        assert!(matches!(
            itinerary_to_code(&[1, 2, 1]),
            Err(CodeError::AdjacentRepeat { .. })
        ));
    }

    #[test]
    fn orbit_codes() {
        assert!(is_orbit_code(&[1, 3]));
        assert!(!is_orbit_code(&[1, 3, 1, 3]));
        assert!(is_orbit_code(&[1, 2, 3, 1, 2, 3]));
        assert!(!is_orbit_code(&[1, 2, 1, 2, 1, 2, 1, 2]));
        assert_eq!(primitive_period(&[1, 2, 1, 2, 1, 2]), 2);
    }

    #[test]
    fn reversal_merge_is_opt_in() {
        let a = validate_code(&[1, 2, 3, 4], 4).unwrap();
        let b = validate_code(&[4, 3, 2, 1], 4).unwrap();
        assert_ne!(a, b);
        assert_eq!(merge_reversal(&a), merge_reversal(&b));
    }

    #[test]
    fn combinatorial_order_examples() {
        let xs = [0.1, 0.5, 0.9, 0.3];
        assert!(combinatorial_order_equal(&xs, &xs, 4).unwrap());
        let scaled: Vec<f64> = xs.iter().map(|x| 3.0 * x).collect();
        assert!(combinatorial_order_equal(&xs, &scaled, 4).unwrap());
        // (a, b, c) counterclockwise vs (a, c, b).
        assert!(!combinatorial_order_equal(&[0.1, 0.4, 0.7], &[0.1, 0.7, 0.4], 3).unwrap());
        assert_eq!(
            combinatorial_order_equal(&[0.1, 0.2, 0.3], &[0.1, 0.2], 3),
            Err(CodeError::LengthMismatch(3, 2))
        );
        // Rotating the boundary coordinate preserves cyclic order.
        let shifted: Vec<f64> = xs.iter().map(|x| (x + 0.35f64).fract()).collect();
        assert!(combinatorial_order_equal(&xs, &shifted, 4).unwrap());
    }

    fn valid_word(max_k: usize, max_half: usize) -> impl Strategy<Value = (Vec<usize>, usize)> {
        (3..=max_k, 1..=max_half).prop_flat_map(|(k, half)| {
            (1..=k, proptest::collection::vec(1..k, 2 * half - 1)).prop_map(move |(first, steps)| {
                let mut w = vec![first];
                for step in steps {
                    let prev = *w.last().unwrap();
                    w.push((prev - 1 + step) % k + 1);
                }
                let n = w.len();
                if w[n - 1] == w[0] {
                    // k >= 3 leaves a symbol differing from both neighbours.
                    w[n - 1] = (1..=k).find(|&c| c != w[0] && c != w[n - 2]).unwrap();
                }
                (w, k)
            })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]

        #[test]
        fn canonical_is_idempotent_and_rotation_invariant((w, _k) in valid_word(6, 6), r in 0usize..12) {
            let (idx, c) = canonical_rotation(&w);
            prop_assert_eq!(canonical_rotation(&c).1, c.clone());
            prop_assert_eq!(canonical_rotation(&c).0, 0);
            let mut rotated = w.clone();
            rotated.rotate_left(r % w.len());
            prop_assert_eq!(canonical_rotation(&rotated).1, c.clone());
            prop_assert_eq!((idx, c), naive_least_rotation(&w));
        }

        #[test]
        fn itinerary_codes_validate((w, k) in valid_word(6, 6), odd in any::<bool>()) {
            let w = if odd && w.len() > 2 && w[w.len() - 2] != w[0] {
                w[..w.len() - 1].to_vec()
            } else {
                w
            };
            let code = itinerary_to_code(&w).unwrap();
            prop_assert_eq!(validate_code(code.word(), k).unwrap(), code);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1_000))]

        #[test]
        fn equivalence_axioms(
            (a, _) in valid_word(4, 3),
            rb in 0usize..6,
            rc in 0usize..6,
            (other, _) in valid_word(4, 3),
        ) {
            let mut b = a.clone();
            b.rotate_left(rb % a.len());
            let mut c = b.clone();
            c.rotate_left(rc % b.len());
            prop_assert!(codes_equivalent(&a, &a));
            prop_assert_eq!(codes_equivalent(&a, &b), codes_equivalent(&b, &a));
            prop_assert!(codes_equivalent(&a, &b) && codes_equivalent(&b, &c));
            prop_assert!(codes_equivalent(&a, &c));
            prop_assert_eq!(codes_equivalent(&a, &other), codes_equivalent(&other, &a));
            if codes_equivalent(&a, &other) {
                prop_assert!(codes_equivalent(&c, &other));
            }
        }
    }
}
