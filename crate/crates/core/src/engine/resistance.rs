//! Finite-horizon check of the `(c, ε, λ)` resistance property of a pair.

use serde::Serialize;

use crate::engine::fold::Walker;
use crate::engine::{ExecConfig, MatrixSystem, Word};
use crate::error::{invalid, Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResistanceRow {
    pub n: usize,
    /// `⌊εn⌋`, the number of second-letter occurrences allowed.
    pub max_impurities: usize,
    pub words: u64,
    /// `min ‖A_w‖ / λⁿ` over admissible words.
    pub min_ratio: f64,
    pub witness: Word,
    pub passes: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResistanceReport {
    pub c: f64,
    pub eps: f64,
    pub lam: f64,
    pub rows: Vec<ResistanceRow>,
}

impl ResistanceReport {
    /// True when every checked depth passes.
    pub fn verdict(&self) -> bool {
        self.rows.iter().all(|r| r.passes)
    }
}

/// Number of length-`n` binary words with at most `k` ones.
pub fn admissible_words(n: usize, k: usize) -> u128 {
    let mut total: u128 = 0;
    let mut binom: u128 = 1;
    for j in 0..=k.min(n) {
        total += binom;
        binom = binom * (n - j) as u128 / (j + 1) as u128;
    }
    total
}

/// For each `n ≤ n_max`, the minimum of `‖A_w‖/λⁿ` over words with at most
/// `⌊εn⌋` occurrences of the second map, and whether it clears `c`.
///
/// Only admissible words are enumerated; the budget in `cfg` bounds the
/// admissible count at each depth.
pub fn resistance_check(
    pair: &MatrixSystem,
    c: f64,
    eps: f64,
    lam: f64,
    n_max: usize,
    cfg: &ExecConfig,
) -> Result<ResistanceReport> {
    if pair.len() != 2 {
        return Err(invalid(format!("resistance needs a pair, got {} maps", pair.len())));
    }
    if !(c > 0.0) || !(eps > 0.0 && eps < 1.0) || !(lam > 1.0) || !lam.is_finite() {
        return Err(invalid("resistance needs c > 0, 0 < eps < 1, lam > 1"));
    }
    if n_max == 0 || n_max > cfg.max_depth {
        return Err(invalid(format!("n_max {n_max} outside 1..={}", cfg.max_depth)));
    }
    let weights = [0.0, 0.0];
    let mut rows = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let k = (eps * n as f64).floor() as usize;
        let required = admissible_words(n, k);
        if required > cfg.budget as u128 {
            return Err(Error::BudgetExceeded { required, budget: cfg.budget });
        }
        let mut walker = Walker::new(pair, n, &weights);
        let mut best = Best { value: f64::INFINITY, word: Vec::new(), words: 0 };
        walk(&mut walker, 0, k, &mut best);
        let min_ratio = best.value / lam.powi(n as i32);
        rows.push(ResistanceRow {
            n,
            max_impurities: k,
            words: best.words,
            min_ratio,
            witness: Word(best.word),
            passes: min_ratio >= c,
        });
    }
    Ok(ResistanceReport { c, eps, lam, rows })
}

struct Best {
    value: f64,
    word: Vec<usize>,
    words: u64,
}

fn walk(walker: &mut Walker<'_>, level: usize, impurities_left: usize, best: &mut Best) {
    let depth = walker.depth();
    if level == depth {
        best.words += 1;
        let v = walker.product(depth).norm();
        if v < best.value {
            best.value = v;
            best.word.clear();
            best.word.extend_from_slice(walker.word(depth));
        }
        return;
    }
    walker.set(level, 0);
    walk(walker, level + 1, impurities_left, best);
    if impurities_left > 0 {
        walker.set(level, 1);
        walk(walker, level + 1, impurities_left - 1, best);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Matrix;

    fn pair() -> MatrixSystem {
        MatrixSystem::new(vec![Matrix::diag(2.0, 0.5), Matrix::rotation(0.3)]).unwrap()
    }

    #[test]
    fn binomial_counts() {
        assert_eq!(admissible_words(10, 1), 11);
        assert_eq!(admissible_words(10, 10), 1024);
        assert_eq!(admissible_words(12, 3), 1 + 12 + 66 + 220);
    }

    #[test]
    fn pure_words_when_no_impurity_allowed() {
        let r = resistance_check(&pair(), 1.0, 0.05, 1.5, 10, &ExecConfig::default()).unwrap();
        for row in &r.rows {
            assert_eq!(row.max_impurities, 0);
            assert_eq!(row.words, 1);
            let want = 2f64.powi(row.n as i32) / 1.5f64.powi(row.n as i32);
            assert!((row.min_ratio - want).abs() < 1e-12 * want);
            assert!(row.passes);
        }
        assert!(r.verdict());
    }

    #[test]
    fn contracting_pair_fails() {
        let sys = MatrixSystem::new(vec![Matrix::diag(0.9, 0.5), Matrix::rotation(0.3).scale(0.9)]).unwrap();
        let r = resistance_check(&sys, 0.5, 0.2, 1.1, 12, &ExecConfig::default()).unwrap();
        assert!(!r.verdict());
        assert!(!r.rows.last().unwrap().passes);
    }

    #[test]
    fn rejects_bad_constants() {
        assert!(resistance_check(&pair(), 1.0, 1.5, 1.5, 5, &ExecConfig::default()).is_err());
        assert!(resistance_check(&pair(), 1.0, 0.1, 0.5, 5, &ExecConfig::default()).is_err());
    }
}
