//! Deterministic enumeration of all words of a fixed length.
//!
//! Words are split by their first `prefix_len` letters. Each prefix subtree is
//! folded depth-first in lexicographic order, possibly on its own worker, and
//! the per-prefix results are merged by a fixed pairwise tree over the prefix
//! index. The result is therefore bit-identical for any number of workers.

use serde::{Deserialize, Serialize};

use crate::engine::MatrixSystem;
use crate::error::{Error, Result};
use crate::matrix::Matrix;

pub const DEFAULT_BUDGET: u64 = 1 << 26;
pub const DEFAULT_MAX_DEPTH: usize = 30;
pub const DEFAULT_PREFIX_LEN: usize = 8;

/// Execution limits shared by every enumeration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExecConfig {
    /// Worker count; `None` uses the global pool.
    pub threads: Option<usize>,
    pub prefix_len: usize,
    /// Maximum number of words one enumeration may visit.
    pub budget: u64,
    pub max_depth: usize,
}

impl Default for ExecConfig {
    fn default() -> Self {
        ExecConfig {
            threads: None,
            prefix_len: DEFAULT_PREFIX_LEN,
            budget: DEFAULT_BUDGET,
            max_depth: DEFAULT_MAX_DEPTH,
        }
    }
}

impl ExecConfig {
    pub fn with_threads(mut self, threads: usize) -> Self {
        self.threads = Some(threads.max(1));
        self
    }

    pub fn with_budget(mut self, budget: u64) -> Self {
        self.budget = budget;
        self
    }

    /// `N^depth` if it fits the budget and depth limit.
    pub fn check(&self, n_letters: usize, depth: usize) -> Result<u64> {
        if depth == 0 || depth > self.max_depth {
            return Err(Error::InvalidParameter(format!("depth {depth} outside 1..={}", self.max_depth)));
        }
        let required = (n_letters as u128).checked_pow(depth as u32).unwrap_or(u128::MAX);
        if required > self.budget as u128 {
            return Err(Error::BudgetExceeded { required, budget: self.budget });
        }
        Ok(required as u64)
    }

    /// Runs `job` on the configured pool.
    #[cfg_attr(not(feature = "parallel"), allow(dead_code))]
    pub(crate) fn install<R: Send>(&self, job: impl FnOnce() -> R + Send) -> R {
        #[cfg(feature = "parallel")]
        if let Some(t) = self.threads {
            if t > 1 {
                if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(t).build() {
                    return pool.install(job);
                }
            }
        }
        job()
    }

    pub(crate) fn sequential(&self) -> bool {
        !cfg!(feature = "parallel") || self.threads == Some(1)
    }
}

/// What a fold sees at each word.
pub struct Leaf<'a> {
    pub word: &'a [usize],
    pub product: &'a Matrix,
    /// Sum of [`FoldSpec::letter_log_weight`] over the word.
    pub log_weight: f64,
    /// `log |det|` of the product, accumulated letter by letter.
    pub log_abs_det: f64,
}

/// A per-word statistic folded over every word of one length.
pub trait FoldSpec: Sync {
    type Acc: Send;

    fn identity(&self) -> Self::Acc;

    fn visit(&self, acc: &mut Self::Acc, leaf: &Leaf<'_>);

    fn merge(&self, left: Self::Acc, right: Self::Acc) -> Self::Acc;

    /// Additive per-letter weight carried along the word (e.g. `q·log p_i`).
    fn letter_log_weight(&self, _letter: usize) -> f64 {
        0.0
    }
}

/// Folds `spec` over all `N^depth` words.
pub fn fold_words<F: FoldSpec>(system: &MatrixSystem, depth: usize, spec: &F, cfg: &ExecConfig) -> Result<F::Acc> {
    let n = system.len();
    cfg.check(n, depth)?;
    let plen = cfg.prefix_len.clamp(1, depth);
    let n_prefixes = n.pow(plen as u32);
    let weights: Vec<f64> = (0..n).map(|l| spec.letter_log_weight(l)).collect();

    let run = |index: usize| -> F::Acc {
        let mut walker = Walker::new(system, depth, &weights);
        walker.set_prefix(index, plen);
        let mut acc = spec.identity();
        walker.descend(plen, &mut |leaf| spec.visit(&mut acc, leaf));
        acc
    };

    let parts: Vec<F::Acc> = if cfg.sequential() {
        (0..n_prefixes).map(run).collect()
    } else {
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            cfg.install(|| (0..n_prefixes).into_par_iter().map(run).collect())
        }
        #[cfg(not(feature = "parallel"))]
        unreachable!()
    };
    Ok(pairwise_merge(parts, |a, b| spec.merge(a, b)).unwrap_or_else(|| spec.identity()))
}

/// Reduces `items` by a balanced tree fixed by position.
pub(crate) fn pairwise_merge<T>(mut items: Vec<T>, merge: impl Fn(T, T) -> T) -> Option<T> {
    while items.len() > 1 {
        let mut next = Vec::with_capacity(items.len().div_ceil(2));
        let mut it = items.into_iter();
        while let Some(a) = it.next() {
            match it.next() {
                Some(b) => next.push(merge(a, b)),
                None => next.push(a),
            }
        }
        items = next;
    }
    items.pop()
}

/// Depth-first walker holding the running products for one subtree.
pub(crate) struct Walker<'a> {
    system: &'a MatrixSystem,
    weights: &'a [f64],
    word: Vec<usize>,
    prods: Vec<Matrix>,
    log_w: Vec<f64>,
    log_det: Vec<f64>,
}

impl<'a> Walker<'a> {
    pub(crate) fn new(system: &'a MatrixSystem, depth: usize, weights: &'a [f64]) -> Self {
        let id = Matrix::identity(system.dim()).expect("dim >= 2");
        Walker {
            system,
            weights,
            word: vec![0; depth],
            prods: vec![id; depth + 1],
            log_w: vec![0.0; depth + 1],
            log_det: vec![0.0; depth + 1],
        }
    }

    pub(crate) fn n_letters(&self) -> usize {
        self.system.len()
    }

    pub(crate) fn depth(&self) -> usize {
        self.word.len()
    }

    pub(crate) fn word(&self, upto: usize) -> &[usize] {
        &self.word[..upto]
    }

    pub(crate) fn product(&self, level: usize) -> &Matrix {
        &self.prods[level]
    }

    /// Sets letter `level` (0-based position) and updates the running product.
    #[inline]
    pub(crate) fn set(&mut self, level: usize, letter: usize) {
        self.word[level] = letter;
        let (done, rest) = self.prods.split_at_mut(level + 1);
        done[level].mul_into(self.system.map(letter), &mut rest[0]);
        self.log_w[level + 1] = self.log_w[level] + self.weights[letter];
        self.log_det[level + 1] = self.log_det[level] + self.system.log_abs_dets()[letter];
    }

    /// Fixes the first `plen` letters to the base-N digits of `index`, most significant first.
    pub(crate) fn set_prefix(&mut self, index: usize, plen: usize) {
        let n = self.system.len();
        let mut digits = vec![0; plen];
        let mut rest = index;
        for slot in digits.iter_mut().rev() {
            *slot = rest % n;
            rest /= n;
        }
        for (level, &l) in digits.iter().enumerate() {
            self.set(level, l);
        }
    }

    /// Enumerates all completions of the first `level` letters.
    pub(crate) fn descend(&mut self, level: usize, visit: &mut dyn FnMut(&Leaf<'_>)) {
        let depth = self.depth();
        if level == depth {
            let leaf = Leaf {
                word: &self.word,
                product: &self.prods[depth],
                log_weight: self.log_w[depth],
                log_abs_det: self.log_det[depth],
            };
            visit(&leaf);
            return;
        }
        for letter in 0..self.system.len() {
            self.set(level, letter);
            self.descend(level + 1, visit);
        }
    }
}

/// Streaming `log Σ exp(x_i)` with a running maximum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogSumExp {
    max: f64,
    sum: f64,
}

impl Default for LogSumExp {
    fn default() -> Self {
        LogSumExp { max: f64::NEG_INFINITY, sum: 0.0 }
    }
}

impl LogSumExp {
    #[inline]
    pub fn add(&mut self, x: f64) {
        if x == f64::NEG_INFINITY {
            return;
        }
        if x <= self.max {
            self.sum += (x - self.max).exp();
        } else {
            self.sum = self.sum * (self.max - x).exp() + 1.0;
            self.max = x;
        }
    }

    pub fn merge(self, other: LogSumExp) -> LogSumExp {
        if other.max == f64::NEG_INFINITY {
            return self;
        }
        if self.max == f64::NEG_INFINITY {
            return other;
        }
        if self.max >= other.max {
            LogSumExp { max: self.max, sum: self.sum + other.sum * (other.max - self.max).exp() }
        } else {
            LogSumExp { max: other.max, sum: other.sum + self.sum * (self.max - other.max).exp() }
        }
    }

    /// `log Σ`, `-∞` for an empty sum.
    pub fn value(&self) -> f64 {
        if self.max == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.max + self.sum.ln()
        }
    }

    /// Largest single term seen.
    pub fn max_term(&self) -> f64 {
        self.max
    }
}

impl FromIterator<f64> for LogSumExp {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = LogSumExp::default();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Counts words.
pub struct CountWords;

impl FoldSpec for CountWords {
    type Acc = u64;

    fn identity(&self) -> u64 {
        0
    }

    fn visit(&self, acc: &mut u64, _leaf: &Leaf<'_>) {
        *acc += 1;
    }

    fn merge(&self, a: u64, b: u64) -> u64 {
        a + b
    }
}

/// `log Σ_w ‖P_w‖^{exponent} · exp(letter weights)`.
pub struct LogNormSum<'w> {
    pub exponent: f64,
    pub letter_weights: &'w [f64],
}

impl FoldSpec for LogNormSum<'_> {
    type Acc = LogSumExp;

    fn identity(&self) -> LogSumExp {
        LogSumExp::default()
    }

    fn visit(&self, acc: &mut LogSumExp, leaf: &Leaf<'_>) {
        acc.add(self.exponent * leaf.product.norm().ln() + leaf.log_weight);
    }

    fn merge(&self, a: LogSumExp, b: LogSumExp) -> LogSumExp {
        a.merge(b)
    }

    fn letter_log_weight(&self, letter: usize) -> f64 {
        self.letter_weights[letter]
    }
}

/// Smallest operator norm, with the lexicographically first word attaining it.
pub struct MinNorm;

impl FoldSpec for MinNorm {
    type Acc = Option<(f64, Vec<usize>)>;

    fn identity(&self) -> Self::Acc {
        None
    }

    fn visit(&self, acc: &mut Self::Acc, leaf: &Leaf<'_>) {
        let v = leaf.product.norm();
        if acc.as_ref().is_none_or(|(b, _)| v < *b) {
            *acc = Some((v, leaf.word.to_vec()));
        }
    }

    fn merge(&self, a: Self::Acc, b: Self::Acc) -> Self::Acc {
        match (a, b) {
            (Some(x), Some(y)) => Some(if y.0 < x.0 { y } else { x }),
            (x, None) => x,
            (None, y) => y,
        }
    }
}
