//! Branch-and-bound search for the word of given length with the smallest norm.

use std::sync::atomic::{AtomicU64, Ordering};

use serde::Serialize;

use crate::engine::fold::{pairwise_merge, Walker};
use crate::engine::{ExecConfig, MatrixSystem, Word};
use crate::error::Result;

/// Subtrees are cut only when their bound beats the incumbent by this relative
/// margin, so every exact minimiser is always reached.
const PRUNE_SLACK: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MinNormResult {
    pub value: f64,
    pub witness: Word,
    /// Words whose norm was actually evaluated.
    pub leaves: u64,
}

/// `min_{|w| = depth} ‖A_w‖` with a minimising word.
///
/// A prefix `P` with `m` letters left is skipped when
/// `‖P‖ · (min_i σ_d(A_i))^m` exceeds the incumbent, which is sound because
/// `‖PA‖ ≥ ‖P‖ σ_d(A)`. The witness is the lexicographically first minimiser,
/// independent of the worker count.
pub fn min_norm(
    system: &MatrixSystem,
    depth: usize,
    initial_bound: Option<f64>,
    cfg: &ExecConfig,
) -> Result<MinNormResult> {
    min_norm_with(system, depth, initial_bound, true, cfg)
}

/// [`min_norm`] with pruning optionally disabled (exhaustive reference).
pub fn min_norm_with(
    system: &MatrixSystem,
    depth: usize,
    initial_bound: Option<f64>,
    prune: bool,
    cfg: &ExecConfig,
) -> Result<MinNormResult> {
    let found = search(system, depth, initial_bound, prune, cfg)?;
    match found {
        Some(r) => Ok(r),
        // the hint was below the true minimum
        None => Ok(search(system, depth, None, prune, cfg)?.expect("unbounded search finds a word")),
    }
}

fn search(
    system: &MatrixSystem,
    depth: usize,
    initial_bound: Option<f64>,
    prune: bool,
    cfg: &ExecConfig,
) -> Result<Option<MinNormResult>> {
    let n = system.len();
    cfg.check(n, depth)?;
    let sigma_min = system.min_singular().iter().copied().fold(f64::INFINITY, f64::min);
    let decay: Vec<f64> = (0..=depth).map(|m| sigma_min.powi(m as i32)).collect();
    let start = initial_bound.map_or(f64::INFINITY, |b| b * (1.0 + PRUNE_SLACK));
    let best = AtomicU64::new(start.to_bits());
    let weights = vec![0.0; n];

    let plen = cfg.prefix_len.clamp(1, depth);
    let n_prefixes = n.pow(plen as u32);
    let run = |index: usize| -> Option<MinNormResult> {
        let mut walker = Walker::new(system, depth, &weights);
        walker.set_prefix(index, plen);
        let mut local = Local { value: f64::INFINITY, word: Vec::new(), leaves: 0 };
        if !prune || !cut(&walker, plen, &decay, &best) {
            explore(&mut walker, plen, &decay, &best, prune, &mut local);
        }
        (local.leaves > 0).then_some(MinNormResult {
            value: local.value,
            witness: Word(local.word),
            leaves: local.leaves,
        })
    };

    let parts: Vec<Option<MinNormResult>> = if cfg.sequential() {
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
    let merged = pairwise_merge(parts, |a, b| match (a, b) {
        (Some(x), Some(y)) => {
            let leaves = x.leaves + y.leaves;
            let mut keep = if y.value < x.value { y } else { x };
            keep.leaves = leaves;
            Some(keep)
        }
        (x, None) => x,
        (None, y) => y,
    })
    .flatten();
    Ok(merged.filter(|r| r.value.is_finite() && r.value <= start))
}

struct Local {
    value: f64,
    word: Vec<usize>,
    leaves: u64,
}

#[inline]
fn cut(walker: &Walker<'_>, level: usize, decay: &[f64], best: &AtomicU64) -> bool {
    let remaining = walker.depth() - level;
    let bound = walker.product(level).norm() * decay[remaining] * (1.0 - PRUNE_SLACK);
    bound >= f64::from_bits(best.load(Ordering::Relaxed))
}

fn explore(walker: &mut Walker<'_>, level: usize, decay: &[f64], best: &AtomicU64, prune: bool, local: &mut Local) {
    let depth = walker.depth();
    if level == depth {
        local.leaves += 1;
        let v = walker.product(depth).norm();
        if v < local.value {
            local.value = v;
            local.word.clear();
            local.word.extend_from_slice(walker.word(depth));
            best.fetch_min_f64(v);
        }
        return;
    }
    for letter in 0..walker.n_letters() {
        walker.set(level, letter);
        if prune && level + 1 < depth && cut(walker, level + 1, decay, best) {
            continue;
        }
        explore(walker, level + 1, decay, best, prune, local);
    }
}

trait FetchMinF64 {
    fn fetch_min_f64(&self, v: f64);
}

impl FetchMinF64 for AtomicU64 {
    /// Non-negative floats order like their bit patterns.
    fn fetch_min_f64(&self, v: f64) {
        debug_assert!(v >= 0.0);
        self.fetch_min(v.to_bits(), Ordering::Relaxed);
    }
}
