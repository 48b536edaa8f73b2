//! Single-word lower bounds on the q-pressure from very long words.
//!
//! Every term of the depth-`L` sum is positive, so `a_L ≥ log t(w)` for any
//! word `w` of length `L`, and superadditivity turns that into
//! `R_q ≥ ((1−q) log φ^s(A_w) + q Σ_i c_i log p_i) / L` where `c_i` counts the
//! letter `i` in `w`. Families such as `i^n j^k i^n` are evaluated for
//! `n = 1, 2, 4, …` in the log domain.

use std::fmt;

use serde::Serialize;

use crate::engine::{MatrixSystem, RunWord};
use crate::error::{invalid, Result};
use crate::matrix::log_phi_2x2;
use crate::pressure::ProbabilityVector;

/// One block `letter^{fixed + per_n·n}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Block {
    pub letter: usize,
    pub fixed: u64,
    pub per_n: u64,
}

/// A family of words `n ↦ ∏ letter^{fixed + per_n·n}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WitnessFamily {
    blocks: Vec<Block>,
}

impl WitnessFamily {
    pub fn new(blocks: Vec<Block>) -> Result<Self> {
        if blocks.iter().all(|b| b.per_n == 0) {
            return Err(invalid("a witness family needs a block that grows with n"));
        }
        Ok(WitnessFamily { blocks })
    }

    /// `outer^n inner^k outer^n` (0-based letters).
    pub fn sandwich(outer: usize, inner: usize, k: u64) -> Self {
        WitnessFamily {
            blocks: vec![
                Block { letter: outer, fixed: 0, per_n: 1 },
                Block { letter: inner, fixed: k, per_n: 0 },
                Block { letter: outer, fixed: 0, per_n: 1 },
            ],
        }
    }

    /// `letter^n`.
    pub fn power(letter: usize) -> Self {
        WitnessFamily { blocks: vec![Block { letter, fixed: 0, per_n: 1 }] }
    }

    pub fn word(&self, n: u64) -> RunWord {
        self.blocks.iter().fold(RunWord::new(), |w, b| w.push(b.letter, b.fixed + b.per_n * n))
    }

    fn max_letter(&self) -> usize {
        self.blocks.iter().map(|b| b.letter).max().unwrap_or(0)
    }
}

impl fmt::Display for WitnessFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .blocks
            .iter()
            .map(|b| match (b.fixed, b.per_n) {
                (0, 1) => format!("{}^n", b.letter + 1),
                (0, m) => format!("{}^{m}n", b.letter + 1),
                (k, 0) => format!("{}^{k}", b.letter + 1),
                (k, 1) => format!("{}^(n+{k})", b.letter + 1),
                (k, m) => format!("{}^({m}n+{k})", b.letter + 1),
            })
            .collect();
        f.write_str(&parts.join(" "))
    }
}

impl Serialize for WitnessFamily {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// The default families for a system: every pure power and every sandwich
/// `i^n j^k i^n` with `i ≠ j` and `1 ≤ k ≤ max_inner`.
pub fn default_families(n_letters: usize, max_inner: u64) -> Vec<WitnessFamily> {
    let mut out: Vec<WitnessFamily> = (0..n_letters).map(WitnessFamily::power).collect();
    for i in 0..n_letters {
        for j in (0..n_letters).filter(|&j| j != i) {
            for k in 1..=max_inner {
                out.push(WitnessFamily::sandwich(i, j, k));
            }
        }
    }
    out
}

#[derive(Clone, Debug)]
struct Sample {
    family: usize,
    n: u64,
    len: f64,
    log_s1: f64,
    log_abs_det: f64,
    counts: Vec<u64>,
}

/// The best witness found at one `s`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WitnessBound {
    pub value: f64,
    pub family: String,
    pub n: u64,
    pub length: u64,
}

/// Witness words evaluated once and reused for every `s`.
#[derive(Clone, Debug)]
pub struct WitnessTable {
    families: Vec<WitnessFamily>,
    samples: Vec<Sample>,
}

impl WitnessTable {
    /// Evaluates each family at `n = 2^j`, `0 ≤ j ≤ max_exp` (2×2 systems).
    pub fn build(system: &MatrixSystem, families: Vec<WitnessFamily>, max_exp: u32) -> Result<Self> {
        system.require_planar()?;
        if max_exp > 40 {
            return Err(invalid("witness exponent above 40"));
        }
        let mut samples = Vec::new();
        for (index, fam) in families.iter().enumerate() {
            if fam.max_letter() >= system.len() {
                return Err(invalid(format!("witness {fam} uses a letter outside the system")));
            }
            for j in 0..=max_exp {
                let n = 1u64 << j;
                let word = fam.word(n);
                let lm = word.evaluate(system)?;
                samples.push(Sample {
                    family: index,
                    n,
                    len: word.len() as f64,
                    log_s1: lm.log_norm(),
                    log_abs_det: lm.log_abs_det(),
                    counts: word.counts(system.len()),
                });
            }
        }
        Ok(WitnessTable { families, samples })
    }

    pub fn families(&self) -> &[WitnessFamily] {
        &self.families
    }

    /// `max_w ((1−q) log φ^s(A_w) + q Σ c_i log p_i) / |w|`, a lower bound on `R_q(s)`.
    pub fn lower_bound(&self, p: &ProbabilityVector, q: f64, s: f64) -> Option<WitnessBound> {
        let log_p = p.log_weights();
        let mut best: Option<(f64, &Sample)> = None;
        for smp in &self.samples {
            if !smp.log_s1.is_finite() {
                continue;
            }
            let log_prob: f64 = smp.counts.iter().zip(&log_p).map(|(&c, lp)| c as f64 * lp).sum();
            let v = ((1.0 - q) * log_phi_2x2(smp.log_s1, smp.log_abs_det, s) + q * log_prob) / smp.len;
            if best.is_none_or(|(b, _)| v > b) {
                best = Some((v, smp));
            }
        }
        best.map(|(value, smp)| WitnessBound {
            value,
            family: self.families[smp.family].to_string(),
            n: smp.n,
            length: smp.len as u64,
        })
    }
}
