use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::pressure::pairs::{hypothesis_check, matrix_distance, perturbed_pair, theorem1_pair, HypothesisCheck};
use crate::pressure::solve::{q_dimension_with, q_dimension_witness_upper, DimensionBracket, SolverOptions};
use crate::pressure::{ProbabilityVector, WitnessFamily};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanRow {
    pub k: u32,
    /// `‖B₂(k) − λI‖`.
    pub matrix_distance: f64,
    /// Certified upper bound on `𝔯_q` of the perturbed pair.
    pub rq_upper_perturbed: f64,
    /// Midpoint of the certified bracket for the commuting pair.
    pub rq_exact_diagonal: f64,
    /// Lower end of the commuting-pair bracket minus `rq_upper_perturbed`.
    pub gap: f64,
    pub witness: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiscontinuityScan {
    pub lambda: f64,
    pub delta: f64,
    pub p: f64,
    pub q: f64,
    pub hypothesis: HypothesisCheck,
    pub diagonal: DimensionBracket,
    pub rows: Vec<ScanRow>,
    /// Every row has a certified positive gap.
    pub gaps_positive: bool,
}

impl DiscontinuityScan {
    /// CSV with columns `k,matrix_distance,rq_upper_perturbed,rq_exact_diagonal,gap`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,matrix_distance,rq_upper_perturbed,rq_exact_diagonal,gap\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                r.k, r.matrix_distance, r.rq_upper_perturbed, r.rq_exact_diagonal, r.gap
            );
        }
        out
    }
}

/// Compares `𝔯_q` of `(diag(λ, δ), λI)` with certified upper bounds for the
/// perturbed pairs `(diag(λ, δ), λ·rotation(π/(2k)))`, one row per `k`.
///
/// The perturbed bound comes from long words alone, including the family
/// `1ⁿ 2ᵏ 1ⁿ`; the commuting pair is solved in full.
pub fn discontinuity_scan(
    lam: f64,
    delta: f64,
    p: f64,
    q: f64,
    ks: &[u32],
    opts: &SolverOptions,
) -> Result<DiscontinuityScan> {
    let hypothesis = hypothesis_check(lam, delta, p, q)?;
    if !hypothesis.holds {
        return Err(Error::HypothesisFailed(format!(
            "log min{{p^q, (1-p)^q}} / log sqrt(lambda delta) = {} is not below log(p^q + (1-p)^q) / log lambda = {}; \
             decrease delta",
            hypothesis.perturbed_ratio, hypothesis.diagonal_ratio
        )));
    }
    if ks.is_empty() || ks.contains(&0) {
        return Err(invalid("k list must be nonempty with positive entries"));
    }
    let probs = ProbabilityVector::pair(p)?;
    let diagonal = q_dimension_with(&theorem1_pair(lam, delta)?, &probs, q, opts)?;
    let centre = diagonal.midpoint();
    let mut rows = Vec::with_capacity(ks.len());
    for &k in ks {
        let mut o = opts.clone();
        o.extra_witnesses.push(WitnessFamily::sandwich(0, 1, k as u64));
        let found = q_dimension_witness_upper(&perturbed_pair(lam, delta, k)?, &probs, q, &o)?;
        let (upper, witness) = match found {
            Some(w) => (w.upper, w.witness),
            None => (f64::INFINITY, String::new()),
        };
        rows.push(ScanRow {
            k,
            matrix_distance: matrix_distance(lam, k),
            rq_upper_perturbed: upper,
            rq_exact_diagonal: centre,
            gap: diagonal.lower - upper,
            witness,
        });
    }
    let gaps_positive = rows.iter().all(|r| r.gap > 0.0);
    Ok(DiscontinuityScan { lambda: lam, delta, p, q, hypothesis, diagonal, rows, gaps_positive })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn persistent_gap() {
        let scan = discontinuity_scan(0.4, 0.05, 0.5, 2.0, &[2, 4, 8, 16], &SolverOptions::default()).unwrap();
        assert!(scan.gaps_positive);
        assert!(scan.diagonal.contains(0.7564707973660301));
        for r in &scan.rows {
            assert!(r.rq_upper_perturbed <= 0.7087345 + 1e-6, "{r:?}");
            assert!(r.rq_upper_perturbed >= 0.7087352805422317 - 1e-9);
            assert!(r.gap >= 0.0477, "{r:?}");
        }
        assert!(scan.rows.windows(2).all(|w| w[1].matrix_distance < w[0].matrix_distance));
        let csv = scan.to_csv();
        assert_eq!(csv.lines().count(), 5);
        assert!(csv.starts_with("k,matrix_distance,rq_upper_perturbed,rq_exact_diagonal,gap\n2,"));
    }

    #[test]
    fn large_delta_fails_hypothesis() {
        let err = discontinuity_scan(0.4, 0.3, 0.5, 2.0, &[2], &SolverOptions::default()).unwrap_err();
        assert!(matches!(err, Error::HypothesisFailed(_)));
    }
}
