//! The explicit discontinuity example: a commuting diagonal pair and its
//! rotated perturbations.
//!
//! For `A₁ = diag(λ, δ)`, `A₂ = λI` every product of length `n` has both the
//! norm and the q-pressure terms fixed by `λⁿ`, so `𝔯_q` has a closed form.
//! Replacing `A₂` with `B₂(k) = λ·rotation(π/(2k))` allows the words
//! `B₁ⁿ B₂ᵏ B₁ⁿ = λᵏ(λδ)ⁿ J`, which pull `𝔯_q` down to at most
//! `q log min{p, 1−p} / ((q−1) log √(λδ))` however close `B₂(k)` is to `A₂`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::engine::MatrixSystem;
use crate::error::{invalid, Result};
use crate::matrix::Matrix;

fn check_params(lam: f64, delta: f64, p: f64, q: f64) -> Result<()> {
    if !(0.0 < delta && delta < lam && lam < 0.5) {
        return Err(invalid(format!("need 0 < delta < lambda < 1/2, got lambda = {lam}, delta = {delta}")));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(invalid(format!("p must lie in (0, 1), got {p}")));
    }
    if !(q > 1.0) || !q.is_finite() {
        return Err(invalid(format!("q must exceed 1, got {q}")));
    }
    Ok(())
}

/// `(diag(λ, δ), λI)`.
pub fn theorem1_pair(lam: f64, delta: f64) -> Result<MatrixSystem> {
    MatrixSystem::new(vec![Matrix::diag(lam, delta), Matrix::diag(lam, lam)])
}

/// `λ·rotation(π/(2k))`.
pub fn perturbed_map(lam: f64, k: u32) -> Result<Matrix> {
    if k == 0 {
        return Err(invalid("k must be positive"));
    }
    Ok(Matrix::rotation(PI / (2.0 * k as f64)).scale(lam))
}

/// `(diag(λ, δ), λ·rotation(π/(2k)))`.
pub fn perturbed_pair(lam: f64, delta: f64, k: u32) -> Result<MatrixSystem> {
    MatrixSystem::new(vec![Matrix::diag(lam, delta), perturbed_map(lam, k)?])
}

/// `‖λ·rotation(π/(2k)) − λI‖ = 2λ sin(π/(4k))`.
pub fn matrix_distance(lam: f64, k: u32) -> f64 {
    2.0 * lam * (PI / (4.0 * k as f64)).sin()
}

/// `𝔯_q` of the commuting pair: `log(p^q + (1−p)^q) / ((q−1) log λ)`.
pub fn closed_form_theorem1_pair(lam: f64, delta: f64, p: f64, q: f64) -> Result<f64> {
    check_params(lam, delta, p, q)?;
    Ok((p.powf(q) + (1.0 - p).powf(q)).ln() / ((q - 1.0) * lam.ln()))
}

/// The bound `q log min{p, 1−p} / ((q−1) log √(λδ))` on `𝔯_q` of every perturbed pair.
pub fn perturbed_upper_bound(lam: f64, delta: f64, p: f64, q: f64) -> Result<f64> {
    check_params(lam, delta, p, q)?;
    Ok(q * p.min(1.0 - p).ln() / ((q - 1.0) * (lam * delta).sqrt().ln()))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HypothesisCheck {
    /// `log min{p^q, (1−p)^q} / log √(λδ)`.
    pub perturbed_ratio: f64,
    /// `log(p^q + (1−p)^q) / log λ`.
    pub diagonal_ratio: f64,
    /// Exact `𝔯_q` of the commuting pair.
    pub exact: f64,
    /// Upper bound on `𝔯_q` of the perturbed pairs.
    pub perturbed_bound: f64,
    /// `perturbed_ratio < diagonal_ratio` and `exact ∈ (0, 1]`.
    pub holds: bool,
}

/// Checks that `δ` is small enough for the perturbed pairs to have strictly
/// smaller `𝔯_q` than the commuting pair.
pub fn hypothesis_check(lam: f64, delta: f64, p: f64, q: f64) -> Result<HypothesisCheck> {
    check_params(lam, delta, p, q)?;
    let perturbed_ratio = (p.powf(q).min((1.0 - p).powf(q))).ln() / (lam * delta).sqrt().ln();
    let diagonal_ratio = (p.powf(q) + (1.0 - p).powf(q)).ln() / lam.ln();
    let exact = closed_form_theorem1_pair(lam, delta, p, q)?;
    let perturbed_bound = perturbed_upper_bound(lam, delta, p, q)?;
    Ok(HypothesisCheck {
        perturbed_ratio,
        diagonal_ratio,
        exact,
        perturbed_bound,
        holds: perturbed_ratio < diagonal_ratio && exact > 0.0 && exact <= 1.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        let v = closed_form_theorem1_pair(0.4, 0.05, 0.5, 2.0).unwrap();
        assert!((v - 0.7564707973660301).abs() < 1e-15);
        let b = perturbed_upper_bound(0.4, 0.05, 0.5, 2.0).unwrap();
        assert!((b - 0.7087352805422317).abs() < 1e-15);
        let h = hypothesis_check(0.4, 0.05, 0.5, 2.0).unwrap();
        assert!(h.holds);
    }

    #[test]
    fn large_delta_fails() {
        let h = hypothesis_check(0.4, 0.3, 0.5, 2.0).unwrap();
        assert!(!h.holds);
        assert!((h.perturbed_ratio - 1.3076623140955292).abs() < 1e-12);
    }

    #[test]
    fn p_to_one_sends_value_to_zero() {
        let v = closed_form_theorem1_pair(0.4, 0.05, 1.0 - 1e-12, 2.0).unwrap();
        assert!(v.abs() < 1e-10);
    }

    #[test]
    fn distances_shrink() {
        let d: Vec<f64> = [2, 4, 8, 16, 32].iter().map(|&k| matrix_distance(0.4, k)).collect();
        assert!((d[0] - 0.30614674589207186).abs() < 1e-12);
        assert!(d.windows(2).all(|w| w[1] < w[0]));
        let direct = perturbed_map(0.4, 8).unwrap().sub(&Matrix::diag(0.4, 0.4)).unwrap().norm();
        assert!((direct - d[2]).abs() < 1e-15);
    }

    #[test]
    fn domain_checks() {
        assert!(closed_form_theorem1_pair(0.6, 0.05, 0.5, 2.0).is_err());
        assert!(closed_form_theorem1_pair(0.4, 0.45, 0.5, 2.0).is_err());
        assert!(closed_form_theorem1_pair(0.4, 0.05, 0.0, 2.0).is_err());
        assert!(closed_form_theorem1_pair(0.4, 0.05, 0.5, 1.0).is_err());
    }
}
