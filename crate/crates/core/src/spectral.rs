//! Lower spectral radius brackets, rotation perturbations that collapse it,
//! and growth diagnostics for the sandwich words `B₁ⁿ B₂ᵏ B₁ⁿ`.

use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::Serialize;

use crate::engine::{min_norm, ExecConfig, MatrixSystem, RunWord};
use crate::error::{invalid, Error, Result};
use crate::logmat::LogMatrix;
use crate::matrix::Matrix;
use crate::pressure::WitnessFamily;

/// Rate `min_{|w|=n} ‖A_w‖^{1/n}` at one depth.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DepthRate {
    pub n: usize,
    pub min_norm: f64,
    pub rate: f64,
}

/// Certified interval around the lower spectral radius.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LsrBracket {
    /// `min_i √|det A_i|`.
    pub lower: f64,
    /// Smallest `‖A_w‖^{1/|w|}` found.
    pub upper: f64,
    /// Length of the word attaining `upper`.
    pub depth: u64,
    pub witness: RunWord,
    /// Exhaustive depth reached.
    pub n_max: usize,
    pub rates: Vec<DepthRate>,
}

impl LsrBracket {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

/// Long-word candidates for [`lsr_bracket_with`].
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LsrOptions {
    pub witnesses: Vec<WitnessFamily>,
    /// Families are evaluated at `n = 2^j` for `j ≤ witness_max_exp`.
    pub witness_max_exp: u32,
}

/// Brackets the lower spectral radius of a 2×2 system from exhaustive
/// branch-and-bound searches at every depth `n ≤ n_max`.
pub fn lsr_bracket(system: &MatrixSystem, n_max: usize, cfg: &ExecConfig) -> Result<LsrBracket> {
    lsr_bracket_with(system, n_max, &LsrOptions::default(), cfg)
}

/// [`lsr_bracket`], additionally trying long words from the given families.
pub fn lsr_bracket_with(
    system: &MatrixSystem,
    n_max: usize,
    opts: &LsrOptions,
    cfg: &ExecConfig,
) -> Result<LsrBracket> {
    system.require_planar()?;
    if n_max == 0 {
        return Err(invalid("n_max must be positive"));
    }
    let lower = system.maps().iter().map(|m| m.det().abs().sqrt()).fold(f64::INFINITY, f64::min);
    let min_letter_norm = system.norms().iter().copied().fold(f64::INFINITY, f64::min);

    let mut rates = Vec::with_capacity(n_max);
    let mut best: Option<(f64, u64, RunWord)> = None;
    let mut prev: Option<f64> = None;
    for n in 1..=n_max {
        // some word of length n has norm at most m_{n−1}·min‖A_i‖
        let hint = prev.map(|m| m * min_letter_norm);
        let r = min_norm(system, n, hint, cfg)?;
        let rate = r.value.powf(1.0 / n as f64);
        if best.as_ref().is_none_or(|b| rate < b.0) {
            best = Some((rate, n as u64, RunWord::from(&r.witness)));
        }
        rates.push(DepthRate { n, min_norm: r.value, rate });
        prev = Some(r.value);
    }
    for fam in &opts.witnesses {
        for j in 0..=opts.witness_max_exp {
            let word = fam.word(1u64 << j);
            let len = word.len();
            let rate = (word.evaluate(system)?.log_norm() / len as f64).exp();
            if best.as_ref().is_none_or(|b| rate < b.0) {
                best = Some((rate, len, word));
            }
        }
    }
    let (upper, depth, witness) = best.expect("n_max >= 1");
    Ok(LsrBracket { lower, upper, depth, witness, n_max, rates })
}

/// A rotation whose `k`-th power carries the expanding eigendirection of `H`
/// onto its contracting one.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Perturbation {
    pub rotation: Matrix,
    pub theta: f64,
    pub j: i64,
    /// `(R′)ᵏ u = γ v` for the unit eigenvectors `u` (expanding) and `v` (contracting).
    pub gamma: f64,
    /// `‖(R′)ᵏu − γv‖ / ‖γv‖`.
    pub residual: f64,
    /// `|det H| = 1` within 1e-9.
    pub unit_determinant: bool,
    /// `(n, ‖Hⁿ (R′)ᵏ Hⁿ‖^{1/(2n+k)})` for `n = 1 … 40`.
    pub growth: Vec<(u32, f64)>,
    /// `‖Hⁿ (R′)ᵏ Hⁿ‖` at `n = 40`.
    pub final_norm: f64,
    /// The norms stop growing: the last value is within 1e-3 of 1, or the
    /// norm sequence has settled to relative change below 1e-6.
    pub bounded: bool,
}

/// Growth steps checked by [`degenerate_perturbation`].
pub const PERTURBATION_STEPS: u32 = 40;

/// Builds `R′ = rotation(θ)` with `θ = (angle(v) − angle(u) + jπ)/k ∈ (0, π)`,
/// `j` chosen to put `θ` nearest `target` (default `π/(2k)`).
pub fn degenerate_perturbation(h: &Matrix, k: u32, target: Option<f64>) -> Result<Perturbation> {
    if h.dim() != 2 {
        return Err(Error::UnsupportedDimension(h.dim()));
    }
    if k == 0 {
        return Err(invalid("k must be positive"));
    }
    let (mu, vecs) = real_eigen(h)?;
    let (u, v) = (vecs[0], vecs[1]);
    let angle = |x: (f64, f64)| x.1.atan2(x.0).rem_euclid(PI);
    let delta = angle(v) - angle(u);
    let kf = k as f64;
    let target = target.unwrap_or(PI / (2.0 * kf));
    let (j, theta) = (-2..=(k as i64 + 2))
        .map(|j| (j, (delta + j as f64 * PI) / kf))
        .filter(|&(_, t)| t > 0.0 && t < PI)
        .min_by(|a, b| (a.1 - target).abs().total_cmp(&(b.1 - target).abs()))
        .ok_or_else(|| invalid("no admissible rotation angle"))?;
    let rotation = Matrix::rotation(theta);
    let rk = rotation.pow(k);
    let image = (rk.get(0, 0) * u.0 + rk.get(0, 1) * u.1, rk.get(1, 0) * u.0 + rk.get(1, 1) * u.1);
    let gamma = image.0 * v.0 + image.1 * v.1;
    let residual = (image.0 - gamma * v.0).hypot(image.1 - gamma * v.1) / gamma.abs();
    if !(residual <= 1e-10) {
        return Err(invalid(format!("eigendirection transfer failed, residual {residual:e}")));
    }
    let unit_determinant = (h.det().abs() - 1.0).abs() <= 1e-9;

    // Hⁿ R′ᵏ Hⁿ = P Dⁿ (P⁻¹ R′ᵏ P) Dⁿ P⁻¹ with P = [u v]; the (u,u) entry of the
    // middle factor is exactly zero because R′ᵏ u ∥ v.
    let p = Matrix::new(2, vec![u.0, v.0, u.1, v.1])?;
    let pinv = inverse2(&p)?;
    let mut middle = pinv.mul(&rk)?.mul(&p)?;
    let scale = middle.norm();
    if middle.get(0, 0).abs() > 1e-10 * scale {
        return Err(invalid("eigenbasis transfer entry is not negligible"));
    }
    let mut data = middle.as_slice().to_vec();
    data[0] = 0.0;
    middle = Matrix::new(2, data)?;
    let lp = LogMatrix::from_matrix(&p)?;
    let lpinv = LogMatrix::from_matrix(&pinv)?;
    let lmid = LogMatrix::from_matrix(&middle)?;
    let d = Matrix::diag(mu[0], mu[1]);
    let mut growth = Vec::with_capacity(PERTURBATION_STEPS as usize);
    let mut norms = Vec::with_capacity(PERTURBATION_STEPS as usize);
    for n in 1..=PERTURBATION_STEPS {
        let dn = LogMatrix::pow(&d, n as u64)?;
        let prod = lp.mul(&dn).mul(&lmid).mul(&dn).mul(&lpinv);
        let log_norm = prod.log_norm();
        norms.push(log_norm);
        growth.push((n, (log_norm / (2 * n + k) as f64).exp()));
    }
    let last = growth.last().unwrap().1;
    let (a, b) = (norms[norms.len() - 2], norms[norms.len() - 1]);
    // unbounded growth would add at least 2·log|μ₁| per step
    let settled = (b - a).abs() <= 1e-6 * (1.0 + b.abs());
    Ok(Perturbation {
        rotation,
        theta,
        j,
        gamma,
        residual,
        unit_determinant,
        growth,
        final_norm: norms.last().unwrap().exp(),
        bounded: (last - 1.0).abs() <= 1e-3 || settled,
    })
}

type Eigenpairs = ([f64; 2], [(f64, f64); 2]);

/// Eigenvalues sorted by decreasing modulus and their unit eigenvectors.
fn real_eigen(h: &Matrix) -> Result<Eigenpairs> {
    let (a, b, c, d) = (h.get(0, 0), h.get(0, 1), h.get(1, 0), h.get(1, 1));
    let disc = (a - d).powi(2) + 4.0 * b * c;
    if !(disc > 0.0) {
        return Err(Error::NoRealEigenbasis);
    }
    let root = disc.sqrt();
    let tr = a + d;
    let big = if tr >= 0.0 { 0.5 * (tr + root) } else { 0.5 * (tr - root) };
    let small = h.det() / big;
    if !(big.abs() > small.abs()) {
        return Err(Error::NoRealEigenbasis);
    }
    let vec_for = |mu: f64| {
        let v1 = (b, mu - a);
        let v2 = (mu - d, c);
        let v = if v1.0.hypot(v1.1) >= v2.0.hypot(v2.1) { v1 } else { v2 };
        let n = v.0.hypot(v.1);
        // upper half-plane representative
        let (x, y) = (v.0 / n, v.1 / n);
        if y < 0.0 || (y == 0.0 && x < 0.0) {
            (-x, -y)
        } else {
            (x, y)
        }
    };
    Ok(([big, small], [vec_for(big), vec_for(small)]))
}

fn inverse2(m: &Matrix) -> Result<Matrix> {
    let det = m.det();
    if det == 0.0 {
        return Err(Error::NoRealEigenbasis);
    }
    Matrix::new(2, vec![m.get(1, 1) / det, -m.get(0, 1) / det, -m.get(1, 0) / det, m.get(0, 0) / det])
}

/// One row of [`growth_witness`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GrowthPoint {
    pub n: u64,
    /// `‖B₁ⁿ B₂ᵏ B₁ⁿ‖^{1/(2n+k)}`.
    pub value: f64,
    pub log_value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthSeries {
    pub k: u64,
    pub points: Vec<GrowthPoint>,
    /// Values never increase with `n`.
    pub non_increasing: bool,
}

/// `n ↦ ‖B₁ⁿ B₂ᵏ B₁ⁿ‖^{1/(2n+k)}` for `n = 1 … n_max`, evaluated in the log domain.
pub fn growth_witness(b1: &Matrix, b2: &Matrix, k: u64, n_max: u64) -> Result<GrowthSeries> {
    if b1.dim() != 2 || b2.dim() != 2 {
        return Err(Error::UnsupportedDimension(b1.dim().max(b2.dim())));
    }
    if n_max == 0 {
        return Err(invalid("n_max must be positive"));
    }
    let middle = LogMatrix::pow(b2, k)?;
    let mut points = Vec::with_capacity(n_max as usize);
    for n in 1..=n_max {
        let outer = LogMatrix::pow(b1, n)?;
        let w = outer.mul(&middle).mul(&outer);
        let log_value = w.log_norm() / (2 * n + k) as f64;
        points.push(GrowthPoint { n, value: log_value.exp(), log_value });
    }
    let non_increasing = points.windows(2).all(|w| w[1].value <= w[0].value);
    Ok(GrowthSeries { k, points, non_increasing })
}

impl GrowthSeries {
    /// CSV with columns `n,value,log_value`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,value,log_value\n");
        for p in &self.points {
            let _ = writeln!(out, "{},{},{}", p.n, p.value, p.log_value);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pressure::{perturbed_pair, theorem1_pair};

    #[test]
    fn commuting_pair_upper_is_lambda() {
        let b = lsr_bracket(&theorem1_pair(0.4, 0.05).unwrap(), 10, &ExecConfig::default()).unwrap();
        assert!((b.lower - 0.02f64.sqrt()).abs() < 1e-15);
        for r in &b.rates {
            assert!((r.rate - 0.4).abs() < 1e-12 * 0.4);
        }
    }

    #[test]
    fn perturbed_pair_long_witness_collapses_bracket() {
        let sys = perturbed_pair(0.4, 0.05, 4).unwrap();
        let opts = LsrOptions { witnesses: vec![WitnessFamily::sandwich(0, 1, 4)], witness_max_exp: 24 };
        let b = lsr_bracket_with(&sys, 8, &opts, &ExecConfig::default()).unwrap();
        assert!((b.lower - 0.1414213562373095).abs() < 1e-15);
        assert!(b.width() < 1e-6, "{b:?}");
        assert!(b.lower <= b.upper);
    }

    #[test]
    fn single_conformal_map() {
        let sys = MatrixSystem::new(vec![Matrix::rotation(1.0).scale(0.4)]).unwrap();
        let b = lsr_bracket(&sys, 5, &ExecConfig::default()).unwrap();
        assert!((b.upper - 0.4).abs() < 1e-12 && (b.lower - 0.4).abs() < 1e-12);
    }

    #[test]
    fn axis_aligned_perturbation() {
        let h = Matrix::diag(2.0, 0.5);
        let p = degenerate_perturbation(&h, 1, None).unwrap();
        assert!((p.theta - PI / 2.0).abs() < 1e-15);
        assert!(p.bounded && p.unit_determinant);
        assert!((p.final_norm - 1.0).abs() < 1e-12);
        let p4 = degenerate_perturbation(&h, 4, None).unwrap();
        assert!((p4.theta - PI / 8.0).abs() < 1e-15);
        assert!((p4.growth.last().unwrap().1 - 1.0).abs() <= 1e-3);
    }

    #[test]
    fn sheared_perturbation() {
        let h = Matrix::from_rows(&[vec![2.0, 1.0], vec![0.0, 0.5]]).unwrap();
        let p = degenerate_perturbation(&h, 2, None).unwrap();
        assert!(p.residual <= 1e-10);
        assert!(p.theta > 0.0 && p.theta < PI);
        assert!(p.bounded);
        assert!((p.final_norm - 1.8685170918213).abs() < 1e-9, "{}", p.final_norm);
    }

    #[test]
    fn complex_eigenvalues_rejected() {
        assert_eq!(degenerate_perturbation(&Matrix::rotation(0.5), 2, None).unwrap_err(), Error::NoRealEigenbasis);
    }

    #[test]
    fn growth_reference_values() {
        let b1 = Matrix::diag(0.4, 0.05);
        let b2 = Matrix::rotation(PI / 8.0).scale(0.4);
        let g = growth_witness(&b1, &b2, 4, 2000).unwrap();
        assert!((g.points[9].value - 0.16817928305074295).abs() < 1e-12);
        assert!((g.points.last().unwrap().value - 0.1414213562373095).abs() < 2e-4);
        assert!(g.non_increasing);
        assert!(g.to_csv().starts_with("n,value,log_value\n1,"));
        let id = growth_witness(&b1, &Matrix::identity(2).unwrap(), 3, 2000).unwrap();
        assert!((id.points.last().unwrap().value - 0.4).abs() < 1e-3);
    }
}
