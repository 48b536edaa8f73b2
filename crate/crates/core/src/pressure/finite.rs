//! Finite-depth pressures and the bounds they give on the limits.
//!
//! With `t(w) = φ^s(A_w)^{1−q} p_w^q` the sequence `a_n = log Σ_{|w|=n} t(w)`
//! is superadditive, so `a_n/n ≤ R_q` for every `n`. With `u(w) = φ^s(A_w)`
//! the sequence `b_n = log Σ u(w)` is subadditive, so `b_n/n ≥ S`.
//!
//! The opposite bounds replace `φ^s` by a supermultiplicative minorant
//! `g ≤ φ^s`; then `(1/m) log Σ g^{1−q} p^q ≥ R_q` and `(1/m) log Σ g ≤ S` for
//! every `m`. On 2×2 systems the minorants used are
//! `g = a(P)^x |det P|^{(s−x)/2}` with `0 ≤ x ≤ min(s, 2−s)`, where `a` is either
//! the smallest singular value or the least stretch over a common invariant
//! cone. At `s ≥ 2` the determinant form is exact.

use serde::{Deserialize, Serialize};

use crate::cone::{find_invariant_cone, Antinorm};
use crate::engine::{fold_words, ExecConfig, FoldSpec, Leaf, LogSumExp, MatrixSystem};
use crate::error::{invalid, Error, Result};
use crate::matrix::{log_phi_2x2, log_phi_from_parts};
use crate::pressure::ProbabilityVector;

/// Largest accepted moment order.
pub const MAX_Q: f64 = 64.0;

/// Minorant family used for a bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Minorant {
    /// `|det P|^{s/2}`.
    Determinant,
    /// `σ₂(P)^x |det P|^{(s−x)/2}`.
    SmallestSingular,
    /// `a_K(P)^x |det P|^{(s−x)/2}` over a verified invariant cone `K`.
    ConeAntinorm,
}

/// Certified bounds on a limit pressure from one depth.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PressureBracket {
    pub depth: usize,
    pub lower: f64,
    pub upper: f64,
    pub lower_certified: bool,
    pub upper_certified: bool,
    /// Minorant behind the surrogate side, when one was used.
    pub minorant: Option<Minorant>,
}

/// Which pressure is being evaluated.
#[derive(Clone, Copy, Debug)]
pub(crate) enum Kind<'a> {
    /// `R_q` with probabilities and `q > 1`.
    Q { p: &'a ProbabilityVector, q: f64 },
    /// Singular value pressure `S`.
    Singular,
}

impl Kind<'_> {
    #[inline]
    fn term(&self, log_phi: f64, log_weight: f64) -> f64 {
        match self {
            Kind::Q { q, .. } => (1.0 - q) * log_phi + log_weight,
            Kind::Singular => log_phi,
        }
    }
}

pub(crate) fn check_q_inputs(system: &MatrixSystem, p: &ProbabilityVector, q: f64, s: f64) -> Result<()> {
    system.require_contracting()?;
    if p.len() != system.len() {
        return Err(invalid(format!("{} probabilities for {} maps", p.len(), system.len())));
    }
    check_q(q)?;
    check_s(s)
}

pub(crate) fn check_q(q: f64) -> Result<()> {
    if !(q > 1.0 && q <= MAX_Q) {
        return Err(invalid(format!("q must lie in (1, {MAX_Q}], got {q}")));
    }
    Ok(())
}

pub(crate) fn check_s(s: f64) -> Result<()> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(invalid(format!("s must be positive and finite, got {s}")));
    }
    Ok(())
}

/// One surrogate: `log g = x·log a + (s − x)/2 · log|det|`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Surrogate {
    pub minorant: Minorant,
    pub x: f64,
}

/// The surrogates tried at `s` on a 2×2 system.
pub(crate) fn surrogates(s: f64, cone: Option<&Antinorm>) -> Vec<Surrogate> {
    let mut out = vec![Surrogate { minorant: Minorant::Determinant, x: 0.0 }];
    if s >= 2.0 {
        return out;
    }
    let x_max = s.min(2.0 - s);
    for frac in [0.25, 0.5, 0.75, 1.0] {
        out.push(Surrogate { minorant: Minorant::SmallestSingular, x: frac * x_max });
        if cone.is_some() {
            out.push(Surrogate { minorant: Minorant::ConeAntinorm, x: frac * x_max });
        }
    }
    out
}

/// Result of one enumeration at depth `n`: `log Σ` of exact and surrogate terms.
#[derive(Clone, Debug)]
pub(crate) struct DepthSums {
    pub depth: usize,
    pub exact: f64,
    pub surrogate: Vec<(Surrogate, f64)>,
}

impl DepthSums {
    /// Exact side divided by depth.
    pub fn exact_rate(&self) -> f64 {
        self.exact / self.depth as f64
    }

    /// Tightest surrogate rate: the minimum for `R`, the maximum for `S`.
    pub fn best_surrogate(&self, kind: &Kind<'_>) -> Option<(Minorant, f64)> {
        let n = self.depth as f64;
        let rates = self.surrogate.iter().map(|(sg, v)| (sg.minorant, v / n));
        match kind {
            Kind::Q { .. } => rates.min_by(|a, b| a.1.total_cmp(&b.1)),
            Kind::Singular => rates.max_by(|a, b| a.1.total_cmp(&b.1)),
        }
    }
}

struct PressureFold<'a> {
    kind: Kind<'a>,
    s: f64,
    letter_weights: Vec<f64>,
    surrogates: Vec<Surrogate>,
    cone: Option<Antinorm>,
    planar: bool,
}

impl FoldSpec for PressureFold<'_> {
    type Acc = Vec<LogSumExp>;

    fn identity(&self) -> Self::Acc {
        vec![LogSumExp::default(); 1 + self.surrogates.len()]
    }

    fn visit(&self, acc: &mut Self::Acc, leaf: &Leaf<'_>) {
        let s = self.s;
        if !self.planar {
            let log_sv: Vec<f64> = leaf.product.singular_values().values.iter().map(|v| v.ln()).collect();
            let lp = log_phi_from_parts(&log_sv, log_sv.iter().sum(), s);
            acc[0].add(self.kind.term(lp, leaf.log_weight));
            return;
        }
        let log_s1 = leaf.product.norm().ln();
        let log_det = leaf.log_abs_det;
        acc[0].add(self.kind.term(log_phi_2x2(log_s1, log_det, s), leaf.log_weight));
        if self.surrogates.is_empty() {
            return;
        }
        let log_s2 = log_det - log_s1;
        let log_cone = self.cone.as_ref().map(|c| c.log_eval(leaf.product));
        for (slot, sg) in acc[1..].iter_mut().zip(&self.surrogates) {
            let log_a = match sg.minorant {
                Minorant::Determinant => 0.0,
                Minorant::SmallestSingular => log_s2,
                Minorant::ConeAntinorm => log_cone.unwrap_or(log_s2),
            };
            let log_g = if sg.x == 0.0 { 0.5 * s * log_det } else { sg.x * log_a + 0.5 * (s - sg.x) * log_det };
            slot.add(self.kind.term(log_g, leaf.log_weight));
        }
    }

    fn merge(&self, mut a: Self::Acc, b: Self::Acc) -> Self::Acc {
        for (x, y) in a.iter_mut().zip(b) {
            *x = x.merge(y);
        }
        a
    }

    fn letter_log_weight(&self, letter: usize) -> f64 {
        self.letter_weights[letter]
    }
}

/// The common invariant cone of a planar system, if one is found.
pub(crate) fn system_cone(system: &MatrixSystem) -> Option<Antinorm> {
    if system.dim() != 2 {
        return None;
    }
    find_invariant_cone(system.maps()).map(Antinorm::new)
}

/// Enumerates depth `n` once, collecting the exact sum and (on 2×2 systems,
/// when `with_surrogates`) every surrogate sum.
pub(crate) fn depth_sums(
    system: &MatrixSystem,
    kind: Kind<'_>,
    s: f64,
    n: usize,
    with_surrogates: bool,
    cone: Option<&Antinorm>,
    cfg: &ExecConfig,
) -> Result<DepthSums> {
    let planar = system.dim() == 2;
    let surrogates = if with_surrogates && planar { surrogates(s, cone) } else { Vec::new() };
    let letter_weights = match kind {
        Kind::Q { p, q } => p.log_weights().iter().map(|l| q * l).collect(),
        Kind::Singular => vec![0.0; system.len()],
    };
    let spec = PressureFold { kind, s, letter_weights, surrogates, cone: cone.copied(), planar };
    let acc = fold_words(system, n, &spec, cfg)?;
    Ok(DepthSums {
        depth: n,
        exact: acc[0].value(),
        surrogate: spec.surrogates.iter().copied().zip(acc[1..].iter().map(|l| l.value())).collect(),
    })
}

/// `a_n / n`, a certified lower bound on `R_q`.
pub fn r_n(system: &MatrixSystem, p: &ProbabilityVector, q: f64, s: f64, n: usize, cfg: &ExecConfig) -> Result<f64> {
    check_q_inputs(system, p, q, s)?;
    Ok(depth_sums(system, Kind::Q { p, q }, s, n, false, None, cfg)?.exact_rate())
}

/// Certified upper bound on `R_q` from depth-`m` surrogate sums (2×2 only),
/// taking the tightest minorant.
pub fn r_upper(
    system: &MatrixSystem,
    p: &ProbabilityVector,
    q: f64,
    s: f64,
    m: usize,
    cfg: &ExecConfig,
) -> Result<f64> {
    Ok(r_bracket(system, p, q, s, m, cfg)?.upper)
}

/// Upper bound on `R_q` from a single minorant family.
pub fn r_upper_with(
    system: &MatrixSystem,
    p: &ProbabilityVector,
    q: f64,
    s: f64,
    m: usize,
    minorant: Minorant,
    cfg: &ExecConfig,
) -> Result<f64> {
    check_q_inputs(system, p, q, s)?;
    system.require_planar()?;
    let cone = if minorant == Minorant::ConeAntinorm {
        Some(system_cone(system).ok_or_else(|| invalid("no common invariant cone found"))?)
    } else {
        None
    };
    let sums = depth_sums(system, Kind::Q { p, q }, s, m, true, cone.as_ref(), cfg)?;
    let rate = sums
        .surrogate
        .iter()
        .filter(|(sg, _)| sg.minorant == minorant || s >= 2.0)
        .map(|(_, v)| v / m as f64)
        .fold(f64::INFINITY, f64::min);
    Ok(rate)
}

/// `R_n` and the surrogate upper bound from one enumeration at depth `n` (2×2 only).
pub fn r_bracket(
    system: &MatrixSystem,
    p: &ProbabilityVector,
    q: f64,
    s: f64,
    n: usize,
    cfg: &ExecConfig,
) -> Result<PressureBracket> {
    check_q_inputs(system, p, q, s)?;
    system.require_planar()?;
    let cone = system_cone(system);
    let kind = Kind::Q { p, q };
    let sums = depth_sums(system, kind, s, n, true, cone.as_ref(), cfg)?;
    let (minorant, upper) = sums.best_surrogate(&kind).expect("planar systems have surrogates");
    Ok(PressureBracket {
        depth: n,
        lower: sums.exact_rate(),
        upper,
        lower_certified: true,
        upper_certified: true,
        minorant: Some(minorant),
    })
}

/// `b_n / n`, a certified upper bound on `S`.
pub fn s_n(system: &MatrixSystem, s: f64, n: usize, cfg: &ExecConfig) -> Result<f64> {
    check_s(s)?;
    Ok(depth_sums(system, Kind::Singular, s, n, false, None, cfg)?.exact_rate())
}

/// Certified lower bound on `S` from depth-`m` surrogate sums (2×2 only).
pub fn s_lower(system: &MatrixSystem, s: f64, m: usize, cfg: &ExecConfig) -> Result<f64> {
    Ok(s_bracket(system, s, m, cfg)?.lower)
}

/// Surrogate lower bound and `S_n` upper bound from one enumeration (2×2 only).
pub fn s_bracket(system: &MatrixSystem, s: f64, n: usize, cfg: &ExecConfig) -> Result<PressureBracket> {
    check_s(s)?;
    system.require_planar()?;
    let cone = system_cone(system);
    let sums = depth_sums(system, Kind::Singular, s, n, true, cone.as_ref(), cfg)?;
    let (minorant, lower) = sums.best_surrogate(&Kind::Singular).expect("planar systems have surrogates");
    Ok(PressureBracket {
        depth: n,
        lower,
        upper: sums.exact_rate(),
        lower_certified: true,
        upper_certified: true,
        minorant: Some(minorant),
    })
}

/// Closed form of `R_q` for a conformal system `A_i = c_i·O_i`:
/// `log Σ c_i^{s(1−q)} p_i^q` (valid for `s ≤ d`).
pub fn conformal_r(ratios: &[f64], p: &ProbabilityVector, q: f64, s: f64) -> Result<f64> {
    if ratios.len() != p.len() {
        return Err(Error::InvalidParameter("one ratio per probability".into()));
    }
    Ok(ratios.iter().zip(p.weights()).map(|(c, w)| s * (1.0 - q) * c.ln() + q * w.ln()).collect::<LogSumExp>().value())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Matrix;

    fn commuting() -> MatrixSystem {
        MatrixSystem::new(vec![Matrix::diag(0.4, 0.05), Matrix::diag(0.4, 0.4)]).unwrap()
    }

    fn half() -> ProbabilityVector {
        ProbabilityVector::pair(0.5).unwrap()
    }

    #[test]
    fn commuting_pair_closed_form() {
        let cfg = ExecConfig::default();
        for n in [1, 3, 8] {
            let v = r_n(&commuting(), &half(), 2.0, 0.5, n, &cfg).unwrap();
            assert!((v - -0.2350018146228678).abs() < 1e-12, "{v}");
        }
        let root = 0.5f64.ln() / 0.4f64.ln();
        let v = r_n(&commuting(), &half(), 2.0, root, 4, &cfg).unwrap();
        assert!(v.abs() < 1e-12);
    }

    #[test]
    fn single_map() {
        let sys = MatrixSystem::new(vec![Matrix::diag(0.4, 0.05)]).unwrap();
        let p = ProbabilityVector::new(vec![1.0]).unwrap();
        let v = r_n(&sys, &p, 2.0, 1.0, 5, &ExecConfig::default()).unwrap();
        assert!((v - 0.9162907318741551).abs() < 1e-12);
        let v = s_n(&sys, 2.0, 3, &ExecConfig::default()).unwrap();
        assert!((v - 0.02f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn depth_one_smallest_singular_surrogate() {
        let v = r_upper_with(&commuting(), &half(), 2.0, 0.5, 1, Minorant::SmallestSingular, &ExecConfig::default())
            .unwrap();
        // the pure σ₂^s term gives 0.4143050512707128; blending with |det| can only help
        assert!(v <= 0.4143050512707128 + 1e-12, "{v}");
        assert!(v >= -0.2350018146228678);
        let pure = (0.25 * 0.05f64.powf(-0.5) + 0.25 * 0.4f64.powf(-0.5)).ln();
        assert!((pure - 0.4143050512707128).abs() < 1e-15);
    }

    #[test]
    fn cone_surrogate_is_exact_on_commuting_pair() {
        let b = r_bracket(&commuting(), &half(), 2.0, 0.5, 1, &ExecConfig::default()).unwrap();
        assert_eq!(b.minorant, Some(Minorant::ConeAntinorm));
        assert!((b.upper - b.lower).abs() < 1e-9, "{b:?}");
    }

    #[test]
    fn conformal_pressures_do_not_depend_on_depth() {
        let sys = MatrixSystem::new(vec![Matrix::rotation(0.3).scale(0.4), Matrix::rotation(-1.1).scale(0.4)]).unwrap();
        let p = ProbabilityVector::pair(0.3).unwrap();
        let want = conformal_r(&[0.4, 0.4], &p, 2.0, 0.8).unwrap();
        for n in [1, 2, 5] {
            let b = r_bracket(&sys, &p, 2.0, 0.8, n, &ExecConfig::default()).unwrap();
            assert!((b.lower - want).abs() < 1e-12);
            assert!((b.upper - want).abs() < 1e-12);
        }
        let s = s_bracket(&sys, 0.7564707973660301, 4, &ExecConfig::default()).unwrap();
        assert!(s.lower.abs() < 1e-12 && s.upper.abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_inputs() {
        let cfg = ExecConfig::default();
        assert!(r_n(&commuting(), &half(), 1.0, 0.5, 2, &cfg).is_err());
        assert!(r_n(&commuting(), &half(), 65.0, 0.5, 2, &cfg).is_err());
        assert!(r_n(&commuting(), &half(), 2.0, 0.0, 2, &cfg).is_err());
        let big = MatrixSystem::new(vec![Matrix::diag(1.2, 0.5), Matrix::diag(0.4, 0.4)]).unwrap();
        assert!(matches!(r_n(&big, &half(), 2.0, 0.5, 2, &cfg), Err(Error::NonContracting { .. })));
    }
}
