//! Certified brackets for the zero of a monotone pressure.
//!
//! The search runs on the dyadic grid `s_i = i·h` over `(0, 2d]`, with
//! `h = 2d / 2^K ≤ tol`. At each probed `s` the pressure is bounded from both
//! sides at growing depths until its sign is certain or the schedule runs
//! out. Two monotone predicates are binary searched separately:
//! "the root is at least `s`" and "the root is at most `s`". Points where
//! neither could be certified are reported rather than guessed.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::cone::Antinorm;
use crate::engine::{ExecConfig, MatrixSystem};
use crate::error::{invalid, Error, Result};
use crate::pressure::finite::{check_q, depth_sums, system_cone, Kind};
use crate::pressure::witness::{default_families, WitnessFamily, WitnessTable};
use crate::pressure::ProbabilityVector;

pub const DEFAULT_TOL: f64 = 1e-4;
pub const MIN_TOL: f64 = 1e-6;
/// The probes tried before bisection starts.
pub const INITIAL_PROBES: [f64; 5] = [0.25, 0.5, 1.0, 1.5, 2.0];

#[derive(Clone, Debug, PartialEq)]
pub struct SolverOptions {
    pub tol: f64,
    pub exec: ExecConfig,
    /// Deepest enumeration tried at a probe; `None` means as deep as the budget allows.
    pub max_depth: Option<usize>,
    /// Use long-word lower bounds on the q-pressure.
    pub witnesses: bool,
    /// Families tried in addition to the defaults.
    pub extra_witnesses: Vec<WitnessFamily>,
    /// Largest inner exponent `k` in the default sandwich families.
    pub witness_inner: u64,
    /// Families are evaluated at `n = 2^j` for `j ≤ witness_max_exp`.
    pub witness_max_exp: u32,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: DEFAULT_TOL,
            exec: ExecConfig::default(),
            max_depth: None,
            witnesses: true,
            extra_witnesses: Vec::new(),
            witness_inner: 8,
            witness_max_exp: 30,
        }
    }
}

impl SolverOptions {
    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_max_depth(mut self, depth: usize) -> Self {
        self.max_depth = Some(depth);
        self
    }

    /// Enumeration depths `1, 2, 4, …` capped by the budget, ending at the cap.
    pub fn depth_schedule(&self, n_letters: usize) -> Vec<usize> {
        let mut cap = self.exec.max_depth.min(self.max_depth.unwrap_or(usize::MAX));
        while cap > 1 && self.exec.check(n_letters, cap).is_err() {
            cap -= 1;
        }
        let mut out = Vec::new();
        let mut n = 1;
        while n < cap {
            out.push(n);
            n *= 2;
        }
        out.push(cap.max(1));
        out
    }
}

/// Sign of the pressure at a probe.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PressureSign {
    Negative,
    Positive,
    Undetermined,
}

/// Record of one probe.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Probe {
    pub s: f64,
    pub sign: PressureSign,
    /// Deepest enumeration used (0 when a long witness word alone decided).
    pub depth: usize,
    pub pressure_lower: f64,
    pub pressure_upper: f64,
    /// Long word that supplied the lower bound, when it did.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

/// A certified interval around a dimension.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DimensionBracket {
    pub lower: f64,
    pub upper: f64,
    /// `upper − lower ≤ tol`.
    pub resolved: bool,
    pub tol: f64,
    pub grid_step: f64,
    /// Probes in the order they were made.
    pub trace: Vec<Probe>,
    /// Probes whose sign stayed undetermined at the deepest depth.
    pub undetermined: Vec<f64>,
}

impl DimensionBracket {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }
}

/// Where a probe lies relative to the root.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Side {
    /// Root `≥ s`.
    Below,
    /// Root `≤ s`.
    Above,
    Unknown,
}

trait Oracle {
    fn probe(&mut self, s: f64) -> Result<Probe>;
    fn side(&self, sign: PressureSign) -> Side;
}

struct QOracle<'a> {
    system: &'a MatrixSystem,
    p: &'a ProbabilityVector,
    q: f64,
    cone: Option<Antinorm>,
    witnesses: Option<WitnessTable>,
    schedule: Vec<usize>,
    exec: ExecConfig,
}

impl Oracle for QOracle<'_> {
    fn probe(&mut self, s: f64) -> Result<Probe> {
        let kind = Kind::Q { p: self.p, q: self.q };
        let mut lower = f64::NEG_INFINITY;
        let mut upper = f64::INFINITY;
        let mut witness = None;
        if let Some(w) = self.witnesses.as_ref().and_then(|t| t.lower_bound(self.p, self.q, s)) {
            lower = w.value;
            witness = Some(format!("{} at n = {}", w.family, w.n));
            if lower > 0.0 {
                return Ok(Probe {
                    s,
                    sign: PressureSign::Positive,
                    depth: 0,
                    pressure_lower: lower,
                    pressure_upper: upper,
                    witness,
                });
            }
        }
        let mut depth = 0;
        for &n in &self.schedule {
            depth = n;
            let sums = depth_sums(self.system, kind, s, n, true, self.cone.as_ref(), &self.exec)?;
            if sums.exact_rate() > lower {
                lower = sums.exact_rate();
                witness = None;
            }
            if let Some((_, u)) = sums.best_surrogate(&kind) {
                upper = upper.min(u);
            }
            if lower > 0.0 || upper < 0.0 {
                break;
            }
        }
        let sign = sign_of(lower, upper);
        Ok(Probe { s, sign, depth, pressure_lower: lower, pressure_upper: upper, witness })
    }

    fn side(&self, sign: PressureSign) -> Side {
        // increasing pressure: negative means the root lies further right
        match sign {
            PressureSign::Negative => Side::Below,
            PressureSign::Positive => Side::Above,
            PressureSign::Undetermined => Side::Unknown,
        }
    }
}

struct SOracle<'a> {
    system: &'a MatrixSystem,
    cone: Option<Antinorm>,
    schedule: Vec<usize>,
    exec: ExecConfig,
}

impl Oracle for SOracle<'_> {
    fn probe(&mut self, s: f64) -> Result<Probe> {
        let kind = Kind::Singular;
        let mut lower = f64::NEG_INFINITY;
        let mut upper = f64::INFINITY;
        let mut depth = 0;
        for &n in &self.schedule {
            depth = n;
            let sums = depth_sums(self.system, kind, s, n, true, self.cone.as_ref(), &self.exec)?;
            upper = upper.min(sums.exact_rate());
            if let Some((_, l)) = sums.best_surrogate(&kind) {
                lower = lower.max(l);
            }
            if lower > 0.0 || upper < 0.0 {
                break;
            }
        }
        Ok(Probe { s, sign: sign_of(lower, upper), depth, pressure_lower: lower, pressure_upper: upper, witness: None })
    }

    fn side(&self, sign: PressureSign) -> Side {
        // decreasing pressure: positive means the root lies further right
        match sign {
            PressureSign::Positive => Side::Below,
            PressureSign::Negative => Side::Above,
            PressureSign::Undetermined => Side::Unknown,
        }
    }
}

fn sign_of(lower: f64, upper: f64) -> PressureSign {
    if lower > 0.0 {
        PressureSign::Positive
    } else if upper < 0.0 {
        PressureSign::Negative
    } else {
        PressureSign::Undetermined
    }
}

fn check_tol(tol: f64) -> Result<()> {
    if !(tol >= MIN_TOL) || !tol.is_finite() {
        return Err(invalid(format!("tol must be at least {MIN_TOL}, got {tol}")));
    }
    Ok(())
}

/// Certified bracket for `𝔯_q`, the zero of the increasing q-pressure (2×2 systems).
pub fn q_dimension(system: &MatrixSystem, p: &ProbabilityVector, q: f64, tol: f64) -> Result<DimensionBracket> {
    q_dimension_with(system, p, q, &SolverOptions::default().with_tol(tol))
}

pub fn q_dimension_with(
    system: &MatrixSystem,
    p: &ProbabilityVector,
    q: f64,
    opts: &SolverOptions,
) -> Result<DimensionBracket> {
    system.require_contracting()?;
    system.require_planar()?;
    check_q(q)?;
    check_tol(opts.tol)?;
    if p.len() != system.len() {
        return Err(invalid(format!("{} probabilities for {} maps", p.len(), system.len())));
    }
    let witnesses = if opts.witnesses {
        let mut fams = default_families(system.len(), opts.witness_inner);
        fams.extend(opts.extra_witnesses.iter().cloned());
        Some(WitnessTable::build(system, fams, opts.witness_max_exp)?)
    } else {
        None
    };
    let mut oracle = QOracle {
        system,
        p,
        q,
        cone: system_cone(system),
        witnesses,
        schedule: opts.depth_schedule(system.len()),
        exec: opts.exec,
    };
    bisect(&mut oracle, system.dim(), opts.tol)
}

/// Upper bound on `𝔯_q` certified by a single long word.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessUpper {
    pub upper: f64,
    /// Lower bound on the q-pressure at `upper`; positive.
    pub pressure_lower: f64,
    pub witness: String,
}

/// Least `s` (to within `1e-12`) at which some witness family forces the
/// q-pressure positive. No enumeration is done, so this is cheap even when the
/// full solver cannot settle the lower side. `None` when no family turns
/// positive below `2d`.
pub fn q_dimension_witness_upper(
    system: &MatrixSystem,
    p: &ProbabilityVector,
    q: f64,
    opts: &SolverOptions,
) -> Result<Option<WitnessUpper>> {
    system.require_contracting()?;
    system.require_planar()?;
    check_q(q)?;
    if p.len() != system.len() {
        return Err(invalid(format!("{} probabilities for {} maps", p.len(), system.len())));
    }
    let mut fams = default_families(system.len(), opts.witness_inner);
    fams.extend(opts.extra_witnesses.iter().cloned());
    let table = WitnessTable::build(system, fams, opts.witness_max_exp)?;
    let positive = |s: f64| table.lower_bound(p, q, s).filter(|w| w.value > 0.0);
    let mut hi = 2.0 * system.dim() as f64;
    let Some(mut best) = positive(hi) else {
        return Ok(None);
    };
    let mut lo = 0.0;
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        match positive(mid) {
            Some(w) => {
                hi = mid;
                best = w;
            }
            None => lo = mid,
        }
    }
    Ok(Some(WitnessUpper {
        upper: hi,
        pressure_lower: best.value,
        witness: format!("{} at n = {}", best.family, best.n),
    }))
}

/// Certified bracket for the affinity dimension `min{𝔰, d}` (2×2 systems).
pub fn affinity_dimension(system: &MatrixSystem, tol: f64) -> Result<DimensionBracket> {
    affinity_dimension_with(system, &SolverOptions::default().with_tol(tol))
}

pub fn affinity_dimension_with(system: &MatrixSystem, opts: &SolverOptions) -> Result<DimensionBracket> {
    system.require_contracting()?;
    system.require_planar()?;
    check_tol(opts.tol)?;
    let mut oracle =
        SOracle { system, cone: system_cone(system), schedule: opts.depth_schedule(system.len()), exec: opts.exec };
    let mut b = bisect(&mut oracle, system.dim(), opts.tol)?;
    let d = system.dim() as f64;
    b.lower = b.lower.min(d);
    b.upper = b.upper.min(d);
    b.resolved = b.undetermined.is_empty() && b.width() <= opts.tol;
    Ok(b)
}

fn bisect(oracle: &mut dyn Oracle, dim: usize, tol: f64) -> Result<DimensionBracket> {
    let span = 2.0 * dim as f64;
    let levels = (span / tol).log2().ceil().max(0.0) as u32;
    if levels > 40 {
        return Err(Error::InvalidParameter("tolerance too fine".into()));
    }
    let top: u64 = 1 << levels;
    let h = span / top as f64;

    let mut cache: BTreeMap<u64, Probe> = BTreeMap::new();
    let mut trace = Vec::new();
    let mut eval = |i: u64, trace: &mut Vec<Probe>| -> Result<Side> {
        if let Some(p) = cache.get(&i) {
            return Ok(oracle.side(p.sign));
        }
        let probe = oracle.probe(i as f64 * h)?;
        let side = oracle.side(probe.sign);
        trace.push(probe.clone());
        cache.insert(i, probe);
        Ok(side)
    };

    // lo: largest index known Below (0 is trivially so); hi: smallest known Above
    let mut lo: u64 = 0;
    let mut hi: u64 = top + 1;
    let initial = INITIAL_PROBES.iter().copied().chain(std::iter::once(span));
    for s in initial {
        let i = (s / h).round() as u64;
        if i == 0 || i > top || i <= lo || i >= hi {
            continue;
        }
        match eval(i, &mut trace)? {
            Side::Below => lo = lo.max(i),
            Side::Above => hi = hi.min(i),
            Side::Unknown => {}
        }
    }
    // largest Below
    let (mut a, mut b) = (lo, hi);
    while b - a > 1 {
        let mid = a + (b - a) / 2;
        match eval(mid, &mut trace)? {
            Side::Below => a = mid,
            Side::Above => {
                b = mid;
                hi = hi.min(mid);
            }
            Side::Unknown => b = mid,
        }
    }
    lo = a;
    // smallest Above
    let (mut a, mut b) = (lo, hi);
    while b - a > 1 {
        let mid = a + (b - a) / 2;
        match eval(mid, &mut trace)? {
            Side::Above => b = mid,
            _ => a = mid,
        }
    }
    hi = b;

    let lower = lo as f64 * h;
    let upper = hi.min(top) as f64 * h;
    let undetermined: Vec<f64> = trace.iter().filter(|p| p.sign == PressureSign::Undetermined).map(|p| p.s).collect();
    let certified_top = hi <= top;
    Ok(DimensionBracket {
        lower,
        upper,
        resolved: certified_top && undetermined.is_empty() && upper - lower <= tol,
        tol,
        grid_step: h,
        trace,
        undetermined,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Matrix;

    #[test]
    fn schedule_respects_budget() {
        let opts = SolverOptions::default();
        assert_eq!(opts.depth_schedule(2), vec![1, 2, 4, 8, 16, 26]);
        assert_eq!(opts.clone().with_max_depth(16).depth_schedule(2), vec![1, 2, 4, 8, 16]);
        assert_eq!(opts.depth_schedule(3), vec![1, 2, 4, 8, 16]);
    }

    #[test]
    fn commuting_pair() {
        let sys = MatrixSystem::new(vec![Matrix::diag(0.4, 0.05), Matrix::diag(0.4, 0.4)]).unwrap();
        let p = ProbabilityVector::pair(0.5).unwrap();
        let b = q_dimension(&sys, &p, 2.0, 1e-4).unwrap();
        assert!(b.resolved, "{b:?}");
        assert!(b.contains(0.7564707973660301));
        assert!(b.width() <= 1e-4);
    }

    #[test]
    fn moran_pair() {
        let sys = MatrixSystem::new(vec![Matrix::diag(0.4, 0.4), Matrix::rotation(1.0).scale(0.4)]).unwrap();
        let b = affinity_dimension(&sys, 1e-4).unwrap();
        assert!(b.resolved && b.contains(0.7564707973660301), "{b:?}");
    }

    #[test]
    fn single_map_has_zero_affinity_dimension() {
        let sys = MatrixSystem::new(vec![Matrix::diag(0.4, 0.05)]).unwrap();
        let b = affinity_dimension(&sys, 1e-4).unwrap();
        assert_eq!(b.lower, 0.0);
        assert!(b.upper <= 1e-4 && b.resolved);
    }

    #[test]
    fn rejects_tiny_tol() {
        let sys = MatrixSystem::new(vec![Matrix::diag(0.4, 0.4)]).unwrap();
        assert!(affinity_dimension(&sys, 1e-7).is_err());
    }
}
