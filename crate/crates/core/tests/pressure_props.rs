mod common;

use common::{contracting_system, positive_system};
use fdl_core::engine::min_norm;
use fdl_core::pressure::{r_bracket, r_n, s_bracket, s_n, ProbabilityVector};
use fdl_core::{ExecConfig, MatrixSystem};
use proptest::prelude::*;

fn seq() -> ExecConfig {
    ExecConfig::default().with_threads(1)
}

fn cfg(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, ..ProptestConfig::default() }
}

fn probs(n: usize) -> impl Strategy<Value = ProbabilityVector> {
    prop::collection::vec(0.05f64..1.0, n).prop_map(|w| {
        let t: f64 = w.iter().sum();
        ProbabilityVector::new(w.iter().map(|x| x / t).collect()).unwrap()
    })
}

fn system_with_probs() -> impl Strategy<Value = (MatrixSystem, ProbabilityVector)> {
    (2usize..=3).prop_flat_map(|n| (contracting_system(n), probs(n)))
}

proptest! {
    #![proptest_config(cfg(2_000))]

    #[test]
    fn s_bracket_ordered(sys in contracting_system(2), s in 0.05f64..2.5, n in 1usize..=8, m in 1usize..=8) {
        let b = s_bracket(&sys, s, n, &seq()).unwrap();
        prop_assert!(b.lower <= b.upper + 1e-9);
        let up = s_n(&sys, s, m, &seq()).unwrap();
        prop_assert!(b.lower <= up + 1e-9);
    }

    #[test]
    fn cone_surrogate_still_a_bound(
        sys in positive_system(2),
        p in probs(2),
        q in 1.05f64..4.0,
        s in 0.05f64..2.0,
        n in 1usize..=6,
        m in 1usize..=6,
    ) {
        let lower = r_n(&sys, &p, q, s, n, &seq()).unwrap();
        let b = r_bracket(&sys, &p, q, s, m, &seq()).unwrap();
        prop_assert!(lower <= b.upper + 1e-9);
    }

    /// Finite-depth sandwich between `R_n` and the smallest depth-`n` norm, for `s ≤ 1`.
    #[test]
    fn r_n_sandwiched_by_min_norm(
        (sys, p) in system_with_probs(),
        q in 1.05f64..4.0,
        s in 0.05f64..=1.0,
        n in 1usize..=8,
    ) {
        let rn = r_n(&sys, &p, q, s, n, &seq()).unwrap();
        let upper_n = min_norm(&sys, n, None, &seq()).unwrap().value.powf(1.0 / n as f64);
        let w = p.weights();
        let pmin = w.iter().copied().fold(1.0, f64::min);
        let pmax = w.iter().copied().fold(0.0, f64::max);
        let core = s * (1.0 - q) * upper_n.ln();
        prop_assert!(q * pmin.ln() + core - 1e-9 <= rn);
        prop_assert!(rn <= (sys.len() as f64).ln() + q * pmax.ln() + core + 1e-9);
    }
}
