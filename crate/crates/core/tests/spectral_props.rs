mod common;

use common::{contracting_system, matrix2};
use fdl_core::spectral::{degenerate_perturbation, growth_witness, lsr_bracket};
use fdl_core::{mat_mul, ExecConfig, Matrix, MatrixSystem};
use proptest::prelude::*;

fn cfg(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, ..ProptestConfig::default() }
}

fn seq() -> ExecConfig {
    ExecConfig::default().with_threads(1)
}

fn inverse(m: &Matrix) -> Matrix {
    let d = m.det();
    Matrix::new(2, vec![m.get(1, 1) / d, -m.get(0, 1) / d, -m.get(1, 0) / d, m.get(0, 0) / d]).unwrap()
}

/// `P diag(μ, 1/μ) P⁻¹`: unit determinant, real distinct eigenvalues.
fn unit_hyperbolic() -> impl Strategy<Value = Matrix> {
    (matrix2(0.2), 1.5f64..4.0)
        .prop_map(|(p, mu)| mat_mul(&mat_mul(&p, &Matrix::diag(mu, 1.0 / mu)).unwrap(), &inverse(&p)).unwrap())
}

proptest! {
    #![proptest_config(cfg(500))]

    #[test]
    fn lsr_bracket_ordered_and_monotone(sys in (2usize..=3).prop_flat_map(contracting_system), n_max in 1usize..=7) {
        let short = lsr_bracket(&sys, n_max, &seq()).unwrap();
        let long = lsr_bracket(&sys, n_max + 1, &seq()).unwrap();
        prop_assert!(short.lower <= short.upper * (1.0 + 1e-12));
        prop_assert!(long.upper <= short.upper);
        prop_assert_eq!(long.lower, short.lower);
        for r in &long.rates {
            prop_assert!(long.upper <= r.rate);
        }
    }

    #[test]
    fn conformal_lsr_is_exact(
        ratios in prop::collection::vec(0.05f64..0.95, 2..=3),
        angles in prop::collection::vec(0.0f64..6.3, 3),
        n_max in 1usize..=6,
    ) {
        let maps = ratios.iter().zip(&angles).map(|(r, a)| Matrix::rotation(*a).scale(*r)).collect();
        let sys = MatrixSystem::new(maps).unwrap();
        let b = lsr_bracket(&sys, n_max, &seq()).unwrap();
        let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
        prop_assert!((b.lower - min).abs() <= 1e-12 * min);
        prop_assert!((b.upper - min).abs() <= 1e-12 * min);
    }

    #[test]
    fn perturbation_transfers_eigendirection(h in unit_hyperbolic(), k in 1u32..=8) {
        let pert = degenerate_perturbation(&h, k, None).unwrap();
        prop_assert!(pert.residual <= 1e-10);
        prop_assert!(pert.unit_determinant);
        prop_assert!(pert.bounded, "growth {:?}", pert.growth.last());
        prop_assert!(pert.theta > 0.0 && pert.theta < std::f64::consts::PI);
    }

    #[test]
    fn growth_with_identity_insertion(b in matrix2(0.05), k in 0u64..6, n_max in 1u64..=30) {
        let series = growth_witness(&b, &Matrix::identity(2).unwrap(), k, n_max).unwrap();
        prop_assert_eq!(series.points.len() as u64, n_max);
        for pt in &series.points {
            let direct = b.pow(2 * pt.n as u32).norm().powf(1.0 / (2 * pt.n + k) as f64);
            prop_assert!((pt.value - direct).abs() <= 1e-9 * direct.max(1.0), "n={} {} vs {direct}", pt.n, pt.value);
        }
    }
}
