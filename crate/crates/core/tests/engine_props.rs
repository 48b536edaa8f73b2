mod common;

use common::contracting_system;
use fdl_core::engine::{admissible_words, min_norm, min_norm_with, resistance_check};
use fdl_core::{ExecConfig, Matrix, MatrixSystem};
use proptest::prelude::*;

fn cfg(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, ..ProptestConfig::default() }
}

/// All words of length `n` over `{0, …, letters−1}`, lexicographic.
fn all_words(letters: usize, n: usize) -> impl Iterator<Item = Vec<usize>> {
    (0..letters.pow(n as u32)).map(move |mut i| {
        let mut w = vec![0; n];
        for slot in w.iter_mut().rev() {
            *slot = i % letters;
            i /= letters;
        }
        w
    })
}

fn sl_pair() -> impl Strategy<Value = MatrixSystem> {
    // a hyperbolic map and a rotation-like map, both with determinant one
    (1.1f64..3.0, -1.0f64..1.0, 0.05f64..3.0).prop_map(|(lam, shear, angle)| {
        let h = Matrix::from_rows(&[vec![lam, shear], vec![0.0, 1.0 / lam]]).unwrap();
        MatrixSystem::new(vec![h, Matrix::rotation(angle)]).unwrap()
    })
}

proptest! {
    #![proptest_config(cfg(1_000))]

    #[test]
    fn pruned_search_matches_exhaustive(
        sys in (2usize..=3).prop_flat_map(contracting_system),
        depth in 1usize..=12,
        hint in prop::option::of(0.0f64..1.0),
    ) {
        let depth = if sys.len() == 3 { depth.min(8) } else { depth };
        let c = ExecConfig::default().with_threads(1);
        let pruned = min_norm(&sys, depth, hint, &c).unwrap();
        let full = min_norm_with(&sys, depth, None, false, &c).unwrap();
        prop_assert_eq!(pruned.value.to_bits(), full.value.to_bits());
        prop_assert_eq!(&pruned.witness, &full.witness);
        prop_assert!(pruned.leaves <= full.leaves);
        prop_assert_eq!(full.leaves, (sys.len() as u64).pow(depth as u32));
    }

    #[test]
    fn min_norm_submultiplicative(sys in contracting_system(2), n in 1usize..=8, m in 1usize..=8) {
        let c = ExecConfig::default().with_threads(1);
        let v = |k| min_norm(&sys, k, None, &c).unwrap().value.ln();
        prop_assert!(v(n + m) <= v(n) + v(m) + 1e-9);
    }

    #[test]
    fn min_norm_witness_attains_value(sys in contracting_system(2), n in 1usize..=10) {
        let c = ExecConfig::default().with_threads(1);
        let r = min_norm(&sys, n, None, &c).unwrap();
        let direct = r.witness.product(&sys).unwrap().norm();
        prop_assert!((direct - r.value).abs() <= 1e-12 * r.value);
    }
}

proptest! {
    #![proptest_config(cfg(300))]

    #[test]
    fn resistance_matches_enumeration(
        pair in sl_pair(),
        eps in 0.05f64..0.6,
        c in 0.01f64..1.0,
        lam in 1.01f64..2.0,
        n_max in 1usize..=12,
    ) {
        let report = resistance_check(&pair, c, eps, lam, n_max, &ExecConfig::default()).unwrap();
        prop_assert_eq!(report.rows.len(), n_max);
        for row in &report.rows {
            let k = (eps * row.n as f64).floor() as usize;
            let (mut best, mut count) = (f64::INFINITY, 0u64);
            for w in all_words(2, row.n).filter(|w| w.iter().filter(|&&l| l == 1).count() <= k) {
                count += 1;
                best = best.min(pair.product(&w).unwrap().norm());
            }
            let ratio = best / lam.powi(row.n as i32);
            prop_assert_eq!(row.words, count);
            prop_assert_eq!(count as u128, admissible_words(row.n, k));
            prop_assert!((row.min_ratio - ratio).abs() <= 1e-10 * ratio);
            prop_assert!(row.witness.letters().iter().filter(|&&l| l == 1).count() <= k);
            // borderline ratios may flip under rounding; skip those
            if (ratio - c).abs() > 1e-9 * c {
                prop_assert_eq!(row.passes, ratio >= c);
            }
        }
        prop_assert_eq!(report.verdict(), report.rows.iter().all(|r| r.passes));
    }
}
