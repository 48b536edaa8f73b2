#![allow(dead_code)]

use fdl_core::{Matrix, MatrixSystem};
use proptest::prelude::*;

/// Random 2×2 matrix with entries in `[-1, 1]` and smallest singular value above `floor`.
pub fn matrix2(floor: f64) -> impl Strategy<Value = Matrix> {
    prop::array::uniform4(-1.0f64..1.0)
        .prop_map(|e| Matrix::new(2, e.to_vec()).unwrap())
        .prop_filter("near-singular", move |m| m.min_singular() > floor)
}

pub fn matrix3(floor: f64) -> impl Strategy<Value = Matrix> {
    prop::collection::vec(-1.0f64..1.0, 9)
        .prop_map(|e| Matrix::new(3, e).unwrap())
        .prop_filter("near-singular", move |m| m.min_singular() > floor)
}

/// A matrix rescaled so its operator norm is `target`.
pub fn with_norm(m: &Matrix, target: f64) -> Matrix {
    m.scale(target / m.norm())
}

/// A contracting planar system of `n` maps with norms in `[0.2, 0.9]`.
pub fn contracting_system(n: usize) -> impl Strategy<Value = MatrixSystem> {
    prop::collection::vec((matrix2(0.05), 0.2f64..0.9), n)
        .prop_map(|ms| MatrixSystem::new(ms.iter().map(|(m, r)| with_norm(m, *r)).collect()).unwrap())
}

/// A planar system of `n` maps with positive entries (sharing the first quadrant as invariant cone).
pub fn positive_system(n: usize) -> impl Strategy<Value = MatrixSystem> {
    prop::collection::vec((prop::array::uniform4(0.05f64..1.0), 0.2f64..0.9), n).prop_filter_map(
        "near-singular",
        |ms| {
            let maps: Vec<Matrix> =
                ms.iter().map(|(e, r)| with_norm(&Matrix::new(2, e.to_vec()).unwrap(), *r)).collect();
            MatrixSystem::new(maps).ok()
        },
    )
}

pub fn rel_le(a: f64, b: f64, tol: f64) -> bool {
    a <= b + tol * b.abs().max(a.abs()).max(1e-300)
}
