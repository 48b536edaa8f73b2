//! Small dense real matrices, singular values and the singular value function.
//!
//! Everything here is sized for the 2×2 systems the rest of the crate works
//! with, but `Matrix` holds any `d ≥ 2`. The 2×2 paths use closed forms; larger
//! matrices fall back to a symmetric eigensolve of `AᵀA`.

use std::fmt;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A `d × d` real matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    dim: usize,
    data: Vec<f64>,
}

impl Matrix {
    /// Builds a matrix from row-major entries. Rejects `d < 2`, ragged input and
    /// non-finite entries.
    pub fn new(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidDimension(dim));
        }
        if data.len() != dim * dim {
            return Err(Error::InvalidParameter(format!(
                "expected {} entries for a {dim}x{dim} matrix, got {}",
                dim * dim,
                data.len()
            )));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Matrix { dim, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::InvalidParameter("matrix rows must form a square array".into()));
        }
        Matrix::new(dim, rows.iter().flatten().copied().collect())
    }

    pub fn identity(dim: usize) -> Result<Self> {
        Matrix::diagonal(&vec![1.0; dim])
    }

    pub fn diagonal(entries: &[f64]) -> Result<Self> {
        let dim = entries.len();
        let mut data = vec![0.0; dim * dim];
        for (i, &x) in entries.iter().enumerate() {
            data[i * dim + i] = x;
        }
        Matrix::new(dim, data)
    }

    /// 2×2 diagonal matrix `diag(a, b)`.
    pub fn diag(a: f64, b: f64) -> Self {
        Matrix::diagonal(&[a, b]).expect("finite diagonal entries")
    }

    /// Counter-clockwise rotation of the plane through `theta` radians.
    pub fn rotation(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Matrix { dim: 2, data: vec![c, -s, s, c] }
    }

    /// `[[0, -1], [1, 0]]`, the quarter turn, with exact zeros.
    pub fn quarter_turn() -> Self {
        Matrix { dim: 2, data: vec![0.0, -1.0, 1.0, 0.0] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.dim + col]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.dim).map(|r| r.to_vec()).collect()
    }

    pub fn scale(&self, factor: f64) -> Matrix {
        Matrix { dim: self.dim, data: self.data.iter().map(|x| x * factor).collect() }
    }

    pub fn transpose(&self) -> Matrix {
        let d = self.dim;
        let mut data = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..d {
                data[j * d + i] = self.data[i * d + j];
            }
        }
        Matrix { dim: d, data }
    }

    pub fn sub(&self, other: &Matrix) -> Result<Matrix> {
        check_dims(self, other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Ok(Matrix { dim: self.dim, data })
    }

    /// Matrix product `self · rhs`.
    pub fn mul(&self, rhs: &Matrix) -> Result<Matrix> {
        check_dims(self, rhs)?;
        let mut out = Matrix { dim: self.dim, data: vec![0.0; self.data.len()] };
        self.mul_into(rhs, &mut out);
        Ok(out)
    }

    /// Writes `self · rhs` into `out`. All three must share a dimension.
    pub(crate) fn mul_into(&self, rhs: &Matrix, out: &mut Matrix) {
        let d = self.dim;
        debug_assert!(rhs.dim == d && out.dim == d);
        if d == 2 {
            let [a, b, c, e] = [self.data[0], self.data[1], self.data[2], self.data[3]];
            let [p, q, r, t] = [rhs.data[0], rhs.data[1], rhs.data[2], rhs.data[3]];
            out.data[0] = a * p + b * r;
            out.data[1] = a * q + b * t;
            out.data[2] = c * p + e * r;
            out.data[3] = c * q + e * t;
            return;
        }
        for i in 0..d {
            for j in 0..d {
                let mut acc = 0.0;
                for k in 0..d {
                    acc += self.data[i * d + k] * rhs.data[k * d + j];
                }
                out.data[i * d + j] = acc;
            }
        }
    }

    /// `self^n` by left-folded repeated multiplication (`n = 0` gives the identity).
    pub fn pow(&self, n: u32) -> Matrix {
        let mut acc = Matrix::identity(self.dim).expect("dim >= 2");
        let mut tmp = acc.clone();
        for _ in 0..n {
            acc.mul_into(self, &mut tmp);
            std::mem::swap(&mut acc, &mut tmp);
        }
        acc
    }

    pub fn det(&self) -> f64 {
        if self.dim == 2 {
            return det2(&self.data);
        }
        nalgebra::DMatrix::from_row_slice(self.dim, self.dim, &self.data).determinant()
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum()
    }

    pub fn singular_values(&self) -> SingularValues {
        if self.dim == 2 {
            let (s1, s2) = singular_values_2x2(&self.data);
            return SingularValues { values: vec![s1, s2] };
        }
        let a = nalgebra::DMatrix::from_row_slice(self.dim, self.dim, &self.data);
        let ata = a.transpose() * &a;
        let eig = nalgebra::SymmetricEigen::new(ata);
        let mut values: Vec<f64> = eig.eigenvalues.iter().map(|&l| l.max(0.0).sqrt()).collect();
        values.sort_by(|x, y| y.total_cmp(x));
        SingularValues { values }
    }

    /// Operator (spectral) norm, `σ₁`.
    pub fn norm(&self) -> f64 {
        if self.dim == 2 {
            return singular_values_2x2(&self.data).0;
        }
        self.singular_values().values[0]
    }

    pub fn min_singular(&self) -> f64 {
        if self.dim == 2 {
            return singular_values_2x2(&self.data).1;
        }
        *self.singular_values().values.last().unwrap()
    }

    /// The singular value function `φ^s`.
    pub fn phi(&self, s: f64) -> Result<f64> {
        Ok(self.log_phi(s)?.exp())
    }

    /// `log φ^s`, `-∞` when a singular value with positive exponent vanishes.
    pub fn log_phi(&self, s: f64) -> Result<f64> {
        if !(s > 0.0) || !s.is_finite() {
            return Err(Error::InvalidParameter(format!("phi needs s > 0, got {s}")));
        }
        let log_sv: Vec<f64> = self.singular_values().values.iter().map(|v| v.ln()).collect();
        Ok(log_phi_from_parts(&log_sv, self.det().abs().ln(), s))
    }

    /// True for `c·I`.
    pub fn is_scalar(&self) -> bool {
        let d = self.dim;
        let c = self.data[0];
        (0..d).all(|i| (0..d).all(|j| self.data[i * d + j] == if i == j { c } else { 0.0 }))
    }

    /// For 2×2 matrices of the form `c·rotation(θ)` returns `(c, θ)` with `c > 0`.
    pub fn as_scaled_rotation(&self) -> Option<(f64, f64)> {
        if self.dim != 2 {
            return None;
        }
        let [a, b, c, d] = [self.data[0], self.data[1], self.data[2], self.data[3]];
        if a != d || b != -c || (a == 0.0 && c == 0.0) {
            return None;
        }
        Some((a.hypot(c), c.atan2(a)))
    }
}

/// `log φ^s` from `log σ₁ ≥ … ≥ log σ_d` and `log |det|`.
///
/// Uses `k = ⌊s⌋` for `s < d` and the determinant branch for `s ≥ d`; at integer
/// `s` the exponent on `σ_{k+1}` is zero and that factor is skipped.
pub fn log_phi_from_parts(log_sv: &[f64], log_abs_det: f64, s: f64) -> f64 {
    let d = log_sv.len();
    if s >= d as f64 {
        return s / d as f64 * log_abs_det;
    }
    let k = s.floor() as usize;
    let frac = s - k as f64;
    let mut acc: f64 = log_sv[..k].iter().sum();
    if frac > 0.0 {
        acc += frac * log_sv[k];
    }
    acc
}

/// 2×2 specialisation of [`log_phi_from_parts`].
#[inline]
pub fn log_phi_2x2(log_s1: f64, log_abs_det: f64, s: f64) -> f64 {
    if s <= 1.0 {
        s * log_s1
    } else if s < 2.0 {
        // σ₁ σ₂^{s−1} with log σ₂ = log|det| − log σ₁
        log_s1 + (s - 1.0) * (log_abs_det - log_s1)
    } else {
        0.5 * s * log_abs_det
    }
}

/// Singular values sorted non-increasing.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingularValues {
    pub values: Vec<f64>,
}

impl SingularValues {
    pub fn largest(&self) -> f64 {
        self.values[0]
    }

    pub fn smallest(&self) -> f64 {
        *self.values.last().unwrap()
    }

    pub fn product(&self) -> f64 {
        self.values.iter().product()
    }
}

/// `a·b` with dimension check.
pub fn mat_mul(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    a.mul(b)
}

/// Left fold `((A₁A₂)A₃)⋯` of a non-empty sequence of matrices.
pub fn product<'a>(factors: impl IntoIterator<Item = &'a Matrix>) -> Result<Matrix> {
    let mut it = factors.into_iter();
    let first = it.next().ok_or_else(|| Error::InvalidParameter("empty product".into()))?;
    it.try_fold(first.clone(), |acc, m| acc.mul(m))
}

fn check_dims(a: &Matrix, b: &Matrix) -> Result<()> {
    if a.dim != b.dim {
        return Err(Error::DimensionMismatch { left: a.dim, right: b.dim });
    }
    Ok(())
}

/// Determinant of a row-major 2×2 with the fma error-compensated product difference.
#[inline]
pub(crate) fn det2(m: &[f64]) -> f64 {
    let (a, b, c, d) = (m[0], m[1], m[2], m[3]);
    let w = b * c;
    let e = (-b).mul_add(c, w);
    let f = a.mul_add(d, -w);
    f + e
}

/// `(σ₁, σ₂)` of a row-major 2×2.
///
/// `σ₁ = (‖(a+d, b−c)‖ + ‖(a−d, b+c)‖)/2` needs no subtraction; `σ₂ = |det|/σ₁`.
#[inline]
pub(crate) fn singular_values_2x2(m: &[f64]) -> (f64, f64) {
    let (a, b, c, d) = (m[0], m[1], m[2], m[3]);
    let s1 = 0.5 * ((a + d).hypot(b - c) + (a - d).hypot(b + c));
    if s1 == 0.0 {
        return (0.0, 0.0);
    }
    let s2 = (det2(m).abs() / s1).min(s1);
    (s1, s2)
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.rows())
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", serde_json::to_string(self).map_err(|_| fmt::Error)?)
    }
}

impl Serialize for Matrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.rows().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Matrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(deserializer)?;
        Matrix::from_rows(&rows).map_err(D::Error::custom)
    }
}
