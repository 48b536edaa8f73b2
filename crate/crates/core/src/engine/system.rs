use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Maps with singular values at or below this are treated as singular.
pub const INVERTIBILITY_FLOOR: f64 = 1e-14;

/// An ordered tuple `(A₁, …, A_N)` of invertible matrices of a common dimension,
/// with cached norms and smallest singular values.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MatrixSystem {
    maps: Vec<Matrix>,
    norms: Vec<f64>,
    min_singular: Vec<f64>,
    log_abs_dets: Vec<f64>,
}

impl MatrixSystem {
    pub fn new(maps: Vec<Matrix>) -> Result<Self> {
        let first = maps.first().ok_or_else(|| Error::InvalidParameter("a system needs at least one map".into()))?;
        let dim = first.dim();
        if let Some(m) = maps.iter().find(|m| m.dim() != dim) {
            return Err(Error::DimensionMismatch { left: dim, right: m.dim() });
        }
        let mut norms = Vec::with_capacity(maps.len());
        let mut min_singular = Vec::with_capacity(maps.len());
        for (index, m) in maps.iter().enumerate() {
            let sv = m.singular_values();
            if !(sv.smallest() > INVERTIBILITY_FLOOR) {
                return Err(Error::NotInvertible { index, sigma_min: sv.smallest() });
            }
            norms.push(sv.largest());
            min_singular.push(sv.smallest());
        }
        let log_abs_dets = maps.iter().map(|m| m.det().abs().ln()).collect();
        Ok(MatrixSystem { maps, norms, min_singular, log_abs_dets })
    }

    pub fn maps(&self) -> &[Matrix] {
        &self.maps
    }

    pub fn map(&self, i: usize) -> &Matrix {
        &self.maps[i]
    }

    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maps.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.maps[0].dim()
    }

    pub fn norms(&self) -> &[f64] {
        &self.norms
    }

    pub fn min_singular(&self) -> &[f64] {
        &self.min_singular
    }

    pub(crate) fn log_abs_dets(&self) -> &[f64] {
        &self.log_abs_dets
    }

    pub fn max_norm(&self) -> f64 {
        self.norms.iter().copied().fold(0.0, f64::max)
    }

    /// `max ‖A_i‖ < 1`.
    pub fn is_contracting(&self) -> bool {
        self.max_norm() < 1.0
    }

    /// `max ‖A_i‖ < 1/2`, the norm bound under which the typical-dimension
    /// formula for self-affine measures is known to hold.
    pub fn is_strictly_contracting(&self) -> bool {
        self.max_norm() < 0.5
    }

    pub fn require_contracting(&self) -> Result<()> {
        if self.is_contracting() {
            Ok(())
        } else {
            Err(Error::NonContracting { max_norm: self.max_norm() })
        }
    }

    pub fn require_planar(&self) -> Result<()> {
        if self.dim() == 2 {
            Ok(())
        } else {
            Err(Error::UnsupportedDimension(self.dim()))
        }
    }

    /// Product `A_{w₁} ⋯ A_{w_n}` of a word (0-based letters).
    pub fn product(&self, word: &[usize]) -> Result<Matrix> {
        let mut acc = Matrix::identity(self.dim())?;
        for &letter in word {
            let m = self
                .maps
                .get(letter)
                .ok_or_else(|| Error::InvalidParameter(format!("letter {} out of range", letter + 1)))?;
            acc = acc.mul(m)?;
        }
        Ok(acc)
    }
}

impl<'de> Deserialize<'de> for MatrixSystem {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            maps: Vec<Matrix>,
        }
        let raw = Raw::deserialize(d)?;
        MatrixSystem::new(raw.maps).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags() {
        let sys = MatrixSystem::new(vec![Matrix::diag(0.4, 0.05), Matrix::diag(0.4, 0.4)]).unwrap();
        assert!(sys.is_contracting() && sys.is_strictly_contracting());
        let sys = MatrixSystem::new(vec![Matrix::diag(0.9, 0.05)]).unwrap();
        assert!(sys.is_contracting() && !sys.is_strictly_contracting());
        let sys = MatrixSystem::new(vec![Matrix::diag(2.0, 0.5)]).unwrap();
        assert!(matches!(sys.require_contracting(), Err(Error::NonContracting { .. })));
    }

    #[test]
    fn rejects_singular_and_mixed() {
        assert!(matches!(MatrixSystem::new(vec![Matrix::diag(0.4, 0.0)]), Err(Error::NotInvertible { index: 0, .. })));
        assert!(MatrixSystem::new(vec![]).is_err());
        let m3 = Matrix::identity(3).unwrap();
        assert!(matches!(MatrixSystem::new(vec![Matrix::diag(0.4, 0.4), m3]), Err(Error::DimensionMismatch { .. })));
    }
}
