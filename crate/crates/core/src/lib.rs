//! Dimension theory of self-affine systems by certified numerics.
//!
//! The crate computes the affinity dimension and the generalised q-dimension
//! formula of finite systems of contracting linear maps as intervals whose
//! endpoints are proven bounds, brackets the lower spectral radius of matrix
//! pairs, and samples self-affine measures to estimate their L^q spectra.
//!
//! * [`matrix`]: small dense matrices, singular values, the singular value function.
//! * [`engine`]: deterministic (optionally parallel) folds over all products of a fixed length.
//! * [`pressure`]: finite-depth pressures, their bounds, and the dimension solvers.
//! * [`spectral`]: lower spectral radius brackets and rotation perturbations.
//! * [`measure`]: chaos-game sampling and mesh-cube moment sums.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cone;
pub mod engine;
pub mod error;
pub mod logmat;
pub mod matrix;
pub mod measure;
pub mod pressure;
pub mod spectral;

pub use engine::{ExecConfig, MatrixSystem, RunWord, Word};
pub use error::{Error, Result};
pub use matrix::{mat_mul, Matrix, SingularValues};
