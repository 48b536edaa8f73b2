//! Sampling self-affine measures and estimating their L^q scaling.

mod ifs;
mod moments;
mod rng;

pub use ifs::{chaos_game, AffineIfs, SampleSet, MIN_BURN_IN, MIN_SAMPLES};
pub use moments::{dq_estimate, mesh_moments, DqEstimate, MomentEntry, MomentSeries, MAX_MESH_DIM};
pub use rng::SampleRng;
