//! Pressures of matrix systems and the dimensions they define.

mod finite;
mod pairs;
mod probability;
mod scan;
mod solve;
mod witness;

pub use finite::{
    conformal_r, r_bracket, r_n, r_upper, r_upper_with, s_bracket, s_lower, s_n, Minorant, PressureBracket, MAX_Q,
};
pub use pairs::{
    closed_form_theorem1_pair, hypothesis_check, matrix_distance, perturbed_map, perturbed_pair, perturbed_upper_bound,
    theorem1_pair, HypothesisCheck,
};
pub use probability::ProbabilityVector;
pub use scan::{discontinuity_scan, DiscontinuityScan, ScanRow};
pub use solve::{
    affinity_dimension, affinity_dimension_with, q_dimension, q_dimension_with, q_dimension_witness_upper,
    DimensionBracket, PressureSign, Probe, SolverOptions, WitnessUpper, DEFAULT_TOL, INITIAL_PROBES, MIN_TOL,
};
pub use witness::{default_families, Block, WitnessBound, WitnessFamily, WitnessTable};
