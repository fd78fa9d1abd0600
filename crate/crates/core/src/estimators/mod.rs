//! The CV SWAP test with a finite detector threshold, its systematic-error
//! bounds and detector-cutoff planners.

mod engine;
mod planning;
mod swap;

use serde::{Deserialize, Serialize};

use crate::C64;

pub use engine::{Experiment, Mixer, Score, MAX_GROUP_DIM};
pub use planning::{
    chernoff_bound, chernoff_candidate, cutoff_exact_tail, cutoff_for_coherent_chernoff, cutoff_for_coherent_normal,
    cutoff_for_squeezed, normal_cdf, probit, squeezed_bound, squeezed_large_r_cutoff, CutoffPlan, PlanMethod,
    NORMAL_MIN_ENERGY,
};
pub use swap::{
    analytic_squeezed_overlap, analytic_swap2m_squeezed, cv_swap_estimate, cv_swap_experiment, error_bound_global,
    error_bound_local, pair_padding, parity_experiment, parity_experiment_after, parity_overlap_estimate, parity_overlap_exact,
    squeezed_pair_raw, swap2m_expectation, swap_expectation_direct, Threshold,
};

/// Sample mean of per-shot weights with its standard error. `discarded`
/// counts shots above the detector threshold; they score zero and stay in
/// `shots`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimatorResult {
    pub mean: C64,
    pub stderr: Option<f64>,
    pub shots: u64,
    pub discarded: u64,
    pub seed: u64,
}
