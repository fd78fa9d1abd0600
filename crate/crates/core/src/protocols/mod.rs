//! Protocols composed from the parity estimator: PERM test, two-copy test,
//! compiling cost and the hybrid qubit/CV SWAP test.

mod compile;
mod hybrid;
mod perm;
mod two_copy;

pub use compile::{compile_cost, CompileCost};
pub use hybrid::{hybrid_swap_estimate, HybridOutcome, HybridSwapTest};
pub use perm::{
    dft_matrix, perm_mixer_gates, perm_mixer_matrix, perm_test, roots_of_unity, PermOutcomeWeight, PermTest,
};
pub use two_copy::{
    replicate_purification, two_copy_experiment, two_copy_experiment_with_gates, two_copy_test,
};
