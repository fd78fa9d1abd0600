//! Truncated Fock-space simulation of linear-optical circuits and of the
//! ancilla-free SWAP-test family built on photon-number-resolving detection.
//!
//! The crate is organised bottom-up:
//!
//! * [`fock`] holds multimode truncated Fock states, exact gate matrix
//!   elements, state preparation and the nearest-neighbour rectangular mesh
//!   decomposition of single-particle unitaries.
//! * [`dv`] covers qubit/qudit SWAP eigenbases and the destructive qudit
//!   SWAP estimator.
//! * [`sampling`] is the seeded, scheduling-independent shot sampler.
//! * [`estimators`] implements the CV SWAP test with a finite detector
//!   threshold, its systematic-error bounds and the detector-cutoff planners.
//! * [`protocols`] composes the above into the PERM test, the two-copy test,
//!   compiling-cost evaluation and the hybrid qubit/CV test.
//! * [`cli`] is the JSON-config driven front end used by the `cvswap` binary.

pub mod cli;
pub mod dv;
pub mod error;
pub mod estimators;
pub mod fock;
pub mod protocols;
pub mod sampling;

mod tensor;

pub use error::{Error, Result};

/// Complex amplitude type used throughout the crate.
pub type C64 = num_complex::Complex64;

/// Version string embedded in every result document.
pub const TOOL_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));
