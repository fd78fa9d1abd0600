//! Multimode truncated Fock space: states, exact gate matrix elements,
//! preparation and the rectangular beamsplitter mesh.

mod cutoff;
mod decompose;
mod gates;
mod prepare;
mod state;

pub use cutoff::{CutoffSpec, PhotonPattern};
pub use decompose::{compose_single_particle, rectangular_decompose, single_particle_matrix, MeshStats};
pub use gates::{apply_circuit, apply_gate, gate_matrix, GateSpec};
pub use prepare::{prepare, prepare_raw, PrepKind, Prepared, LEAK_ERROR, LEAK_WARN};
pub use state::{
    basis_state, inner_product, local_cumulative, tensor, truncation_weight, AsEnsemble, Ensemble, EnsembleMember,
    FockState, MixedEnsemble, ProductState,
};

pub(crate) use gates::{local_op, LocalOp};
