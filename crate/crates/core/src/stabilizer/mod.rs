//! Commuting Pauli Hamiltonians and their reduction to classical label
//! distributions.

pub mod dense;
pub mod hamiltonian;
pub mod mixing;
pub mod models;
pub mod pauli;

pub use dense::{quantum_cmi, DensityMatrix, QuantumChannel};
pub use hamiltonian::{
    check_commuting, stabilizer_distribution, PauliTerm, StabilizerDistribution,
    StabilizerHamiltonian,
};
pub use mixing::{
    cmi_equality_check, induced_classical_channel, is_stabilizer_mixing, label_regions, CmiEquality,
};
pub use pauli::PauliOperator;
