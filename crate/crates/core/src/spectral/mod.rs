//! Heisenberg/XXZ Hamiltonian and its ground state.

pub mod dense;
pub mod hamiltonian;
pub mod lanczos;

pub use hamiltonian::{apply_hamiltonian, total_spin_squared, HamiltonianSpec, XxzOperator};
pub use lanczos::{
    ground_sector, ground_state, lanczos_lowest, Eigenpair, GroundStateResult, LanczosOptions, DEFAULT_SEED,
    MAX_ED_SITES,
};
