//! Spin-1/2 state space: fixed-magnetization bases, pure states, and the
//! partial-trace / Schmidt machinery.

pub mod basis;
pub mod io;
pub mod reduced;
pub mod state;

pub use basis::{binomial, fixed_down_configs, sz_zero_basis, SectorBasis};
pub use reduced::{
    max_schmidt_sq, reduced_density_matrix, schmidt_sq_upper_bound, ReducedState, MAX_REDUCED_SITES,
};
pub use state::{Sector, StateVector};
