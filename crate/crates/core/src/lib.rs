//! Genuine multisite entanglement of spin-1/2 Heisenberg ladders.
//!
//! Exact ground states come from a Lanczos solver in a fixed-magnetization
//! sector; RVB states are built either by enumerating dimer coverings or by a
//! rung-by-rung transfer recursion. [`ggm`] turns either into the generalized
//! geometric measure, and [`analysis`] compares the two and fits finite-size
//! scaling forms.
//!
//! Site `i` of an `L`-leg, `M`-rung ladder sits on rung `i / L`, leg `i % L`.
//! Bit `i` of a basis index is the spin at site `i`, with `0 = ↑`.

pub mod analysis;
mod eigen;
pub mod error;
pub mod ggm;
pub mod hilbert;
pub mod lattice;
pub mod numeric;
pub mod rvb;
pub mod spectral;
pub mod tolerances;

pub use error::{Error, Result};
pub use ggm::{compute_ggm, Bipartition, GgmResult, Strategy};
pub use hilbert::{ReducedState, SectorBasis, StateVector};
pub use lattice::{build_ladder, Boundary, LadderGeometry, Sublattice};
pub use spectral::{ground_state, GroundStateResult, HamiltonianSpec, LanczosOptions};
