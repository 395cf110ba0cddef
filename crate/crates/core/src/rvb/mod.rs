//! Nearest-neighbor RVB states of ladders.
//!
//! The state is the equal-weight sum over dimer coverings of singlet
//! products, each singlet `(|↑_a ↓_b⟩ − |↓_a ↑_b⟩)/√2` with `a` on
//! sublattice A. [`build_rvb_enumerated`] lists the coverings explicitly;
//! the recursive builders in [`recursive`] grow the ladder rung by rung and
//! scale to lengths where enumeration is hopeless. [`identities`] checks the
//! compact two-rung recursion forms against the enumerated state.

mod covering;
pub mod identities;
pub mod recursive;
mod transfer;

use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{SectorBasis, StateVector};
use crate::lattice::LadderGeometry;

pub use covering::{coverings_from_json, coverings_to_json, enumerate_dimer_coverings, DimerCovering};
pub use recursive::{
    block_rdm_2xl, block_rdm_at, build_rvb_recursive, build_rvb_recursive_open, build_rvb_recursive_periodic,
    norm_recursion, recursive_restricted_ggm, RecursionCache,
};

/// Largest ladder turned into an explicit RVB state vector.
pub const MAX_RVB_STATE_SITES: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Construction {
    Enumeration,
    Recursion,
}

/// An RVB state in the `S^z = 0` sector.
///
/// `state` holds the unnormalized covering sum; [`RvbState::normalized`]
/// gives the unit vector.
#[derive(Debug, Clone)]
pub struct RvbState {
    pub geometry: LadderGeometry,
    pub state: StateVector,
    pub norm_sq: f64,
    pub covering_count: u64,
    pub construction: Construction,
}

impl RvbState {
    pub fn normalized(&self) -> Result<StateVector> {
        self.state.clone().normalized()
    }

    pub(crate) fn from_amplitudes(
        geometry: &LadderGeometry,
        amps: &BTreeMap<u64, f64>,
        covering_count: u64,
        construction: Construction,
    ) -> Result<Self> {
        let n = geometry.n();
        let basis = Arc::new(SectorBasis::new(n, n / 2)?);
        let mut v = vec![Complex64::new(0.0, 0.0); basis.len()];
        for (&config, &a) in amps {
            let i = basis
                .index_of(config)
                .ok_or_else(|| Error::Construction(format!("configuration {config:#b} outside S^z = 0")))?;
            v[i] = Complex64::new(a, 0.0);
        }
        let state = StateVector::in_sector(basis, v)?;
        let norm_sq = state.norm_sq();
        if !(norm_sq > 0.0) {
            return Err(Error::Construction(format!("{} has a vanishing RVB state", geometry.label())));
        }
        Ok(Self {
            geometry: geometry.clone(),
            state,
            norm_sq,
            covering_count,
            construction,
        })
    }
}

pub(crate) fn require_state_size(geometry: &LadderGeometry) -> Result<()> {
    if geometry.n() > MAX_RVB_STATE_SITES {
        return Err(Error::resource(format!(
            "RVB state vectors are limited to {MAX_RVB_STATE_SITES} sites ({} given)",
            geometry.n()
        )));
    }
    Ok(())
}

pub(crate) fn require_even_rungs(geometry: &LadderGeometry) -> Result<()> {
    if geometry.rungs() % 2 == 1 {
        return Err(Error::domain(format!(
            "RVB states need an even number of rungs ({} given)",
            geometry.rungs()
        )));
    }
    Ok(())
}

/// RVB state from explicit enumeration of every dimer covering.
pub fn build_rvb_enumerated(geometry: &LadderGeometry) -> Result<RvbState> {
    require_even_rungs(geometry)?;
    require_state_size(geometry)?;
    let coverings = enumerate_dimer_coverings(geometry)?;
    if coverings.is_empty() {
        return Err(Error::Construction(format!("{} admits no dimer covering", geometry.label())));
    }
    let mut amps = BTreeMap::new();
    for c in &coverings {
        covering::accumulate_singlet_product(c.pairs(), 1.0, &mut amps);
    }
    RvbState::from_amplitudes(geometry, &amps, coverings.len() as u64, Construction::Enumeration)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_ladder, Boundary};
    use crate::spectral::{ground_state, total_spin_squared, HamiltonianSpec, LanczosOptions};

    #[test]
    fn plaquette_matches_exact_ground_state() {
        let g = build_ladder(2, 2, Boundary::Open).unwrap();
        let rvb = build_rvb_enumerated(&g).unwrap();
        assert_eq!(rvb.covering_count, 2);
        let gs = ground_state(&HamiltonianSpec::heisenberg(g), &LanczosOptions::default()).unwrap();
        let f = gs.state.fidelity(&rvb.normalized().unwrap()).unwrap();
        assert!((f - 1.0).abs() < 1e-9, "{f}");
    }

    #[test]
    fn rvb_states_are_total_singlets() {
        for (l, m, b) in [(2, 4, Boundary::Open), (3, 4, Boundary::PeriodicAlongLegs), (1, 6, Boundary::PeriodicAlongLegs), (4, 4, Boundary::Open)] {
            let g = build_ladder(l, m, b).unwrap();
            let psi = build_rvb_enumerated(&g).unwrap().normalized().unwrap();
            let s2 = total_spin_squared(&psi).unwrap();
            assert!(s2.abs() < 1e-8, "{}: {s2}", g.label());
        }
    }

    #[test]
    fn rejects_odd_rungs_and_oversized_ladders() {
        let odd = build_ladder(2, 3, Boundary::Open).unwrap();
        assert!(matches!(build_rvb_enumerated(&odd), Err(Error::Domain(_))));
        let big = build_ladder(2, 14, Boundary::Open).unwrap();
        assert!(matches!(build_rvb_enumerated(&big), Err(Error::Resource(_))));
    }
}
