//! RVB states, norms and `2 × L` block density matrices by rung recursion.
//!
//! Everything here runs on the transfer chain: the state is grown one
//! super-site at a time, norms are the empty-bond weight of the left
//! environment, and block density matrices contract left and right
//! environments with the block tensors. Periodic ladders are folded into a
//! chain of rung pairs, so their last super-site holds rungs `M/2 − 1` and
//! `M/2`; translation invariance moves that block to any rung pair.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use nalgebra::DMatrix;

use super::transfer::{Chain, Env, Layout};
use super::{require_even_rungs, require_state_size, Construction, RvbState};
use crate::error::{Error, Result};
use crate::ggm::{compute_ggm, ggm_from_blocks, restricted_placements, GgmResult, Strategy};
use crate::hilbert::ReducedState;
use crate::lattice::{build_ladder, Boundary, LadderGeometry};

/// Largest leg count for block density matrices of open ladders.
pub const MAX_BLOCK_LEGS_OPEN: usize = 6;
/// Largest leg count for block density matrices of periodic ladders.
pub const MAX_BLOCK_LEGS_PERIODIC: usize = 4;

fn chain_for(g: &LadderGeometry, close_right: bool) -> Result<Chain> {
    let layout = match g.boundary() {
        Boundary::Open => Layout::open(g)?,
        Boundary::PeriodicAlongLegs => Layout::folded(g)?,
    };
    Chain::new(layout, close_right)
}

/// Number of coverings: every covering contributes `2^{d/2}` to the sum of
/// `|coef|` products over spin choices, `d` the number of dimers.
fn count_coverings(chain: &Chain, n: usize) -> u64 {
    let mut w: HashMap<u32, f64> = HashMap::from([(0, 1.0)]);
    for entries in &chain.tensors {
        let mut next: HashMap<u32, f64> = HashMap::new();
        for e in entries {
            if let Some(&wy) = w.get(&e.y) {
                *next.entry(e.x).or_insert(0.0) += wy * e.coef.abs();
            }
        }
        w = next;
    }
    let total = w.get(&0).copied().unwrap_or(0.0);
    (total / 2f64.powf(n as f64 / 4.0)).round() as u64
}

fn check_legs(legs: usize) -> Result<()> {
    if legs == 0 {
        return Err(Error::domain("a ladder needs at least one leg"));
    }
    Ok(())
}

/// RVB state of `geometry` grown by the rung recursion.
pub fn build_rvb_recursive(geometry: &LadderGeometry) -> Result<RvbState> {
    require_even_rungs(geometry)?;
    require_state_size(geometry)?;
    if geometry.n() % 2 == 1 || !geometry.is_bipartite() {
        return Err(Error::domain(format!("{} admits no RVB state", geometry.label())));
    }
    let chain = chain_for(geometry, true)?;
    let amps = chain.contract();
    let count = count_coverings(&chain, geometry.n());
    if count == 0 {
        return Err(Error::Construction(format!("{} admits no dimer covering", geometry.label())));
    }
    RvbState::from_amplitudes(geometry, &amps, count, Construction::Recursion)
}

/// Open `legs × rungs` RVB state by recursion.
pub fn build_rvb_recursive_open(rungs: usize, legs: usize) -> Result<RvbState> {
    check_legs(legs)?;
    build_rvb_recursive(&build_ladder(legs, rungs, Boundary::Open)?)
}

/// Periodic `legs × rungs` RVB state by recursion (`rungs` even, at least 4).
pub fn build_rvb_recursive_periodic(rungs: usize, legs: usize) -> Result<RvbState> {
    check_legs(legs)?;
    if rungs % 2 == 1 {
        return Err(Error::domain(format!("RVB states need an even number of rungs ({rungs} given)")));
    }
    build_rvb_recursive(&build_ladder(legs, rungs, Boundary::PeriodicAlongLegs)?)
}

/// Norms `⟨ψ_M|ψ_M⟩` of the unnormalized open `legs × M` RVB states for
/// `M = 1..=max_rungs`; entry `M − 1` belongs to `M` rungs. Ladders without
/// a covering get 0.
pub fn norm_recursion(legs: usize, max_rungs: usize) -> Result<Vec<f64>> {
    check_legs(legs)?;
    if max_rungs == 0 {
        return Ok(Vec::new());
    }
    let g = build_ladder(legs, max_rungs, Boundary::Open)?;
    let chain = chain_for(&g, false)?;
    let envs = chain.left_envs();
    Ok((1..=max_rungs).map(|m| chain.empty_weight(m, &envs[m])).collect())
}

/// Environments of one ladder, computed once and shared.
#[derive(Debug)]
struct Prepared {
    chain: Chain,
    left: Vec<Env>,
    right: Vec<Env>,
}

impl Prepared {
    fn new(g: &LadderGeometry) -> Result<Self> {
        let chain = chain_for(g, true)?;
        let left = chain.left_envs();
        let right = match g.boundary() {
            Boundary::Open => chain.right_envs(),
            // the folded chain only needs the closing unit environment
            Boundary::PeriodicAlongLegs => {
                let mut r = vec![Env::new(); chain.len() + 1];
                r[chain.len()] = chain.unit_env(chain.len());
                r
            }
        };
        Ok(Self { chain, left, right })
    }

    /// Unnormalized block matrix at the rung pair `(p, p + 1)`, local bit
    /// order rung `p` legs then rung `p + 1` legs.
    fn block(&self, g: &LadderGeometry, p: usize) -> DMatrix<f64> {
        match g.boundary() {
            Boundary::Open => self.chain.two_group_rdm(p, &self.left[p], &self.right[p + 2]),
            Boundary::PeriodicAlongLegs => {
                let k = self.chain.len() - 1;
                self.chain.group_rdm(k, &self.left[k], &self.right[k + 1])
            }
        }
    }
}

fn validate_block_request(g: &LadderGeometry, pair: (usize, usize)) -> Result<()> {
    require_even_rungs(g)?;
    if g.n() % 2 == 1 || !g.is_bipartite() {
        return Err(Error::domain(format!("{} admits no RVB state", g.label())));
    }
    let (m, l) = (g.rungs(), g.legs());
    let limit = match g.boundary() {
        Boundary::Open => MAX_BLOCK_LEGS_OPEN,
        Boundary::PeriodicAlongLegs => MAX_BLOCK_LEGS_PERIODIC,
    };
    if l > limit {
        return Err(Error::resource(format!(
            "block density matrices of {} ladders are limited to {limit} legs",
            g.boundary().as_str()
        )));
    }
    let adjacent = match g.boundary() {
        Boundary::Open => pair.0 + 1 == pair.1 && pair.1 < m,
        Boundary::PeriodicAlongLegs => pair.0 < m && pair.1 == (pair.0 + 1) % m,
    };
    if !adjacent {
        return Err(Error::domain(format!("rungs {pair:?} are not neighbors on {}", g.label())));
    }
    if g.boundary() == Boundary::PeriodicAlongLegs && m < 4 {
        return Err(Error::domain("periodic RVB recursion needs at least 4 rungs"));
    }
    Ok(())
}

/// Caches chains and environments per geometry, and norm sequences per leg
/// count, so that scans over many blocks or lengths reuse them.
#[derive(Debug, Default)]
pub struct RecursionCache {
    prepared: Mutex<HashMap<(usize, usize, Boundary), Arc<Prepared>>>,
    norms: Mutex<HashMap<usize, Vec<f64>>>,
}

impl RecursionCache {
    pub fn new() -> Self {
        Self::default()
    }

    fn prepared(&self, g: &LadderGeometry) -> Result<Arc<Prepared>> {
        let key = (g.legs(), g.rungs(), g.boundary());
        if let Some(p) = self.prepared.lock().unwrap().get(&key) {
            return Ok(p.clone());
        }
        let p = Arc::new(Prepared::new(g)?);
        self.prepared.lock().unwrap().insert(key, p.clone());
        Ok(p)
    }

    /// Open-ladder norms for `M = 1..=max_rungs`, extended on demand.
    pub fn norms(&self, legs: usize, max_rungs: usize) -> Result<Vec<f64>> {
        if let Some(v) = self.norms.lock().unwrap().get(&legs) {
            if v.len() >= max_rungs {
                return Ok(v[..max_rungs].to_vec());
            }
        }
        let v = norm_recursion(legs, max_rungs)?;
        self.norms.lock().unwrap().insert(legs, v.clone());
        Ok(v)
    }

    /// Normalized density matrix of the rung pair `pair`.
    pub fn block_rdm(&self, g: &LadderGeometry, pair: (usize, usize)) -> Result<ReducedState> {
        validate_block_request(g, pair)?;
        let prep = self.prepared(g)?;
        let m = prep.block(g, pair.0);
        let sites: Vec<usize> = g.rung_sites(pair.0).chain(g.rung_sites(pair.1)).collect();
        ReducedState::from_real(sites, &m)?.normalized()
    }

    /// Restricted-strategy GGM of the RVB state without building it.
    pub fn restricted_ggm(&self, g: &LadderGeometry) -> Result<GgmResult> {
        let placements = restricted_placements(g)?;
        if placements.iter().any(|&(a, b)| g.rung_sites(a).len() + g.rung_sites(b).len() >= g.n()) {
            // the block is the whole ladder: nothing to recurse over
            let rvb = build_rvb_recursive(g)?;
            return compute_ggm(&rvb.normalized()?, Strategy::Restricted2xL, Some(g));
        }
        let blocks = placements
            .into_iter()
            .map(|pair| self.block_rdm(g, pair))
            .collect::<Result<Vec<_>>>()?;
        ggm_from_blocks(g.n(), &blocks)
    }
}

/// Normalized density matrix of the last two rungs, `(M − 2, M − 1)`.
pub fn block_rdm_2xl(legs: usize, rungs: usize, boundary: Boundary) -> Result<ReducedState> {
    check_legs(legs)?;
    if rungs < 2 {
        return Err(Error::domain("the 2xL block needs at least two rungs"));
    }
    block_rdm_at(&build_ladder(legs, rungs, boundary)?, (rungs - 2, rungs - 1))
}

/// Normalized density matrix of the neighboring rungs `pair`.
pub fn block_rdm_at(geometry: &LadderGeometry, pair: (usize, usize)) -> Result<ReducedState> {
    RecursionCache::new().block_rdm(geometry, pair)
}

/// Restricted-strategy GGM of the RVB state of `geometry`, from recursed
/// block density matrices.
pub fn recursive_restricted_ggm(geometry: &LadderGeometry) -> Result<GgmResult> {
    RecursionCache::new().restricted_ggm(geometry)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::reduced_density_matrix;
    use crate::rvb::build_rvb_enumerated;

    fn max_diff(a: &ReducedState, b: &ReducedState) -> f64 {
        (a.matrix() - b.matrix()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    fn geometries() -> Vec<LadderGeometry> {
        let mut out = Vec::new();
        for legs in 1..=4 {
            for rungs in (2..=20).step_by(2) {
                for b in [Boundary::Open, Boundary::PeriodicAlongLegs] {
                    if legs * rungs > 20 || (b == Boundary::PeriodicAlongLegs && rungs < 4) {
                        continue;
                    }
                    let g = build_ladder(legs, rungs, b).unwrap();
                    if g.n().is_multiple_of(2) {
                        out.push(g);
                    }
                }
            }
        }
        out
    }

    #[test]
    fn recursion_matches_enumeration() {
        for g in geometries() {
            let rec = build_rvb_recursive(&g).unwrap();
            let en = build_rvb_enumerated(&g).unwrap();
            assert_eq!(rec.covering_count, en.covering_count, "{}", g.label());
            let f = rec.state.fidelity(&en.state).unwrap();
            assert!((f - 1.0).abs() < 1e-9, "{}: {f}", g.label());
            assert!((rec.norm_sq - en.norm_sq).abs() < 1e-9 * en.norm_sq, "{}", g.label());
        }
    }

    #[test]
    fn named_builders() {
        assert_eq!(build_rvb_recursive_open(4, 1).unwrap().covering_count, 1);
        assert_eq!(build_rvb_recursive_open(4, 2).unwrap().covering_count, 5);
        assert_eq!(build_rvb_recursive_periodic(4, 1).unwrap().covering_count, 2);
        assert!(matches!(build_rvb_recursive_open(3, 2), Err(Error::Domain(_))));
        assert!(build_rvb_recursive_periodic(2, 2).is_err());
    }

    #[test]
    fn norms_match_enumerated_inner_products() {
        for legs in 1..=4 {
            let max = 20 / legs;
            let norms = norm_recursion(legs, max).unwrap();
            for m in 1..=max {
                let g = build_ladder(legs, m, Boundary::Open).unwrap();
                // odd rung counts are included: the chain also describes them
                let expected: f64 = if g.n() % 2 == 1 {
                    0.0
                } else {
                    let mut amps = std::collections::BTreeMap::new();
                    for c in crate::rvb::enumerate_dimer_coverings(&g).unwrap() {
                        crate::rvb::covering::accumulate_singlet_product(c.pairs(), 1.0, &mut amps);
                    }
                    amps.values().map(|a| a * a).sum()
                };
                let got = norms[m - 1];
                assert!((got - expected).abs() <= 1e-9 * expected.max(1.0), "L={legs} M={m}: {got} vs {expected}");
            }
        }
        assert!(norm_recursion(1, 10).unwrap().iter().step_by(2).all(|&x| x == 0.0));
        assert!(norm_recursion(1, 10).unwrap().iter().skip(1).step_by(2).all(|&x| (x - 1.0).abs() < 1e-12));
    }

    #[test]
    fn block_rdm_matches_partial_trace() {
        for g in geometries() {
            if g.rungs() < 3 {
                continue;
            }
            let psi = build_rvb_enumerated(&g).unwrap().normalized().unwrap();
            let cache = RecursionCache::new();
            for p in 0..g.rungs() - 1 {
                let sites: Vec<usize> = g.rung_sites(p).chain(g.rung_sites(p + 1)).collect();
                let oracle = reduced_density_matrix(&psi, &sites).unwrap();
                let rec = cache.block_rdm(&g, (p, p + 1)).unwrap();
                let err = max_diff(&oracle, &rec);
                assert!(err < 1e-9, "{} pair {p}: {err}", g.label());
            }
        }
    }

    #[test]
    fn block_rdm_across_the_wrap() {
        let g = build_ladder(2, 6, Boundary::PeriodicAlongLegs).unwrap();
        let psi = build_rvb_enumerated(&g).unwrap().normalized().unwrap();
        let sites: Vec<usize> = g.rung_sites(5).chain(g.rung_sites(0)).collect();
        let oracle = reduced_density_matrix(&psi, &sites).unwrap();
        let rec = block_rdm_at(&g, (5, 0)).unwrap();
        assert!(max_diff(&oracle, &rec) < 1e-9);
        assert!(block_rdm_at(&g, (1, 3)).is_err());
    }

    #[test]
    fn restricted_ggm_from_blocks_matches_state() {
        for g in geometries() {
            let psi = build_rvb_enumerated(&g).unwrap().normalized().unwrap();
            let direct = compute_ggm(&psi, Strategy::Restricted2xL, Some(&g)).unwrap();
            let rec = recursive_restricted_ggm(&g).unwrap();
            assert!((direct.value - rec.value).abs() < 1e-9, "{}: {} vs {}", g.label(), direct.value, rec.value);
        }
    }

    #[test]
    fn long_ladders_stay_cheap() {
        let rho = block_rdm_2xl(4, 40, Boundary::Open).unwrap();
        rho.check_invariants().unwrap();
        let rho = block_rdm_2xl(2, 60, Boundary::PeriodicAlongLegs).unwrap();
        rho.check_invariants().unwrap();
        assert!(matches!(block_rdm_2xl(7, 4, Boundary::Open), Err(Error::Resource(_))));
    }
}
