//! Generalized geometric measure: `1 − max_K λ²_max(K : rest)`.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{max_schmidt_sq, reduced_density_matrix, schmidt_sq_upper_bound, ReducedState, StateVector};
use crate::lattice::{Boundary, LadderGeometry};
use crate::tolerances::{PRODUCT_TOL, TIE_TOL};

/// Full enumeration is refused above this many sites.
pub const MAX_FULL_SITES: usize = 16;

/// Exact Schmidt spectra are evaluated in batches of this many splits.
const BATCH: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Strategy {
    #[serde(rename = "full")]
    Full,
    #[serde(rename = "restricted")]
    Restricted2xL,
}

impl Strategy {
    pub fn as_str(&self) -> &'static str {
        match self {
            Strategy::Full => "full",
            Strategy::Restricted2xL => "restricted",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "full" => Ok(Strategy::Full),
            "restricted" | "restricted2xl" | "2xl" => Ok(Strategy::Restricted2xL),
            other => Err(Error::domain(format!("unknown strategy '{other}' (full, restricted)"))),
        }
    }
}

/// One side `K` of an unordered split `K : rest`, stored in canonical form:
/// the smaller side, and on equal sizes the side containing site 0.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Bipartition {
    sites: Vec<usize>,
}

impl Bipartition {
    /// Canonical form of the split with `k` on one side.
    pub fn canonical(n: usize, k: &[usize]) -> Result<Self> {
        let mut mask = vec![false; n];
        for &s in k {
            if s >= n {
                return Err(Error::domain(format!("site {s} out of range for {n} sites")));
            }
            if std::mem::replace(&mut mask[s], true) {
                return Err(Error::domain(format!("site {s} listed twice")));
            }
        }
        if k.is_empty() || k.len() == n {
            return Err(Error::domain("a bipartition needs both sides nonempty"));
        }
        let take_k = 2 * k.len() < n || (2 * k.len() == n && mask[0]);
        let sites = (0..n).filter(|&s| mask[s] == take_k).collect();
        Ok(Self { sites })
    }

    pub fn sites(&self) -> &[usize] {
        &self.sites
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn complement(&self, n: usize) -> Vec<usize> {
        (0..n).filter(|s| !self.sites.contains(s)).collect()
    }

    /// `true` for the form produced by [`Bipartition::canonical`].
    pub fn is_canonical(&self, n: usize) -> bool {
        Self::canonical(n, &self.sites).is_ok_and(|c| c == *self)
    }
}

impl PartialOrd for Bipartition {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Smaller sides first, then lexicographic.
impl Ord for Bipartition {
    fn cmp(&self, other: &Self) -> Ordering {
        self.sites
            .len()
            .cmp(&other.sites.len())
            .then_with(|| self.sites.cmp(&other.sites))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GgmResult {
    pub value: f64,
    pub lambda_sq: f64,
    pub argmax: Bipartition,
    pub strategy: Strategy,
    /// Other splits whose λ² lies within the tie tolerance of the maximum.
    pub ties: Vec<Bipartition>,
}

impl GgmResult {
    /// Some enumerated split is a product cut.
    pub fn is_product(&self) -> bool {
        self.lambda_sq >= 1.0 - PRODUCT_TOL
    }

    fn from_scores(strategy: Strategy, mut scored: Vec<(Bipartition, f64)>) -> Result<Self> {
        let best = scored
            .iter()
            .map(|(_, l)| *l)
            .fold(f64::NEG_INFINITY, f64::max);
        if !best.is_finite() {
            return Err(Error::domain("no bipartition to optimize over"));
        }
        scored.retain(|(_, l)| *l >= best - TIE_TOL);
        scored.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        let (argmax, lambda_sq) = scored.remove(0);
        let mut ties: Vec<Bipartition> = scored.into_iter().map(|(b, _)| b).collect();
        ties.sort();
        Ok(Self {
            value: (1.0 - lambda_sq).max(0.0),
            lambda_sq,
            argmax,
            strategy,
            ties,
        })
    }
}

/// Rung pairs whose `2 × L` block is searched by [`Strategy::Restricted2xL`]:
/// the last two rungs, plus the middle pair on open ladders.
pub fn restricted_placements(geometry: &LadderGeometry) -> Result<Vec<(usize, usize)>> {
    let m = geometry.rungs();
    if m < 2 {
        return Err(Error::domain("the 2xL block needs at least two rungs"));
    }
    let mut out = vec![(m - 2, m - 1)];
    if geometry.boundary() == Boundary::Open {
        let mid = (m - 2) / 2;
        if mid != m - 2 {
            out.push((mid, mid + 1));
        }
    }
    Ok(out)
}

fn block_sites(geometry: &LadderGeometry, pair: (usize, usize)) -> Vec<usize> {
    geometry.rung_sites(pair.0).chain(geometry.rung_sites(pair.1)).collect()
}

fn full_splits(n: usize) -> Result<Vec<Bipartition>> {
    if n < 2 {
        return Err(Error::domain("a bipartition needs at least two sites"));
    }
    if n > MAX_FULL_SITES {
        return Err(Error::resource(format!(
            "full enumeration is limited to {MAX_FULL_SITES} sites ({n} given); use the restricted strategy"
        )));
    }
    // canonical sides are exactly the proper subsets of size < n/2, plus the
    // size-n/2 subsets containing site 0
    let mut out: Vec<Bipartition> = (1u32..(1u32 << n))
        .filter(|&mask| {
            let c = mask.count_ones() as usize;
            2 * c < n || (2 * c == n && mask & 1 == 1)
        })
        .map(|mask| Bipartition {
            sites: (0..n).filter(|&s| mask >> s & 1 == 1).collect(),
        })
        .collect();
    out.sort();
    Ok(out)
}

/// Nonempty subsets of each placement's block, canonicalized and deduplicated.
fn restricted_splits(geometry: &LadderGeometry) -> Result<Vec<(Bipartition, usize, Vec<usize>)>> {
    let n = geometry.n();
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    for (p, pair) in restricted_placements(geometry)?.into_iter().enumerate() {
        let block = block_sites(geometry, pair);
        for mask in 1u32..(1u32 << block.len()) {
            let subset: Vec<usize> = block
                .iter()
                .enumerate()
                .filter(|(t, _)| mask >> t & 1 == 1)
                .map(|(_, &s)| s)
                .collect();
            if subset.len() == n {
                continue;
            }
            let canon = Bipartition::canonical(n, &subset)?;
            if seen.insert(canon.clone()) {
                out.push((canon, p, subset));
            }
        }
    }
    Ok(out)
}

/// All splits searched by `strategy`, canonical and duplicate-free.
pub fn enumerate_bipartitions(
    n: usize,
    strategy: Strategy,
    geometry: Option<&LadderGeometry>,
) -> Result<Vec<Bipartition>> {
    match strategy {
        Strategy::Full => full_splits(n),
        Strategy::Restricted2xL => {
            let g = geometry.ok_or_else(|| Error::domain("the restricted strategy needs a ladder geometry"))?;
            if g.n() != n {
                return Err(Error::domain(format!("geometry has {} sites, expected {n}", g.n())));
            }
            Ok(restricted_splits(g)?.into_iter().map(|(b, _, _)| b).collect())
        }
    }
}

/// Full sweep: cheap block-trace bounds first, exact spectra only for
/// splits whose bound can still reach the running maximum.
fn full_scores(state: &StateVector, splits: Vec<Bipartition>, norm_sq: f64) -> Result<Vec<(Bipartition, f64)>> {
    let mut bounded: Vec<(Bipartition, f64)> = splits
        .into_par_iter()
        .map(|b| {
            let ub = schmidt_sq_upper_bound(state, b.sites()) / norm_sq;
            (b, ub)
        })
        .collect();
    bounded.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));

    let mut scored = Vec::new();
    let mut best = f64::NEG_INFINITY;
    for batch in bounded.chunks(BATCH) {
        if batch[0].1 < best - TIE_TOL {
            break;
        }
        let exact: Vec<(Bipartition, f64)> = batch
            .par_iter()
            .filter(|(_, ub)| *ub >= best - TIE_TOL)
            .map(|(b, _)| Ok((b.clone(), max_schmidt_sq(state, b.sites())? / norm_sq)))
            .collect::<Result<_>>()?;
        for (_, l) in &exact {
            best = best.max(*l);
        }
        scored.extend(exact);
    }
    Ok(scored)
}

fn restricted_scores(state: &StateVector, geometry: &LadderGeometry) -> Result<Vec<(Bipartition, f64)>> {
    if geometry.n() != state.n() {
        return Err(Error::domain(format!(
            "state has {} sites, geometry {}",
            state.n(),
            geometry.n()
        )));
    }
    let blocks: Vec<ReducedState> = restricted_placements(geometry)?
        .into_iter()
        .map(|pair| {
            let sites = block_sites(geometry, pair);
            if sites.len() == state.n() {
                Ok(None)
            } else {
                reduced_density_matrix(state, &sites).map(Some)
            }
        })
        .filter_map(Result::transpose)
        .collect::<Result<_>>()?;
    let norm_sq = state.norm_sq();
    if blocks.is_empty() {
        // the block is the whole system: split it directly
        return restricted_splits(geometry)?
            .into_par_iter()
            .map(|(b, _, _)| Ok((b.clone(), max_schmidt_sq(state, b.sites())? / norm_sq)))
            .collect();
    }
    scores_from_blocks(state.n(), &blocks)
}

/// λ² of every nonempty subset of each block, from block reduced states.
fn scores_from_blocks(n: usize, blocks: &[ReducedState]) -> Result<Vec<(Bipartition, f64)>> {
    let mut seen = std::collections::HashSet::new();
    let mut jobs = Vec::new();
    for (p, block) in blocks.iter().enumerate() {
        let sites = block.sites();
        for mask in 1u32..(1u32 << sites.len()) {
            let subset: Vec<usize> = sites
                .iter()
                .enumerate()
                .filter(|(t, _)| mask >> t & 1 == 1)
                .map(|(_, &s)| s)
                .collect();
            let canon = Bipartition::canonical(n, &subset)?;
            if seen.insert(canon.clone()) {
                jobs.push((canon, p, subset));
            }
        }
    }
    jobs.into_par_iter()
        .map(|(canon, p, subset)| {
            let block = &blocks[p];
            let lam = if subset.len() == block.sites().len() {
                block.max_eigenvalue()
            } else {
                block.partial_trace(&subset)?.max_eigenvalue()
            };
            Ok((canon, lam / block.trace()))
        })
        .collect()
}

/// GGM of `state` over the splits selected by `strategy`.
pub fn compute_ggm(state: &StateVector, strategy: Strategy, geometry: Option<&LadderGeometry>) -> Result<GgmResult> {
    let norm_sq = state.norm_sq();
    if !(norm_sq > 0.0) {
        return Err(Error::domain("GGM of the zero vector"));
    }
    let scored = match strategy {
        Strategy::Full => full_scores(state, full_splits(state.n())?, norm_sq)?,
        Strategy::Restricted2xL => {
            let g = geometry.ok_or_else(|| Error::domain("the restricted strategy needs a ladder geometry"))?;
            restricted_scores(state, g)?
        }
    };
    GgmResult::from_scores(strategy, scored)
}

/// Restricted GGM from precomputed `2 × L` block reduced states of an
/// `n`-site state.
pub fn ggm_from_blocks(n: usize, blocks: &[ReducedState]) -> Result<GgmResult> {
    if blocks.is_empty() {
        return Err(Error::domain("no blocks supplied"));
    }
    if let Some(b) = blocks.iter().find(|b| b.sites().len() >= n) {
        return Err(Error::domain(format!(
            "block on {} sites leaves nothing to trace out of {n}",
            b.sites().len()
        )));
    }
    GgmResult::from_scores(Strategy::Restricted2xL, scores_from_blocks(n, blocks)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestrictedValidation {
    pub full: GgmResult,
    pub restricted: GgmResult,
    /// `restricted.value − full.value`; never negative beyond rounding.
    pub gap: f64,
    /// The restricted search missed the optimum by more than the tie tolerance.
    pub violation: bool,
}

/// Compares the restricted search against full enumeration (`n ≤ 16`).
pub fn validate_restricted_strategy(state: &StateVector, geometry: &LadderGeometry) -> Result<RestrictedValidation> {
    let full = compute_ggm(state, Strategy::Full, Some(geometry))?;
    let restricted = compute_ggm(state, Strategy::Restricted2xL, Some(geometry))?;
    let gap = restricted.value - full.value;
    Ok(RestrictedValidation {
        violation: gap.abs() > TIE_TOL,
        gap,
        full,
        restricted,
    })
}
