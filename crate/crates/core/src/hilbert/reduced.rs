//! Partial traces and Schmidt spectra of pure states.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::state::StateVector;
use crate::error::{Error, Result};
use crate::tolerances::HERMITICITY_TOL;

/// Largest subsystem whose reduced density matrix may be materialized.
pub const MAX_REDUCED_SITES: usize = 14;

/// Bucket sort is used when the traced-out register has at most this many bits.
const BUCKET_BITS: usize = 22;

/// Reduced density matrix of the sites `sites`.
///
/// Bit `t` of a row/column index is the spin on `sites[t]` (`1 = ↓`).
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedState {
    sites: Vec<usize>,
    matrix: DMatrix<Complex64>,
    trace: f64,
}

impl ReducedState {
    pub fn from_matrix(sites: Vec<usize>, matrix: DMatrix<Complex64>) -> Result<Self> {
        let dim = 1usize << sites.len();
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::domain(format!(
                "{} sites need a {dim}x{dim} matrix, got {}x{}",
                sites.len(),
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let trace = (0..dim).map(|i| matrix[(i, i)].re).sum();
        Ok(Self { sites, matrix, trace })
    }

    pub fn from_real(sites: Vec<usize>, matrix: &DMatrix<f64>) -> Result<Self> {
        Self::from_matrix(sites, matrix.map(|x| Complex64::new(x, 0.0)))
    }

    pub fn sites(&self) -> &[usize] {
        &self.sites
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.trace
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Scales to unit trace.
    pub fn normalized(mut self) -> Result<Self> {
        if !(self.trace > 0.0) {
            return Err(Error::domain("reduced state has non-positive trace"));
        }
        let inv = 1.0 / self.trace;
        self.matrix *= Complex64::new(inv, 0.0);
        self.trace = 1.0;
        Ok(self)
    }

    pub fn hermiticity_error(&self) -> f64 {
        let m = &self.matrix;
        let mut worst = 0.0f64;
        for i in 0..m.nrows() {
            for j in 0..=i {
                worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Eigenvalues, largest first.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev = Vec::with_capacity(self.dim());
        for block in self.blocks() {
            ev.extend(block_eigenvalues(&self.matrix, &block));
        }
        ev.sort_by(|a, b| b.total_cmp(a));
        ev
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.blocks()
            .iter()
            .map(|b| block_eigenvalues(&self.matrix, b).into_iter().fold(f64::MIN, f64::max))
            .fold(f64::MIN, f64::max)
    }

    /// Hermitian to [`HERMITICITY_TOL`], no eigenvalue below `-HERMITICITY_TOL`.
    pub fn check_invariants(&self) -> Result<()> {
        let herm = self.hermiticity_error();
        if herm > HERMITICITY_TOL {
            return Err(Error::domain(format!("reduced state not Hermitian (error {herm:.3e})")));
        }
        let min = self.eigenvalues().last().copied().unwrap_or(0.0);
        if min < -HERMITICITY_TOL {
            return Err(Error::domain(format!("reduced state has eigenvalue {min:.3e}")));
        }
        Ok(())
    }

    /// Traces out every site not listed in `keep`; `keep` fixes the new bit order.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<ReducedState> {
        let pos_keep: Vec<usize> = keep
            .iter()
            .map(|s| {
                self.sites
                    .iter()
                    .position(|t| t == s)
                    .ok_or_else(|| Error::domain(format!("site {s} is not part of this reduced state")))
            })
            .collect::<Result<_>>()?;
        check_unique(keep)?;
        if keep.is_empty() {
            return Err(Error::domain("partial trace must keep at least one site"));
        }
        let pos_traced: Vec<usize> = (0..self.sites.len()).filter(|p| !pos_keep.contains(p)).collect();
        let kd = 1usize << pos_keep.len();
        let td = 1usize << pos_traced.len();
        let embed = |a: usize, t: usize| {
            let mut idx = 0usize;
            for (bit, &p) in pos_keep.iter().enumerate() {
                idx |= ((a >> bit) & 1) << p;
            }
            for (bit, &p) in pos_traced.iter().enumerate() {
                idx |= ((t >> bit) & 1) << p;
            }
            idx
        };
        let mut out = DMatrix::<Complex64>::zeros(kd, kd);
        for t in 0..td {
            let rows: Vec<usize> = (0..kd).map(|a| embed(a, t)).collect();
            for (a, &ia) in rows.iter().enumerate() {
                for (b, &ib) in rows.iter().enumerate() {
                    out[(a, b)] += self.matrix[(ia, ib)];
                }
            }
        }
        ReducedState::from_matrix(keep.to_vec(), out)
    }

    /// Index sets of the connected components of the nonzero pattern.
    fn blocks(&self) -> Vec<Vec<usize>> {
        let dim = self.dim();
        let mut parent: Vec<usize> = (0..dim).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            let mut y = x;
            while p[y] != r {
                let next = p[y];
                p[y] = r;
                y = next;
            }
            r
        }
        for i in 0..dim {
            for j in 0..i {
                let v = self.matrix[(i, j)];
                if v.re != 0.0 || v.im != 0.0 {
                    let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                    if ri != rj {
                        parent[ri.max(rj)] = ri.min(rj);
                    }
                }
            }
        }
        let mut groups: Vec<Vec<usize>> = Vec::new();
        let mut slot = vec![usize::MAX; dim];
        for i in 0..dim {
            let r = find(&mut parent, i);
            if slot[r] == usize::MAX {
                slot[r] = groups.len();
                groups.push(Vec::new());
            }
            groups[slot[r]].push(i);
        }
        groups
    }
}

fn block_eigenvalues(m: &DMatrix<Complex64>, idx: &[usize]) -> Vec<f64> {
    if idx.len() == 1 {
        return vec![m[(idx[0], idx[0])].re];
    }
    let real = idx.iter().all(|&i| idx.iter().all(|&j| m[(i, j)].im == 0.0));
    if real {
        let sub = DMatrix::<f64>::from_fn(idx.len(), idx.len(), |a, b| m[(idx[a], idx[b])].re);
        crate::eigen::sym_eigenvalues(&sub)
    } else {
        let sub = DMatrix::<Complex64>::from_fn(idx.len(), idx.len(), |a, b| m[(idx[a], idx[b])]);
        crate::eigen::herm_eigenvalues(&sub)
    }
}

fn check_unique(sites: &[usize]) -> Result<()> {
    let mut sorted = sites.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::domain("site list contains duplicates"));
    }
    Ok(())
}

fn validate_subset(n: usize, k: &[usize]) -> Result<()> {
    if k.is_empty() {
        return Err(Error::domain("subsystem must be nonempty"));
    }
    if k.len() >= n {
        return Err(Error::domain("subsystem must be a proper subset of the sites"));
    }
    if let Some(&bad) = k.iter().find(|&&s| s >= n) {
        return Err(Error::domain(format!("site {bad} out of range for {n} sites")));
    }
    check_unique(k)?;
    if k.len() > MAX_REDUCED_SITES {
        return Err(Error::resource(format!(
            "reduced state on {} sites exceeds the dense limit of {MAX_REDUCED_SITES}",
            k.len()
        )));
    }
    Ok(())
}

#[inline]
fn gather_bits(config: u64, sites: &[usize]) -> u64 {
    let mut out = 0u64;
    for (bit, &s) in sites.iter().enumerate() {
        out |= ((config >> s) & 1) << bit;
    }
    out
}

/// Nonzero amplitudes grouped by the configuration of the traced-out sites.
struct Grouped {
    keys: Vec<u32>,
    amps: Vec<Complex64>,
    starts: Vec<usize>,
}

impl Grouped {
    fn groups(&self) -> impl Iterator<Item = (&[u32], &[Complex64])> {
        self.starts
            .windows(2)
            .map(move |w| (&self.keys[w[0]..w[1]], &self.amps[w[0]..w[1]]))
    }
}

fn group_by_rest(state: &StateVector, k: &[usize]) -> Grouped {
    let n = state.n();
    let rest: Vec<usize> = (0..n).filter(|s| !k.contains(s)).collect();
    let mut entries: Vec<(u64, u32, Complex64)> = state
        .iter_nonzero()
        .map(|(c, a)| (gather_bits(c, &rest), gather_bits(c, k) as u32, a))
        .collect();

    if rest.len() <= BUCKET_BITS {
        let mut counts = vec![0usize; (1usize << rest.len()) + 1];
        for e in &entries {
            counts[e.0 as usize + 1] += 1;
        }
        for i in 1..counts.len() {
            counts[i] += counts[i - 1];
        }
        let mut cursor = counts.clone();
        let mut keys = vec![0u32; entries.len()];
        let mut amps = vec![Complex64::new(0.0, 0.0); entries.len()];
        for &(r, key, a) in &entries {
            let slot = &mut cursor[r as usize];
            keys[*slot] = key;
            amps[*slot] = a;
            *slot += 1;
        }
        let mut starts: Vec<usize> = counts.into_iter().collect();
        starts.dedup();
        Grouped { keys, amps, starts }
    } else {
        entries.sort_unstable_by_key(|e| (e.0, e.1));
        let mut starts = vec![0];
        for i in 1..entries.len() {
            if entries[i].0 != entries[i - 1].0 {
                starts.push(i);
            }
        }
        starts.push(entries.len());
        Grouped {
            keys: entries.iter().map(|e| e.1).collect(),
            amps: entries.iter().map(|e| e.2).collect(),
            starts,
        }
    }
}

/// ρ_K = Tr_rest |ψ⟩⟨ψ| for the sites `k` (in the given order).
pub fn reduced_density_matrix(state: &StateVector, k: &[usize]) -> Result<ReducedState> {
    validate_subset(state.n(), k)?;
    let dim = 1usize << k.len();
    let grouped = group_by_rest(state, k);
    let mut rho = DMatrix::<Complex64>::zeros(dim, dim);
    for (keys, amps) in grouped.groups() {
        for (i, &ki) in keys.iter().enumerate() {
            for (j, &kj) in keys.iter().enumerate() {
                rho[(ki as usize, kj as usize)] += amps[i] * amps[j].conj();
            }
        }
    }
    ReducedState::from_matrix(k.to_vec(), rho)
}

/// Upper bound on λ_max(ρ_K) that costs one pass over the amplitudes.
///
/// For a fixed-magnetization state ρ_K is block diagonal in the number of
/// down spins inside K, so the largest block trace bounds every eigenvalue.
pub fn schmidt_sq_upper_bound(state: &StateVector, k: &[usize]) -> f64 {
    if state.basis().is_none() {
        return state.norm_sq();
    }
    let mut per_pop = vec![0.0f64; k.len() + 1];
    for (c, a) in state.iter_nonzero() {
        per_pop[gather_bits(c, k).count_ones() as usize] += a.norm_sqr();
    }
    per_pop.into_iter().fold(0.0, f64::max)
}

/// Largest eigenvalue of ρ_K, i.e. the squared largest Schmidt coefficient
/// of the K : rest split (unnormalized states give it scaled by ‖ψ‖²).
pub fn max_schmidt_sq(state: &StateVector, k: &[usize]) -> Result<f64> {
    validate_subset(state.n(), k)?;
    let kk = k.len();
    let grouped = group_by_rest(state, k);

    // Block layout: one block per popcount for sector states, else one block.
    let blocked = state.basis().is_some();
    let n_blocks = if blocked { kk + 1 } else { 1 };
    let mut local = vec![0usize; 1usize << kk];
    let mut sizes = vec![0usize; n_blocks];
    for (key, slot) in local.iter_mut().enumerate() {
        let b = if blocked { key.count_ones() as usize } else { 0 };
        *slot = sizes[b];
        sizes[b] += 1;
    }
    let block_of = |key: u32| if blocked { key.count_ones() as usize } else { 0 };

    let mut best = 0.0f64;
    if state.is_real() {
        let mut blocks: Vec<Option<DMatrix<f64>>> = vec![None; n_blocks];
        for (keys, amps) in grouped.groups() {
            let b = block_of(keys[0]);
            let m = blocks[b].get_or_insert_with(|| DMatrix::zeros(sizes[b], sizes[b]));
            for (i, &ki) in keys.iter().enumerate() {
                let ai = amps[i].re;
                let li = local[ki as usize];
                for (j, &kj) in keys.iter().enumerate() {
                    m[(li, local[kj as usize])] += ai * amps[j].re;
                }
            }
        }
        for m in blocks.into_iter().flatten() {
            let top = if m.nrows() == 1 {
                m[(0, 0)]
            } else {
                crate::eigen::sym_eigenvalues(&m).into_iter().fold(f64::MIN, f64::max)
            };
            best = best.max(top);
        }
    } else {
        let mut blocks: Vec<Option<DMatrix<Complex64>>> = vec![None; n_blocks];
        for (keys, amps) in grouped.groups() {
            let b = block_of(keys[0]);
            let m = blocks[b].get_or_insert_with(|| DMatrix::zeros(sizes[b], sizes[b]));
            for (i, &ki) in keys.iter().enumerate() {
                let li = local[ki as usize];
                for (j, &kj) in keys.iter().enumerate() {
                    m[(li, local[kj as usize])] += amps[i] * amps[j].conj();
                }
            }
        }
        for m in blocks.into_iter().flatten() {
            let top = if m.nrows() == 1 {
                m[(0, 0)].re
            } else {
                crate::eigen::herm_eigenvalues(&m).into_iter().fold(f64::MIN, f64::max)
            };
            best = best.max(top);
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn singlet() -> StateVector {
        StateVector::full(2, vec![c(0.0), c(FRAC_1_SQRT_2), c(-FRAC_1_SQRT_2), c(0.0)]).unwrap()
    }

    fn w3() -> StateVector {
        let a = 1.0 / 3f64.sqrt();
        let mut amps = vec![c(0.0); 8];
        for idx in [1, 2, 4] {
            amps[idx] = c(a);
        }
        StateVector::full(3, amps).unwrap()
    }

    /// Dense outer-product-and-trace over the full 2^n space.
    fn brute_force_rdm(state: &StateVector, k: &[usize]) -> DMatrix<Complex64> {
        let full = state.to_full().unwrap();
        let n = state.n();
        let amps = full.amplitudes();
        let rest: Vec<usize> = (0..n).filter(|s| !k.contains(s)).collect();
        let dim = 1usize << k.len();
        let mut rho = DMatrix::zeros(dim, dim);
        for i in 0..amps.len() {
            for j in 0..amps.len() {
                if rest.iter().all(|&s| (i >> s) & 1 == (j >> s) & 1) {
                    let a = k.iter().enumerate().fold(0, |acc, (b, &s)| acc | (((i >> s) & 1) << b));
                    let b = k.iter().enumerate().fold(0, |acc, (t, &s)| acc | (((j >> s) & 1) << t));
                    rho[(a, b)] += amps[i] * amps[j].conj();
                }
            }
        }
        rho
    }

    #[test]
    fn singlet_single_site_is_maximally_mixed() {
        let r = reduced_density_matrix(&singlet(), &[0]).unwrap();
        assert!((r.matrix()[(0, 0)].re - 0.5).abs() < 1e-15);
        assert!((r.matrix()[(1, 1)].re - 0.5).abs() < 1e-15);
        assert_eq!(r.matrix()[(0, 1)], c(0.0));
        assert!((max_schmidt_sq(&singlet(), &[0]).unwrap() - 0.5).abs() < 1e-15);
        let sec = singlet().compressed().unwrap();
        assert!((max_schmidt_sq(&sec, &[1]).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn product_states_have_unit_schmidt() {
        let up_up = StateVector::product(&[false, false]).unwrap();
        let r = reduced_density_matrix(&up_up, &[0]).unwrap();
        assert_eq!(r.matrix()[(0, 0)], c(1.0));
        assert_eq!(r.matrix()[(1, 1)], c(0.0));
        let p = StateVector::product(&[false, true, false]).unwrap();
        for k in [vec![0], vec![1], vec![2], vec![0, 2], vec![1, 2]] {
            assert!((max_schmidt_sq(&p, &k).unwrap() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn w_state_single_site() {
        // ρ_0 = diag(2/3, 1/3)
        let r = reduced_density_matrix(&w3(), &[0]).unwrap();
        let brute = brute_force_rdm(&w3(), &[0]);
        assert!((r.matrix() - brute).norm() < 1e-15);
        assert!((max_schmidt_sq(&w3(), &[0]).unwrap() - 2.0 / 3.0).abs() < 1e-14);
        assert!((max_schmidt_sq(&w3().compressed().unwrap(), &[2]).unwrap() - 2.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn subset_validation() {
        let s = w3();
        assert!(matches!(reduced_density_matrix(&s, &[]), Err(Error::Domain(_))));
        assert!(matches!(reduced_density_matrix(&s, &[0, 1, 2]), Err(Error::Domain(_))));
        assert!(matches!(reduced_density_matrix(&s, &[0, 0]), Err(Error::Domain(_))));
        assert!(matches!(reduced_density_matrix(&s, &[5]), Err(Error::Domain(_))));
    }

    #[test]
    fn complex_state_matches_brute_force() {
        let amps: Vec<Complex64> = (0..16)
            .map(|i| Complex64::new(((i * 37) % 11) as f64 - 5.0, ((i * 13) % 7) as f64 - 3.0))
            .collect();
        let s = StateVector::full(4, amps).unwrap().normalized().unwrap();
        for k in [vec![0], vec![3, 1], vec![2, 0, 3]] {
            let r = reduced_density_matrix(&s, &k).unwrap();
            assert!((r.matrix() - brute_force_rdm(&s, &k)).norm() < 1e-13);
            r.check_invariants().unwrap();
            let top = r.max_eigenvalue();
            assert!((top - max_schmidt_sq(&s, &k).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn partial_trace_of_reduced_state() {
        let amps: Vec<Complex64> = (0..32).map(|i| c(((i * 7) % 5) as f64 - 1.5)).collect();
        let s = StateVector::full(5, amps).unwrap().normalized().unwrap();
        let big = reduced_density_matrix(&s, &[1, 3, 4]).unwrap();
        let small = big.partial_trace(&[4, 1]).unwrap();
        let direct = reduced_density_matrix(&s, &[4, 1]).unwrap();
        assert!((small.matrix() - direct.matrix()).norm() < 1e-13);
        assert!(big.partial_trace(&[0]).is_err());
    }

    #[test]
    fn upper_bound_dominates() {
        let amps: Vec<Complex64> = (0..64).map(|i| c(((i * 17) % 13) as f64 - 6.0)).collect();
        let s = StateVector::full(6, amps).unwrap().normalized().unwrap();
        let sec = {
            let mut v = s.to_full().unwrap();
            for (i, a) in v.amplitudes_mut().iter_mut().enumerate() {
                if (i as u64).count_ones() != 3 {
                    *a = c(0.0);
                }
            }
            v.normalized().unwrap().compressed().unwrap()
        };
        for k in [vec![0], vec![1, 2], vec![0, 4, 5]] {
            let exact = max_schmidt_sq(&sec, &k).unwrap();
            assert!(schmidt_sq_upper_bound(&sec, &k) >= exact - 1e-15);
        }
    }
}
