//! Dense reference diagonalization.
//!
//! Matrix elements come from the 4×4 bond operator assembled out of explicit
//! Pauli matrices, and basis lookup goes through a hash map, so nothing here
//! shares code with the matrix-free operator or the sector ranking tables.

use std::collections::HashMap;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::hamiltonian::HamiltonianSpec;
use crate::error::{Error, Result};

/// Dense diagonalization is refused beyond this many sites.
pub const MAX_DENSE_SITES: usize = 14;

fn pauli() -> [[[Complex64; 2]; 2]; 3] {
    let z = Complex64::new(0.0, 0.0);
    let o = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    [[[z, o], [o, z]], [[z, -i], [i, z]], [[o, z], [z, -o]]]
}

/// `(J/4)(XX + YY + Δ ZZ)` on two qubits; index `2·s_a + s_b`, `0 = ↑`.
pub fn bond_matrix(j: f64, delta: f64) -> [[f64; 4]; 4] {
    let p = pauli();
    let weights = [1.0, 1.0, delta];
    let mut h = [[Complex64::new(0.0, 0.0); 4]; 4];
    for (sigma, w) in p.iter().zip(weights) {
        for r in 0..4 {
            for c in 0..4 {
                h[r][c] += sigma[r >> 1][c >> 1] * sigma[r & 1][c & 1] * (0.25 * j * w);
            }
        }
    }
    let mut out = [[0.0; 4]; 4];
    for r in 0..4 {
        for c in 0..4 {
            debug_assert!(h[r][c].im.abs() < 1e-15);
            out[r][c] = h[r][c].re;
        }
    }
    out
}

fn assemble(spec: &HamiltonianSpec, configs: &[u64]) -> DMatrix<f64> {
    let h = bond_matrix(spec.j, spec.delta);
    let index: HashMap<u64, usize> = configs.iter().enumerate().map(|(i, &c)| (c, i)).collect();
    let dim = configs.len();
    let mut m = DMatrix::<f64>::zeros(dim, dim);
    for (col, &c) in configs.iter().enumerate() {
        for &(a, b) in spec.geometry.bonds() {
            let sa = ((c >> a) & 1) as usize;
            let sb = ((c >> b) & 1) as usize;
            let input = 2 * sa + sb;
            for (output, row_h) in h.iter().enumerate() {
                let v = row_h[input];
                if v == 0.0 {
                    continue;
                }
                let mut c2 = c & !((1u64 << a) | (1u64 << b));
                c2 |= ((output >> 1) as u64) << a;
                c2 |= ((output & 1) as u64) << b;
                let row = *index
                    .get(&c2)
                    .expect("bond operator left the magnetization sector");
                m[(row, col)] += v;
            }
        }
    }
    m
}

/// Full 2^n Hamiltonian matrix (n ≤ 12).
pub fn dense_hamiltonian(spec: &HamiltonianSpec) -> Result<DMatrix<f64>> {
    let n = spec.geometry.n();
    if n > 12 {
        return Err(Error::resource("full dense Hamiltonian limited to 12 sites"));
    }
    let configs: Vec<u64> = (0..1u64 << n).collect();
    Ok(assemble(spec, &configs))
}

/// Eigenvalues of the block with `n_down` down spins, ascending.
pub fn sector_spectrum(spec: &HamiltonianSpec, n_down: usize) -> Result<Vec<f64>> {
    let n = spec.geometry.n();
    if n > MAX_DENSE_SITES {
        return Err(Error::resource(format!("dense diagonalization limited to {MAX_DENSE_SITES} sites")));
    }
    let configs: Vec<u64> = (0..1u64 << n)
        .filter(|c| c.count_ones() as usize == n_down)
        .collect();
    let m = assemble(spec, &configs);
    let mut ev = crate::eigen::sym_eigenvalues(&m);
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

/// Lowest eigenvalue over every magnetization sector.
///
/// The global spin flip maps sector `k` onto `n − k`, so sectors with more
/// than `n/2` down spins are skipped.
pub fn dense_ground_energy(spec: &HamiltonianSpec) -> Result<f64> {
    let n = spec.geometry.n();
    let mut best = f64::INFINITY;
    for k in 0..=n / 2 {
        best = best.min(sector_spectrum(spec, k)?[0]);
    }
    Ok(best)
}
