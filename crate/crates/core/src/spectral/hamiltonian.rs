use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hilbert::{SectorBasis, StateVector};
use crate::lattice::LadderGeometry;
use crate::numeric;

/// `H = (J/4) Σ_bonds (σˣσˣ + σʸσʸ + Δ σᶻσᶻ)` on a ladder.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianSpec {
    pub geometry: LadderGeometry,
    pub j: f64,
    pub delta: f64,
}

impl HamiltonianSpec {
    pub fn new(geometry: LadderGeometry, j: f64, delta: f64) -> Result<Self> {
        if !(j > 0.0 && j.is_finite()) {
            return Err(Error::domain(format!("coupling J must be positive, got {j}")));
        }
        if !delta.is_finite() {
            return Err(Error::domain("anisotropy must be finite"));
        }
        Ok(Self { geometry, j, delta })
    }

    pub fn heisenberg(geometry: LadderGeometry) -> Self {
        Self {
            geometry,
            j: 1.0,
            delta: 1.0,
        }
    }

    pub fn operator(&self) -> XxzOperator {
        XxzOperator {
            n: self.geometry.n(),
            bonds: self.geometry.bonds().to_vec(),
            j: self.j,
            delta: self.delta,
        }
    }
}

/// Matrix-free XXZ operator on an arbitrary bond list.
///
/// Per bond the diagonal contributes `+JΔ/4` on aligned and `−JΔ/4` on
/// anti-aligned spins; the exchange term flips anti-aligned pairs with
/// amplitude `J/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct XxzOperator {
    n: usize,
    bonds: Vec<(usize, usize)>,
    j: f64,
    delta: f64,
}

impl XxzOperator {
    pub fn new(n: usize, bonds: Vec<(usize, usize)>, j: f64, delta: f64) -> Result<Self> {
        if let Some(&(a, b)) = bonds.iter().find(|&&(a, b)| a >= n || b >= n || a == b) {
            return Err(Error::domain(format!("invalid bond ({a}, {b}) on {n} sites")));
        }
        Ok(Self { n, bonds, j, delta })
    }

    /// `Σ_{i<j} S_i·S_j` over every pair of sites, so that
    /// `⟨S²_total⟩ = 3n/4 + 2 ⟨this⟩`.
    pub fn all_pairs_exchange(n: usize) -> Self {
        let bonds = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
        Self {
            n,
            bonds,
            j: 1.0,
            delta: 1.0,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Rigorous bound on the spectral norm: Σ_bonds J(|Δ|/4 + 1/2).
    pub fn norm_bound(&self) -> f64 {
        self.bonds.len() as f64 * self.j.abs() * (self.delta.abs() / 4.0 + 0.5)
    }

    #[inline]
    fn diagonal(&self, config: u64) -> f64 {
        let quarter = 0.25 * self.j * self.delta;
        self.bonds
            .iter()
            .map(|&(a, b)| {
                if ((config >> a) ^ (config >> b)) & 1 == 0 {
                    quarter
                } else {
                    -quarter
                }
            })
            .sum()
    }

    /// y = H x on a sector, real amplitudes. Each output element is
    /// gathered independently, so the result does not depend on threading.
    pub fn apply_real(&self, basis: &SectorBasis, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), basis.len());
        let flip = 0.5 * self.j;
        y.par_iter_mut().enumerate().for_each(|(i, yi)| {
            let c = basis.config(i);
            let mut acc = self.diagonal(c) * x[i];
            for &(a, b) in &self.bonds {
                if ((c >> a) ^ (c >> b)) & 1 == 1 {
                    let flipped = c ^ ((1u64 << a) | (1u64 << b));
                    acc += flip * x[basis.index_unchecked(flipped)];
                }
            }
            *yi = acc;
        });
    }

    /// H|ψ⟩ for a sector-compressed or full state.
    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        if state.n() != self.n {
            return Err(Error::domain(format!(
                "state has {} sites, Hamiltonian acts on {}",
                state.n(),
                self.n
            )));
        }
        let flip = 0.5 * self.j;
        let amps = state.amplitudes();
        let mut out = vec![Complex64::new(0.0, 0.0); amps.len()];
        out.par_iter_mut().enumerate().for_each(|(i, yi)| {
            let c = state.config_at(i);
            let mut acc = amps[i] * self.diagonal(c);
            for &(a, b) in &self.bonds {
                if ((c >> a) ^ (c >> b)) & 1 == 1 {
                    let flipped = c ^ ((1u64 << a) | (1u64 << b));
                    let j = state.index_of(flipped).expect("exchange preserves magnetization");
                    acc += amps[j] * flip;
                }
            }
            *yi = acc;
        });
        match state.basis() {
            Some(b) => StateVector::in_sector(b.clone(), out),
            None => StateVector::full(self.n, out),
        }
    }

    /// ⟨ψ|H|ψ⟩ / ⟨ψ|ψ⟩.
    pub fn expectation(&self, state: &StateVector) -> Result<f64> {
        let h_psi = self.apply(state)?;
        let num = numeric::dot_c(state.amplitudes(), h_psi.amplitudes()).re;
        let den = state.norm_sq();
        if den == 0.0 {
            return Err(Error::domain("expectation value in the zero state"));
        }
        Ok(num / den)
    }
}

/// H|ψ⟩ for the ladder Hamiltonian `spec`.
pub fn apply_hamiltonian(spec: &HamiltonianSpec, state: &StateVector) -> Result<StateVector> {
    spec.operator().apply(state)
}

/// ⟨S²_total⟩ of a normalized or unnormalized state.
pub fn total_spin_squared(state: &StateVector) -> Result<f64> {
    let n = state.n() as f64;
    let pairs = XxzOperator::all_pairs_exchange(state.n()).expectation(state)?;
    Ok(0.75 * n + 2.0 * pairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_ladder, Boundary};
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn two_site() -> HamiltonianSpec {
        HamiltonianSpec::heisenberg(build_ladder(1, 2, Boundary::Open).unwrap())
    }

    #[test]
    fn singlet_and_triplet_eigenvalues() {
        let h = FRAC_1_SQRT_2;
        let singlet = StateVector::full(2, vec![c(0.0), c(h), c(-h), c(0.0)]).unwrap();
        let out = apply_hamiltonian(&two_site(), &singlet).unwrap();
        for (a, b) in out.amplitudes().iter().zip(singlet.amplitudes()) {
            assert!((a - b * -0.75).norm() < 1e-15);
        }
        let triplet = StateVector::full(2, vec![c(0.0), c(1.0), c(1.0), c(0.0)]).unwrap();
        let out = apply_hamiltonian(&two_site(), &triplet).unwrap();
        for (a, b) in out.amplitudes().iter().zip(triplet.amplitudes()) {
            assert!((a - b * 0.25).norm() < 1e-15);
        }
    }

    #[test]
    fn singlet_has_zero_total_spin() {
        let h = FRAC_1_SQRT_2;
        let singlet = StateVector::full(2, vec![c(0.0), c(h), c(-h), c(0.0)]).unwrap();
        assert!(total_spin_squared(&singlet).unwrap().abs() < 1e-14);
        let up = StateVector::product(&[false, false]).unwrap();
        assert!((total_spin_squared(&up).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_mismatched_state() {
        let s = StateVector::product(&[false, true, false]).unwrap();
        assert!(matches!(apply_hamiltonian(&two_site(), &s), Err(Error::Domain(_))));
        assert!(HamiltonianSpec::new(build_ladder(1, 2, Boundary::Open).unwrap(), -1.0, 1.0).is_err());
    }

    #[test]
    fn sector_and_full_paths_agree() {
        let spec = HamiltonianSpec::new(build_ladder(2, 3, Boundary::Open).unwrap(), 1.3, 1.2).unwrap();
        let basis = std::sync::Arc::new(SectorBasis::sz_zero(6).unwrap());
        let x: Vec<f64> = (0..basis.len()).map(|i| ((i * 31) % 17) as f64 - 8.0).collect();
        let mut y = vec![0.0; x.len()];
        spec.operator().apply_real(&basis, &x, &mut y);
        let state = StateVector::from_real_sector(basis.clone(), &x).unwrap();
        let full_out = apply_hamiltonian(&spec, &state.to_full().unwrap()).unwrap();
        for (i, &yi) in y.iter().enumerate() {
            assert!((full_out.amplitude(basis.config(i)).re - yi).abs() < 1e-12);
        }
    }
}
