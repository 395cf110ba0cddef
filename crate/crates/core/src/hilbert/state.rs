use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::basis::SectorBasis;
use crate::error::{Error, Result};
use crate::numeric;

/// Largest site count for which a full 2^n amplitude array is allowed.
pub const MAX_FULL_SITES: usize = 26;

const NORM_FLAG_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sector {
    /// All 2^n basis states.
    Full,
    /// Only configurations with exactly this many down spins.
    FixedDown(usize),
}

/// A pure n-qubit state.
///
/// Bit `i` of a basis index is the spin at site `i`, `0 = ↑`, `1 = ↓`.
/// Sector-compressed vectors store amplitudes only for the configurations of
/// one fixed-magnetization sector, in increasing integer order.
#[derive(Debug, Clone)]
pub struct StateVector {
    n: usize,
    basis: Option<Arc<SectorBasis>>,
    amplitudes: Vec<Complex64>,
    normalized: bool,
}

impl PartialEq for StateVector {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.sector() == other.sector() && self.amplitudes == other.amplitudes
    }
}

impl StateVector {
    pub fn full(n: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        if n > MAX_FULL_SITES {
            return Err(Error::resource(format!(
                "full amplitude arrays are limited to {MAX_FULL_SITES} sites"
            )));
        }
        if amplitudes.len() != 1usize << n {
            return Err(Error::domain(format!(
                "expected {} amplitudes for {n} sites, got {}",
                1usize << n,
                amplitudes.len()
            )));
        }
        Ok(Self::assemble(n, None, amplitudes))
    }

    pub fn in_sector(basis: Arc<SectorBasis>, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != basis.len() {
            return Err(Error::domain(format!(
                "expected {} sector amplitudes, got {}",
                basis.len(),
                amplitudes.len()
            )));
        }
        Ok(Self::assemble(basis.n(), Some(basis), amplitudes))
    }

    pub fn from_real_sector(basis: Arc<SectorBasis>, amplitudes: &[f64]) -> Result<Self> {
        Self::in_sector(basis, amplitudes.iter().map(|&a| Complex64::new(a, 0.0)).collect())
    }

    pub fn sector_zeros(basis: Arc<SectorBasis>) -> Self {
        let len = basis.len();
        Self::assemble(basis.n(), Some(basis), vec![Complex64::new(0.0, 0.0); len])
    }

    /// The computational basis state `config`, stored in its own sector.
    pub fn basis_state(n: usize, config: u64) -> Result<Self> {
        if config >> n != 0 {
            return Err(Error::domain(format!("configuration {config:#b} has bits beyond {n} sites")));
        }
        let basis = Arc::new(SectorBasis::new(n, config.count_ones() as usize)?);
        let mut state = Self::sector_zeros(basis);
        let idx = state.basis.as_ref().unwrap().index_unchecked(config);
        state.amplitudes[idx] = Complex64::new(1.0, 0.0);
        state.normalized = true;
        Ok(state)
    }

    /// Product state from per-site spins, `true` meaning ↓.
    pub fn product(spins_down: &[bool]) -> Result<Self> {
        let config = spins_down
            .iter()
            .enumerate()
            .fold(0u64, |acc, (i, &d)| if d { acc | (1 << i) } else { acc });
        Self::basis_state(spins_down.len(), config)
    }

    fn assemble(n: usize, basis: Option<Arc<SectorBasis>>, amplitudes: Vec<Complex64>) -> Self {
        let norm_sq = numeric::norm_sq_c(&amplitudes);
        Self {
            n,
            basis,
            amplitudes,
            normalized: (norm_sq - 1.0).abs() < NORM_FLAG_TOL,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn sector(&self) -> Sector {
        match &self.basis {
            None => Sector::Full,
            Some(b) => Sector::FixedDown(b.n_down()),
        }
    }

    pub fn basis(&self) -> Option<&Arc<SectorBasis>> {
        self.basis.as_ref()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// Mutable access clears the normalization flag.
    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        self.normalized = false;
        &mut self.amplitudes
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    #[inline]
    pub fn config_at(&self, index: usize) -> u64 {
        match &self.basis {
            None => index as u64,
            Some(b) => b.config(index),
        }
    }

    pub fn index_of(&self, config: u64) -> Option<usize> {
        match &self.basis {
            None => (config >> self.n == 0).then_some(config as usize),
            Some(b) => b.index_of(config),
        }
    }

    pub fn amplitude(&self, config: u64) -> Complex64 {
        self.index_of(config)
            .map(|i| self.amplitudes[i])
            .unwrap_or_default()
    }

    /// `(config, amplitude)` pairs with a nonzero amplitude.
    pub fn iter_nonzero(&self) -> impl Iterator<Item = (u64, Complex64)> + '_ {
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(_, a)| a.re != 0.0 || a.im != 0.0)
            .map(move |(i, &a)| (self.config_at(i), a))
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn norm_sq(&self) -> f64 {
        numeric::norm_sq_c(&self.amplitudes)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn normalize(&mut self) -> Result<()> {
        let norm = self.norm();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::domain("cannot normalize a zero or non-finite state"));
        }
        let inv = 1.0 / norm;
        for a in &mut self.amplitudes {
            *a *= inv;
        }
        self.normalized = true;
        Ok(())
    }

    pub fn normalized(mut self) -> Result<Self> {
        self.normalize()?;
        Ok(self)
    }

    pub fn is_real(&self) -> bool {
        self.amplitudes.iter().all(|a| a.im == 0.0)
    }

    pub fn real_parts(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.re).collect()
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if self.n != other.n {
            return Err(Error::domain(format!(
                "inner product between {}-site and {}-site states",
                self.n, other.n
            )));
        }
        if self.sector() == other.sector() {
            return Ok(numeric::dot_c(&self.amplitudes, &other.amplitudes));
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for (config, a) in self.iter_nonzero() {
            acc += a.conj() * other.amplitude(config);
        }
        Ok(acc)
    }

    /// |⟨a|b⟩| / (‖a‖‖b‖).
    pub fn fidelity(&self, other: &StateVector) -> Result<f64> {
        let denom = self.norm() * other.norm();
        if denom == 0.0 {
            return Err(Error::domain("fidelity with a zero state"));
        }
        Ok(self.inner(other)?.norm() / denom)
    }

    pub fn to_full(&self) -> Result<StateVector> {
        if self.basis.is_none() {
            return Ok(self.clone());
        }
        if self.n > MAX_FULL_SITES {
            return Err(Error::resource(format!("cannot expand {} sites to a full vector", self.n)));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1usize << self.n];
        for (config, a) in self.iter_nonzero() {
            amps[config as usize] = a;
        }
        let mut out = Self::full(self.n, amps)?;
        out.normalized = self.normalized;
        Ok(out)
    }

    /// Re-expresses the state in the single sector holding all its weight.
    pub fn compressed(&self) -> Result<StateVector> {
        if self.basis.is_some() {
            return Ok(self.clone());
        }
        let mut pop = None;
        for (config, _) in self.iter_nonzero() {
            let p = config.count_ones() as usize;
            match pop {
                None => pop = Some(p),
                Some(q) if q != p => {
                    return Err(Error::domain("state spans several magnetization sectors"));
                }
                _ => {}
            }
        }
        let n_down = pop.ok_or_else(|| Error::domain("cannot compress the zero vector"))?;
        let basis = Arc::new(SectorBasis::new(self.n, n_down)?);
        let amps = basis
            .states()
            .iter()
            .map(|&c| self.amplitudes[c as usize])
            .collect();
        let mut out = Self::in_sector(basis, amps)?;
        out.normalized = self.normalized;
        Ok(out)
    }

    /// Relabels sites: the spin at site `i` moves to site `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<StateVector> {
        if perm.len() != self.n {
            return Err(Error::domain("permutation length differs from the site count"));
        }
        let mut seen = vec![false; self.n];
        for &p in perm {
            if p >= self.n || std::mem::replace(&mut seen[p], true) {
                return Err(Error::domain("not a permutation"));
            }
        }
        let map = |config: u64| {
            let mut out = 0u64;
            for (i, &p) in perm.iter().enumerate() {
                out |= ((config >> i) & 1) << p;
            }
            out
        };
        let mut amps = vec![Complex64::new(0.0, 0.0); self.len()];
        for (config, a) in self.iter_nonzero() {
            let idx = self.index_of(map(config)).expect("permutation preserves the sector");
            amps[idx] = a;
        }
        let mut out = match &self.basis {
            None => Self::full(self.n, amps)?,
            Some(b) => Self::in_sector(b.clone(), amps)?,
        };
        out.normalized = self.normalized;
        Ok(out)
    }

    /// Applies a 2×2 unitary `[[u00, u01], [u10, u11]]` on `site`
    /// (rows = output spin). The result is a full vector.
    pub fn apply_single_site(&self, site: usize, u: [[Complex64; 2]; 2]) -> Result<StateVector> {
        if site >= self.n {
            return Err(Error::domain(format!("site {site} out of range")));
        }
        let full = self.to_full()?;
        let mut amps = full.amplitudes.clone();
        let bit = 1usize << site;
        for idx in 0..amps.len() {
            if idx & bit == 0 {
                let a0 = full.amplitudes[idx];
                let a1 = full.amplitudes[idx | bit];
                amps[idx] = u[0][0] * a0 + u[0][1] * a1;
                amps[idx | bit] = u[1][0] * a0 + u[1][1] * a1;
            }
        }
        let mut out = Self::full(self.n, amps)?;
        out.normalized = self.normalized;
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn norm_flag_tracks_construction() {
        let s = StateVector::full(1, vec![c(1.0), c(1.0)]).unwrap();
        assert!(!s.is_normalized());
        let s = s.normalized().unwrap();
        assert!(s.is_normalized());
        assert!((s.norm() - 1.0).abs() < 1e-15);
        let mut t = s.clone();
        t.amplitudes_mut()[0] = c(0.0);
        assert!(!t.is_normalized());
    }

    #[test]
    fn compress_and_expand() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let singlet = StateVector::full(2, vec![c(0.0), c(h), c(-h), c(0.0)]).unwrap();
        let sec = singlet.compressed().unwrap();
        assert_eq!(sec.sector(), Sector::FixedDown(1));
        assert_eq!(sec.len(), 2);
        assert_eq!(sec.to_full().unwrap(), singlet);
        assert!((sec.inner(&singlet).unwrap().re - 1.0).abs() < 1e-15);
        let mixed = StateVector::full(1, vec![c(h), c(h)]).unwrap();
        assert!(mixed.compressed().is_err());
    }

    #[test]
    fn permutation_moves_spins() {
        let s = StateVector::product(&[true, false, false]).unwrap();
        let p = s.permuted(&[2, 0, 1]).unwrap();
        assert_eq!(p.amplitude(0b100), c(1.0));
        assert!(s.permuted(&[0, 0, 1]).is_err());
    }

    #[test]
    fn zero_state_cannot_normalize() {
        let mut z = StateVector::full(2, vec![c(0.0); 4]).unwrap();
        assert!(z.normalize().is_err());
        assert!(StateVector::full(2, vec![c(0.0); 3]).is_err());
    }
}
