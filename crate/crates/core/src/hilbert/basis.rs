//! Fixed-magnetization basis enumeration and fast config → index ranking.
//!
//! Bit `i` of a configuration is the spin at site `i`; a set bit is a down
//! spin. A sector is the set of configurations with a fixed number of down
//! spins, listed in increasing integer order.

use crate::error::{Error, Result};

/// Largest system size the sector machinery accepts.
pub const MAX_SITES: usize = 30;

pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u64 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u64 / (i + 1) as u64;
    }
    acc
}

/// All `n`-bit integers with exactly `n / 2` set bits, increasing.
pub fn sz_zero_basis(n: usize) -> Result<Vec<u64>> {
    if n == 0 || !n.is_multiple_of(2) {
        return Err(Error::domain(format!("Sz = 0 sector needs an even positive site count, got {n}")));
    }
    fixed_down_configs(n, n / 2)
}

/// All `n`-bit integers with exactly `n_down` set bits, increasing.
pub fn fixed_down_configs(n: usize, n_down: usize) -> Result<Vec<u64>> {
    if n > MAX_SITES {
        return Err(Error::resource(format!("{n} sites exceeds the basis limit of {MAX_SITES}")));
    }
    if n_down > n {
        return Err(Error::domain(format!("{n_down} down spins on {n} sites")));
    }
    let len = binomial(n, n_down) as usize;
    let mut out = Vec::with_capacity(len);
    if n_down == 0 {
        out.push(0);
        return Ok(out);
    }
    let limit: u64 = 1u64 << n;
    let mut v: u64 = (1u64 << n_down) - 1;
    while v < limit {
        out.push(v);
        // Gosper's hack: next integer with the same popcount
        let t = v | (v - 1);
        let nt = !t;
        v = (t + 1) | (((nt & nt.wrapping_neg()) - 1) >> (v.trailing_zeros() + 1));
    }
    debug_assert_eq!(out.len(), len);
    Ok(out)
}

/// A fixed-popcount sector with O(1) ranking.
///
/// Ranking splits a configuration into a high and a low half: states sharing
/// the same high half are contiguous in increasing order, so the index is the
/// offset of the high half plus the rank of the low half among low halves of
/// the required popcount.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SectorBasis {
    n: usize,
    n_down: usize,
    states: Vec<u64>,
    lo_bits: u32,
    lo_rank: Vec<u32>,
    hi_offset: Vec<u64>,
}

const NO_OFFSET: u64 = u64::MAX;

impl SectorBasis {
    pub fn new(n: usize, n_down: usize) -> Result<Self> {
        let states = fixed_down_configs(n, n_down)?;
        let lo_bits = (n / 2) as u32;
        let hi_bits = n as u32 - lo_bits;

        let mut lo_rank = vec![0u32; 1usize << lo_bits];
        let mut seen_per_pop = vec![0u32; lo_bits as usize + 1];
        for (lo, slot) in lo_rank.iter_mut().enumerate() {
            let pop = (lo as u64).count_ones() as usize;
            *slot = seen_per_pop[pop];
            seen_per_pop[pop] += 1;
        }

        let mut hi_offset = vec![NO_OFFSET; 1usize << hi_bits];
        let mut offset = 0u64;
        for (hi, slot) in hi_offset.iter_mut().enumerate() {
            let pop = (hi as u64).count_ones() as usize;
            if pop <= n_down && n_down - pop <= lo_bits as usize {
                *slot = offset;
                offset += binomial(lo_bits as usize, n_down - pop);
            }
        }
        debug_assert_eq!(offset as usize, states.len());

        Ok(Self {
            n,
            n_down,
            states,
            lo_bits,
            lo_rank,
            hi_offset,
        })
    }

    pub fn sz_zero(n: usize) -> Result<Self> {
        if n == 0 || !n.is_multiple_of(2) {
            return Err(Error::domain(format!("Sz = 0 sector needs an even positive site count, got {n}")));
        }
        Self::new(n, n / 2)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn n_down(&self) -> usize {
        self.n_down
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[u64] {
        &self.states
    }

    #[inline]
    pub fn config(&self, index: usize) -> u64 {
        self.states[index]
    }

    /// Index of `config`, assuming it lies in the sector.
    #[inline]
    pub fn index_unchecked(&self, config: u64) -> usize {
        let lo = (config & ((1u64 << self.lo_bits) - 1)) as usize;
        let hi = (config >> self.lo_bits) as usize;
        (self.hi_offset[hi] + self.lo_rank[lo] as u64) as usize
    }

    pub fn index_of(&self, config: u64) -> Option<usize> {
        if config >> self.n != 0 || config.count_ones() as usize != self.n_down {
            return None;
        }
        Some(self.index_unchecked(config))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_sectors() {
        assert_eq!(sz_zero_basis(2).unwrap(), vec![0b01, 0b10]);
        assert_eq!(sz_zero_basis(4).unwrap().len(), 6);
        assert_eq!(sz_zero_basis(8).unwrap().len(), 70);
        assert!(matches!(sz_zero_basis(3), Err(Error::Domain(_))));
    }

    #[test]
    fn enumeration_matches_filter() {
        for n in 1..=12 {
            for k in 0..=n {
                let direct: Vec<u64> = (0..1u64 << n).filter(|c| c.count_ones() as usize == k).collect();
                assert_eq!(fixed_down_configs(n, k).unwrap(), direct);
            }
        }
    }

    #[test]
    fn ranking_inverts_listing() {
        for n in 1..=14 {
            for k in 0..=n {
                let b = SectorBasis::new(n, k).unwrap();
                for (i, &c) in b.states().iter().enumerate() {
                    assert_eq!(b.index_of(c), Some(i));
                }
                if n > 1 {
                    let wrong = if k == 0 { 1 } else { 0 };
                    assert_eq!(b.index_of(wrong), None);
                }
            }
        }
    }

    #[test]
    fn supports_twenty_four_sites() {
        let b = SectorBasis::sz_zero(24).unwrap();
        assert_eq!(b.len() as u64, binomial(24, 12));
        let c = b.config(1_234_567);
        assert_eq!(b.index_of(c), Some(1_234_567));
    }
}
