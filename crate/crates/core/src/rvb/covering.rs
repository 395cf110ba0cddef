//! Nearest-neighbor dimer coverings and the singlet products they carry.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::LadderGeometry;

/// A perfect matching of the bond graph; every pair is `(a, b)` with `a` on
/// sublattice A and `b` on sublattice B, listed by increasing lower site.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DimerCovering {
    pairs: Vec<(usize, usize)>,
}

impl DimerCovering {
    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Checks the covering against `geometry`: every site once, every pair
    /// a bond, every pair oriented A → B.
    pub fn validate(&self, geometry: &LadderGeometry) -> Result<()> {
        let mut seen = vec![false; geometry.n()];
        for &(a, b) in &self.pairs {
            if a >= geometry.n() || b >= geometry.n() || !geometry.has_bond(a, b) {
                return Err(Error::domain(format!("({a}, {b}) is not a bond")));
            }
            if !geometry.is_a(a) || geometry.is_a(b) {
                return Err(Error::domain(format!("({a}, {b}) is not oriented A -> B")));
            }
            for s in [a, b] {
                if std::mem::replace(&mut seen[s], true) {
                    return Err(Error::domain(format!("site {s} covered twice")));
                }
            }
        }
        if let Some(s) = seen.iter().position(|&x| !x) {
            return Err(Error::domain(format!("site {s} left uncovered")));
        }
        Ok(())
    }
}

/// All perfect matchings of a graph on `n` vertices, as sorted `(lo, hi)`
/// pair lists in lexicographic order.
pub(crate) fn perfect_matchings(n: usize, adjacency: &[Vec<usize>]) -> Vec<Vec<(usize, usize)>> {
    fn extend(adj: &[Vec<usize>], used: &mut [bool], current: &mut Vec<(usize, usize)>, out: &mut Vec<Vec<(usize, usize)>>) {
        let Some(s) = used.iter().position(|&u| !u) else {
            out.push(current.clone());
            return;
        };
        used[s] = true;
        for &p in &adj[s] {
            if !used[p] {
                used[p] = true;
                current.push((s, p));
                extend(adj, used, current, out);
                current.pop();
                used[p] = false;
            }
        }
        used[s] = false;
    }

    if n == 0 {
        return vec![Vec::new()];
    }
    if n % 2 == 1 {
        return Vec::new();
    }
    let mut adj: Vec<Vec<usize>> = adjacency.to_vec();
    for a in &mut adj {
        a.sort_unstable();
        a.dedup();
    }
    // the lowest site's partners split the search into independent subtrees
    adj[0]
        .par_iter()
        .map(|&p| {
            let mut used = vec![false; n];
            used[0] = true;
            used[p] = true;
            let mut current = vec![(0, p)];
            let mut out = Vec::new();
            extend(&adj, &mut used, &mut current, &mut out);
            out
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}

fn require_rvb_geometry(geometry: &LadderGeometry) -> Result<()> {
    if geometry.n() % 2 == 1 {
        return Err(Error::domain(format!(
            "{} sites cannot be covered by dimers",
            geometry.n()
        )));
    }
    if !geometry.is_bipartite() {
        return Err(Error::domain(format!(
            "{} is not bipartite (odd ring around the wrap)",
            geometry.label()
        )));
    }
    Ok(())
}

/// Every nearest-neighbor dimer covering of `geometry`.
///
/// An empty list is a valid answer. Odd site counts and non-bipartite
/// periodic ladders are rejected.
pub fn enumerate_dimer_coverings(geometry: &LadderGeometry) -> Result<Vec<DimerCovering>> {
    require_rvb_geometry(geometry)?;
    if geometry.n() > 64 {
        return Err(Error::resource("covering enumeration is limited to 64 sites"));
    }
    Ok(perfect_matchings(geometry.n(), &geometry.adjacency())
        .into_iter()
        .map(|pairs| DimerCovering {
            pairs: pairs
                .into_iter()
                .map(|(s, p)| if geometry.is_a(s) { (s, p) } else { (p, s) })
                .collect(),
        })
        .collect())
}

/// Adds `weight · Π singlets(pairs)` into `acc`, keyed by configuration.
///
/// A singlet on `(a, b)` is `(|↑_a ↓_b⟩ − |↓_a ↑_b⟩)/√2`.
pub(crate) fn accumulate_singlet_product(pairs: &[(usize, usize)], weight: f64, acc: &mut BTreeMap<u64, f64>) {
    let d = pairs.len();
    let amp = weight * FRAC_1_SQRT_2.powi(d as i32);
    for mask in 0u64..(1u64 << d) {
        let mut config = 0u64;
        for (t, &(a, b)) in pairs.iter().enumerate() {
            config |= 1u64 << if mask >> t & 1 == 1 { a } else { b };
        }
        let sign = if mask.count_ones() % 2 == 1 { -1.0 } else { 1.0 };
        *acc.entry(config).or_insert(0.0) += sign * amp;
    }
}

/// Coverings as JSON: an array of coverings, each an array of `[a, b]` pairs.
pub fn coverings_to_json(coverings: &[DimerCovering]) -> Result<String> {
    Ok(serde_json::to_string(coverings)?)
}

/// Parses [`coverings_to_json`] output and validates it against `geometry`.
pub fn coverings_from_json(text: &str, geometry: &LadderGeometry) -> Result<Vec<DimerCovering>> {
    let coverings: Vec<DimerCovering> = serde_json::from_str(text)?;
    for c in &coverings {
        c.validate(geometry)?;
    }
    Ok(coverings)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_ladder, Boundary};

    /// Permanent of a 0/1 matrix by Ryser's formula.
    fn permanent(m: &[Vec<u8>]) -> i64 {
        let k = m.len();
        let mut total = 0i64;
        for mask in 1u32..(1 << k) {
            let mut prod = 1i64;
            for row in m {
                prod *= (0..k).filter(|&c| mask >> c & 1 == 1).map(|c| row[c] as i64).sum::<i64>();
            }
            let sign = if (k - mask.count_ones() as usize).is_multiple_of(2) { 1 } else { -1 };
            total += sign * prod;
        }
        total
    }

    /// Matchings of a bipartite graph = permanent of its A×B biadjacency.
    fn count_by_permanent(g: &LadderGeometry) -> i64 {
        let a: Vec<usize> = (0..g.n()).filter(|&s| g.is_a(s)).collect();
        let b: Vec<usize> = (0..g.n()).filter(|&s| !g.is_a(s)).collect();
        if a.len() != b.len() {
            return 0;
        }
        let m: Vec<Vec<u8>> = a
            .iter()
            .map(|&x| b.iter().map(|&y| g.has_bond(x, y) as u8).collect())
            .collect();
        permanent(&m)
    }

    #[test]
    fn small_counts() {
        let plaquette = build_ladder(2, 2, Boundary::Open).unwrap();
        assert_eq!(enumerate_dimer_coverings(&plaquette).unwrap().len(), 2);
        let chain = enumerate_dimer_coverings(&build_ladder(1, 4, Boundary::Open).unwrap()).unwrap();
        assert_eq!(chain.len(), 1);
        assert_eq!(chain[0].pairs(), &[(0, 1), (2, 3)]);
        let ladder = build_ladder(2, 3, Boundary::Open).unwrap();
        assert_eq!(enumerate_dimer_coverings(&ladder).unwrap().len(), 3);
        let ring = build_ladder(1, 4, Boundary::PeriodicAlongLegs).unwrap();
        assert_eq!(enumerate_dimer_coverings(&ring).unwrap().len(), 2);
    }

    #[test]
    fn counts_match_permanent_oracle() {
        for legs in 1..=4 {
            for rungs in 1..=6 {
                for boundary in [Boundary::Open, Boundary::PeriodicAlongLegs] {
                    let Ok(g) = build_ladder(legs, rungs, boundary) else { continue };
                    if g.n() % 2 == 1 || !g.is_bipartite() || g.n() > 20 {
                        continue;
                    }
                    let found = enumerate_dimer_coverings(&g).unwrap();
                    assert_eq!(found.len() as i64, count_by_permanent(&g), "{}", g.label());
                    for c in &found {
                        c.validate(&g).unwrap();
                    }
                    let keys: Vec<Vec<(usize, usize)>> = found
                        .iter()
                        .map(|c| c.pairs().iter().map(|&(a, b)| (a.min(b), a.max(b))).collect())
                        .collect();
                    let mut sorted_keys = keys.clone();
                    sorted_keys.sort();
                    assert_eq!(keys, sorted_keys);
                }
            }
        }
    }

    #[test]
    fn rejects_unusable_geometries() {
        let odd = build_ladder(1, 3, Boundary::Open).unwrap();
        assert!(matches!(enumerate_dimer_coverings(&odd), Err(Error::Domain(_))));
        let frustrated = build_ladder(2, 3, Boundary::PeriodicAlongLegs).unwrap();
        assert!(matches!(enumerate_dimer_coverings(&frustrated), Err(Error::Domain(_))));
    }

    #[test]
    fn json_round_trip() {
        let g = build_ladder(2, 4, Boundary::Open).unwrap();
        let c = enumerate_dimer_coverings(&g).unwrap();
        let text = coverings_to_json(&c).unwrap();
        assert!(text.starts_with("[[[0,1],"));
        assert_eq!(coverings_from_json(&text, &g).unwrap(), c);
        assert!(coverings_from_json("[[[1,0],[2,3],[4,5],[6,7]]]", &g).is_err());
    }

    #[test]
    fn singlet_amplitudes() {
        let mut acc = BTreeMap::new();
        accumulate_singlet_product(&[(0, 1)], 1.0, &mut acc);
        // |↑0 ↓1⟩ is config 0b10
        assert!((acc[&0b10] - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((acc[&0b01] + FRAC_1_SQRT_2).abs() < 1e-15);
    }
}
