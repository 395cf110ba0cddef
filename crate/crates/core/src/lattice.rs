//! Ladder geometry: site indexing, nearest-neighbour bonds, sublattices.
//!
//! Sites are indexed rung-major: `site = rung * legs + leg`. The two rungs
//! of a 2×L block at rungs `r, r + 1` therefore occupy the contiguous index
//! range `r * legs .. (r + 2) * legs`.
//!
//! Periodicity only ever wraps the leg direction (rung `M − 1` back to rung
//! `0`); the rung direction is always open.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Boundary {
    #[serde(rename = "open")]
    Open,
    #[serde(rename = "periodic")]
    PeriodicAlongLegs,
}

impl Boundary {
    pub fn as_str(&self) -> &'static str {
        match self {
            Boundary::Open => "open",
            Boundary::PeriodicAlongLegs => "periodic",
        }
    }
}

impl fmt::Display for Boundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Boundary {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "open" | "obc" => Ok(Boundary::Open),
            "periodic" | "pbc" | "periodic-along-legs" => Ok(Boundary::PeriodicAlongLegs),
            other => Err(Error::domain(format!("unknown boundary mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sublattice {
    A,
    B,
}

/// An L-legged, M-rung ladder. Immutable after construction.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LadderGeometry {
    legs: usize,
    rungs: usize,
    boundary: Boundary,
    bonds: Vec<(usize, usize)>,
}

/// Builds the ladder bond list. See the module docs for the indexing.
pub fn build_ladder(legs: usize, rungs: usize, boundary: Boundary) -> Result<LadderGeometry> {
    LadderGeometry::new(legs, rungs, boundary)
}

impl LadderGeometry {
    pub fn new(legs: usize, rungs: usize, boundary: Boundary) -> Result<Self> {
        if legs == 0 || rungs == 0 {
            return Err(Error::domain(format!(
                "ladder needs at least one leg and one rung, got {legs}x{rungs}"
            )));
        }
        if boundary == Boundary::PeriodicAlongLegs && rungs < 3 {
            return Err(Error::BoundaryConflict(format!(
                "periodic wrap with {rungs} rung(s) would duplicate an existing bond; need at least 3"
            )));
        }
        let site = |rung: usize, leg: usize| rung * legs + leg;
        let mut bonds = Vec::new();
        for rung in 0..rungs {
            for leg in 0..legs.saturating_sub(1) {
                bonds.push((site(rung, leg), site(rung, leg + 1)));
            }
        }
        for rung in 0..rungs - 1 {
            for leg in 0..legs {
                bonds.push((site(rung, leg), site(rung + 1, leg)));
            }
        }
        if boundary == Boundary::PeriodicAlongLegs {
            for leg in 0..legs {
                bonds.push((site(0, leg), site(rungs - 1, leg)));
            }
        }
        bonds.sort_unstable();
        Ok(Self {
            legs,
            rungs,
            boundary,
            bonds,
        })
    }

    pub fn legs(&self) -> usize {
        self.legs
    }

    pub fn rungs(&self) -> usize {
        self.rungs
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    /// Number of sites, `legs * rungs`.
    pub fn n(&self) -> usize {
        self.legs * self.rungs
    }

    /// Bonds as `(i, j)` with `i < j`, sorted.
    pub fn bonds(&self) -> &[(usize, usize)] {
        &self.bonds
    }

    pub fn site(&self, rung: usize, leg: usize) -> usize {
        debug_assert!(rung < self.rungs && leg < self.legs);
        rung * self.legs + leg
    }

    pub fn rung_of(&self, site: usize) -> usize {
        site / self.legs
    }

    pub fn leg_of(&self, site: usize) -> usize {
        site % self.legs
    }

    /// Sites of rung `r`, in leg order.
    pub fn rung_sites(&self, rung: usize) -> std::ops::Range<usize> {
        rung * self.legs..(rung + 1) * self.legs
    }

    pub fn sublattice_of(&self, site: usize) -> Result<Sublattice> {
        if site >= self.n() {
            return Err(Error::domain(format!(
                "site {site} out of range for {} sites",
                self.n()
            )));
        }
        Ok(self.sublattice_unchecked(site))
    }

    pub(crate) fn sublattice_unchecked(&self, site: usize) -> Sublattice {
        if (self.rung_of(site) + self.leg_of(site)).is_multiple_of(2) {
            Sublattice::A
        } else {
            Sublattice::B
        }
    }

    pub fn is_a(&self, site: usize) -> bool {
        self.sublattice_unchecked(site) == Sublattice::A
    }

    /// True when every bond joins an A site to a B site.
    pub fn is_bipartite(&self) -> bool {
        self.bonds.iter().all(|&(i, j)| self.is_a(i) != self.is_a(j))
    }

    pub fn has_bond(&self, i: usize, j: usize) -> bool {
        let key = if i < j { (i, j) } else { (j, i) };
        self.bonds.binary_search(&key).is_ok()
    }

    /// Neighbour lists, each sorted ascending.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n()];
        for &(i, j) in &self.bonds {
            adj[i].push(j);
            adj[j].push(i);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }

    pub fn is_connected(&self) -> bool {
        let adj = self.adjacency();
        let mut seen = vec![false; self.n()];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(s) = stack.pop() {
            for &t in &adj[s] {
                if !seen[t] {
                    seen[t] = true;
                    stack.push(t);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    pub fn label(&self) -> String {
        format!("{}x{}-{}", self.legs, self.rungs, self.boundary)
    }
}

#[derive(Serialize, Deserialize)]
struct GeometryRecord {
    legs: usize,
    rungs: usize,
    boundary: Boundary,
    bonds: Vec<[usize; 2]>,
}

impl Serialize for LadderGeometry {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        GeometryRecord {
            legs: self.legs,
            rungs: self.rungs,
            boundary: self.boundary,
            bonds: self.bonds.iter().map(|&(i, j)| [i, j]).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for LadderGeometry {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let rec = GeometryRecord::deserialize(deserializer)?;
        let geometry =
            LadderGeometry::new(rec.legs, rec.rungs, rec.boundary).map_err(serde::de::Error::custom)?;
        let mut bonds: Vec<(usize, usize)> = rec
            .bonds
            .iter()
            .map(|&[i, j]| if i < j { (i, j) } else { (j, i) })
            .collect();
        bonds.sort_unstable();
        if bonds != geometry.bonds {
            return Err(serde::de::Error::custom(
                "bond list does not match the declared ladder shape",
            ));
        }
        Ok(geometry)
    }
}
