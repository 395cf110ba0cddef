//! Rung-transfer recursion for RVB ladders.
//!
//! The ladder is cut into a chain of super-sites (one rung each for open
//! ladders; rung `k` together with rung `M − 1 − k` for periodic ones, which
//! turns the ring into a chain). Every covering crosses each cut through a
//! set of lanes, one lane per bond joining neighboring super-sites. The bond
//! state of a cut is one base-3 digit per lane: `0` unused, `1` the lane's
//! dimer has its left spin up, `2` left spin down.
//!
//! A super-site tensor `A[σ]_{y,x}` sums, over the ways its sites split into
//! lane ends and internal dimers, the singlet amplitudes of everything that
//! starts inside it: internal dimers and the dimers leaving through `x`.
//! Incoming lanes only force the spin of their right end. The product of
//! tensors along the chain then reproduces the covering sum term by term.
//!
//! Environments `E[y, y']` are block diagonal in the magnetization carried
//! by the lanes, since the spins left of a cut fix it.

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::FRAC_1_SQRT_2;
use std::ops::Range;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::lattice::{Boundary, LadderGeometry};

#[derive(Debug, Clone)]
pub(crate) struct Layout {
    pub groups: Vec<Vec<usize>>,
    /// `lanes[k]` joins group `k` (left end) to group `k + 1` (right end).
    pub lanes: Vec<Vec<(usize, usize)>>,
    pub internal: Vec<Vec<(usize, usize)>>,
    pub is_a: Vec<bool>,
}

impl Layout {
    fn from_parts(g: &LadderGeometry, groups: Vec<Vec<usize>>, lanes: Vec<Vec<(usize, usize)>>) -> Result<Self> {
        let n = g.n();
        let mut group_of = vec![usize::MAX; n];
        for (k, grp) in groups.iter().enumerate() {
            for &s in grp {
                group_of[s] = k;
            }
        }
        let mut internal = vec![Vec::new(); groups.len()];
        let mut crossing = 0usize;
        for &(a, b) in g.bonds() {
            let (ga, gb) = (group_of[a], group_of[b]);
            if ga == gb {
                internal[ga].push((a, b));
            } else {
                let (l, r) = if ga < gb { (a, b) } else { (b, a) };
                let k = ga.min(gb);
                if ga.abs_diff(gb) != 1 || !lanes[k].contains(&(l, r)) {
                    return Err(Error::Construction(format!("bond ({a}, {b}) does not fit the chain layout")));
                }
                crossing += 1;
            }
        }
        if crossing != lanes.iter().map(Vec::len).sum::<usize>() {
            return Err(Error::Construction("chain layout lists lanes that are not bonds".into()));
        }
        Ok(Self {
            groups,
            lanes,
            internal,
            is_a: (0..n).map(|s| g.is_a(s)).collect(),
        })
    }

    /// One super-site per rung.
    pub fn open(g: &LadderGeometry) -> Result<Self> {
        if g.boundary() != Boundary::Open {
            return Err(Error::domain("open layout needs an open ladder"));
        }
        let (l, m) = (g.legs(), g.rungs());
        let groups = (0..m).map(|r| g.rung_sites(r).collect()).collect();
        let lanes = (0..m.saturating_sub(1))
            .map(|r| (0..l).map(|leg| (g.site(r, leg), g.site(r + 1, leg))).collect())
            .collect();
        Self::from_parts(g, groups, lanes)
    }

    /// Super-site `k` holds rungs `k` and `M − 1 − k`; the wrap bonds sit
    /// inside super-site 0 and the bonds between rungs `M/2 − 1` and `M/2`
    /// inside the last one.
    pub fn folded(g: &LadderGeometry) -> Result<Self> {
        let (l, m) = (g.legs(), g.rungs());
        if g.boundary() != Boundary::PeriodicAlongLegs || m % 2 == 1 || m < 4 {
            return Err(Error::domain("folded layout needs a periodic ladder with an even number of rungs >= 4"));
        }
        let half = m / 2;
        let groups = (0..half)
            .map(|k| g.rung_sites(k).chain(g.rung_sites(m - 1 - k)).collect())
            .collect();
        let lanes = (0..half - 1)
            .map(|k| {
                let top = (0..l).map(|leg| (g.site(k, leg), g.site(k + 1, leg)));
                let bottom = (0..l).map(|leg| (g.site(m - 1 - k, leg), g.site(m - 2 - k, leg)));
                top.chain(bottom).collect()
            })
            .collect();
        Self::from_parts(g, groups, lanes)
    }

    fn width(&self, cut: usize) -> usize {
        if cut == 0 || cut == self.groups.len() {
            0
        } else {
            self.lanes[cut - 1].len()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Entry {
    pub y: u32,
    pub x: u32,
    pub sigma: u32,
    pub coef: f64,
}

/// Nonzero entries of the tensor of group `k`, in generation order.
fn group_tensor(layout: &Layout, k: usize) -> Vec<Entry> {
    let sites = &layout.groups[k];
    let g = sites.len();
    let local = |s: usize| sites.iter().position(|&t| t == s);
    let mut in_lane = vec![None; g];
    if k > 0 {
        for (ell, &(_, r)) in layout.lanes[k - 1].iter().enumerate() {
            in_lane[local(r).expect("lane ends inside its group")] = Some(ell);
        }
    }
    let mut out_lane = vec![None; g];
    if k < layout.lanes.len() {
        for (ell, &(l, _)) in layout.lanes[k].iter().enumerate() {
            out_lane[local(l).expect("lane starts inside its group")] = Some(ell);
        }
    }
    let mut partners = vec![Vec::new(); g];
    for &(a, b) in &layout.internal[k] {
        let (la, lb) = (local(a).unwrap(), local(b).unwrap());
        partners[la].push(lb);
        partners[lb].push(la);
    }
    let pow3: Vec<u32> = (0..=MAX_LANES as u32).map(|e| 3u32.pow(e)).collect();

    struct Ctx<'a> {
        sites: &'a [usize],
        is_a: &'a [bool],
        in_lane: Vec<Option<usize>>,
        out_lane: Vec<Option<usize>>,
        partners: Vec<Vec<usize>>,
        pow3: Vec<u32>,
        out: Vec<Entry>,
    }

    fn rec(c: &mut Ctx, used: u32, e: Entry) {
        let g = c.sites.len();
        let Some(t) = (0..g).find(|&t| used >> t & 1 == 0) else {
            c.out.push(e);
            return;
        };
        let used = used | 1 << t;
        if let Some(ell) = c.in_lane[t] {
            for spin in 0..2u32 {
                // the left end carries the opposite spin
                let digit = if spin == 0 { 2 } else { 1 };
                rec(
                    c,
                    used,
                    Entry {
                        y: e.y + digit * c.pow3[ell],
                        sigma: e.sigma | spin << t,
                        ..e
                    },
                );
            }
        }
        if let Some(ell) = c.out_lane[t] {
            let orient = if c.is_a[c.sites[t]] { 1.0 } else { -1.0 };
            for spin in 0..2u32 {
                let digit = spin + 1;
                let sign = if spin == 0 { orient } else { -orient };
                rec(
                    c,
                    used,
                    Entry {
                        x: e.x + digit * c.pow3[ell],
                        sigma: e.sigma | spin << t,
                        coef: e.coef * sign * FRAC_1_SQRT_2,
                        ..e
                    },
                );
            }
        }
        for pi in 0..c.partners[t].len() {
            let p = c.partners[t][pi];
            if used >> p & 1 == 1 {
                continue;
            }
            let (a, b) = if c.is_a[c.sites[t]] { (t, p) } else { (p, t) };
            for a_down in 0..2u32 {
                let sign = if a_down == 0 { 1.0 } else { -1.0 };
                rec(
                    c,
                    used | 1 << p,
                    Entry {
                        sigma: e.sigma | a_down << a | (1 - a_down) << b,
                        coef: e.coef * sign * FRAC_1_SQRT_2,
                        ..e
                    },
                );
            }
        }
    }

    let mut ctx = Ctx {
        sites,
        is_a: &layout.is_a,
        in_lane,
        out_lane,
        partners,
        pow3,
        out: Vec::new(),
    };
    rec(
        &mut ctx,
        0,
        Entry {
            y: 0,
            x: 0,
            sigma: 0,
            coef: 1.0,
        },
    );
    ctx.out
}

/// Magnetization (in units of 1/2) carried by a bond state.
fn lane_magnetization(mut code: u32) -> i32 {
    let mut m = 0;
    while code > 0 {
        match code % 3 {
            1 => m += 1,
            2 => m -= 1,
            _ => {}
        }
        code /= 3;
    }
    m
}

/// Reachable bond states of one cut, ordered by magnetization then code.
#[derive(Debug, Clone)]
pub(crate) struct Cut {
    index: HashMap<u32, (usize, usize)>,
    pub blocks: Vec<Range<usize>>,
}

impl Cut {
    fn new(mut states: Vec<u32>) -> Self {
        states.sort_by_key(|&s| (lane_magnetization(s), s));
        states.dedup();
        let mut blocks: Vec<Range<usize>> = Vec::new();
        for (i, &s) in states.iter().enumerate() {
            match blocks.last_mut() {
                Some(b) if lane_magnetization(states[b.start]) == lane_magnetization(s) => b.end = i + 1,
                _ => blocks.push(i..i + 1),
            }
        }
        let mut index = HashMap::with_capacity(states.len());
        for (bi, b) in blocks.iter().enumerate() {
            for i in b.clone() {
                index.insert(states[i], (bi, i - b.start));
            }
        }
        Self { index, blocks }
    }

    /// `(block, offset within block)` of a bond state.
    pub fn locate(&self, code: u32) -> Option<(usize, usize)> {
        self.index.get(&code).copied()
    }

    fn zero_env(&self) -> Env {
        self.blocks.iter().map(|b| DMatrix::zeros(b.len(), b.len())).collect()
    }
}

/// Block-diagonal environment, one dense block per magnetization.
pub(crate) type Env = Vec<DMatrix<f64>>;

/// The transfer chain of one ladder.
#[derive(Debug, Clone)]
pub(crate) struct Chain {
    pub layout: Layout,
    /// Per group, entries sorted by `(sigma, y, x)`.
    pub tensors: Vec<Vec<Entry>>,
    /// `cuts[k]` is the bond space to the left of group `k`.
    pub cuts: Vec<Cut>,
}

/// Largest number of lanes per cut the chain accepts.
pub(crate) const MAX_LANES: usize = 12;

impl Chain {
    /// Builds the tensors; with `close_right` bond states that cannot reach
    /// an empty right end are dropped, otherwise every cut also describes
    /// the ladder truncated there.
    pub fn new(layout: Layout, close_right: bool) -> Result<Self> {
        let kk = layout.groups.len();
        if let Some(w) = (0..=kk).map(|c| layout.width(c)).max() {
            if w > MAX_LANES {
                return Err(Error::resource(format!(
                    "{w} lanes per cut exceeds the transfer limit of {MAX_LANES}"
                )));
            }
        }
        let mut raw: Vec<Vec<Entry>> = (0..kk).map(|k| group_tensor(&layout, k)).collect();

        let mut fwd: Vec<std::collections::HashSet<u32>> = vec![Default::default(); kk + 1];
        fwd[0].insert(0);
        for k in 0..kk {
            let next: std::collections::HashSet<u32> =
                raw[k].iter().filter(|e| fwd[k].contains(&e.y)).map(|e| e.x).collect();
            fwd[k + 1] = next;
        }
        let mut live = fwd.clone();
        if close_right {
            live[kk].retain(|&s| s == 0);
            for k in (0..kk).rev() {
                let back: std::collections::HashSet<u32> = raw[k]
                    .iter()
                    .filter(|e| live[k + 1].contains(&e.x) && fwd[k].contains(&e.y))
                    .map(|e| e.y)
                    .collect();
                live[k].retain(|s| back.contains(s));
            }
        }
        for (k, entries) in raw.iter_mut().enumerate() {
            entries.retain(|e| live[k].contains(&e.y) && live[k + 1].contains(&e.x));
            entries.sort_by_key(|a| (a.sigma, a.y, a.x));
        }
        let cuts = live.into_iter().map(|s| Cut::new(s.into_iter().collect())).collect();
        Ok(Self {
            layout,
            tensors: raw,
            cuts,
        })
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn unit_env(&self, cut: usize) -> Env {
        let c = &self.cuts[cut];
        let mut env = c.zero_env();
        if let Some((b, i)) = c.locate(0) {
            env[b][(i, i)] = 1.0;
        }
        env
    }

    /// Left environment after absorbing group `k`.
    pub fn absorb_left(&self, k: usize, env: &Env) -> Env {
        let (cin, cout) = (&self.cuts[k], &self.cuts[k + 1]);
        let mut out = cout.zero_env();
        for run in self.tensors[k].chunk_by(|a, b| a.sigma == b.sigma) {
            let located: Vec<((usize, usize), (usize, usize), f64)> = run
                .iter()
                .map(|e| (cin.locate(e.y).unwrap(), cout.locate(e.x).unwrap(), e.coef))
                .collect();
            for &((by1, iy1), (bx1, ix1), c1) in &located {
                for &((by2, iy2), (bx2, ix2), c2) in &located {
                    if by1 != by2 {
                        continue;
                    }
                    debug_assert_eq!(bx1, bx2);
                    out[bx1][(ix1, ix2)] += env[by1][(iy1, iy2)] * c1 * c2;
                }
            }
        }
        out
    }

    /// Right environment to the left of group `k`, given the one to its right.
    pub fn absorb_right(&self, k: usize, env: &Env) -> Env {
        let (cin, cout) = (&self.cuts[k], &self.cuts[k + 1]);
        let mut out = cin.zero_env();
        for run in self.tensors[k].chunk_by(|a, b| a.sigma == b.sigma) {
            let located: Vec<((usize, usize), (usize, usize), f64)> = run
                .iter()
                .map(|e| (cin.locate(e.y).unwrap(), cout.locate(e.x).unwrap(), e.coef))
                .collect();
            for &((by1, iy1), (bx1, ix1), c1) in &located {
                for &((_, iy2), (bx2, ix2), c2) in &located {
                    if bx1 != bx2 {
                        continue;
                    }
                    out[by1][(iy1, iy2)] += env[bx1][(ix1, ix2)] * c1 * c2;
                }
            }
        }
        out
    }

    /// `E[0, 0]` of an environment: the weight of the empty bond state.
    pub fn empty_weight(&self, cut: usize, env: &Env) -> f64 {
        self.cuts[cut].locate(0).map_or(0.0, |(b, i)| env[b][(i, i)])
    }

    /// Left environments at every cut.
    pub fn left_envs(&self) -> Vec<Env> {
        let mut envs = vec![self.unit_env(0)];
        for k in 0..self.len() {
            let next = self.absorb_left(k, &envs[k]);
            envs.push(next);
        }
        envs
    }

    /// Right environments at every cut.
    pub fn right_envs(&self) -> Vec<Env> {
        let kk = self.len();
        let mut envs = vec![Env::new(); kk + 1];
        envs[kk] = self.unit_env(kk);
        for k in (0..kk).rev() {
            envs[k] = self.absorb_right(k, &envs[k + 1]);
        }
        envs
    }

    /// Amplitudes of the full (unnormalized) covering sum, keyed by configuration.
    pub fn contract(&self) -> BTreeMap<u64, f64> {
        let mut frontier: BTreeMap<(u32, u64), f64> = BTreeMap::new();
        frontier.insert((0, 0), 1.0);
        for (k, entries) in self.tensors.iter().enumerate() {
            let sites = &self.layout.groups[k];
            let mut by_y: BTreeMap<u32, Vec<&Entry>> = BTreeMap::new();
            for e in entries {
                by_y.entry(e.y).or_default().push(e);
            }
            let mut next: BTreeMap<(u32, u64), f64> = BTreeMap::new();
            for (&(y, config), &amp) in &frontier {
                let Some(list) = by_y.get(&y) else { continue };
                for e in list {
                    let mut c = config;
                    for (t, &s) in sites.iter().enumerate() {
                        c |= ((e.sigma >> t & 1) as u64) << s;
                    }
                    *next.entry((e.x, c)).or_insert(0.0) += amp * e.coef;
                }
            }
            frontier = next;
        }
        frontier
            .into_iter()
            .filter(|((x, _), _)| *x == 0)
            .map(|((_, c), a)| (c, a))
            .collect()
    }

    /// Unnormalized reduced matrix of group `k` (local bit order), given the
    /// environments on both sides of it.
    pub fn group_rdm(&self, k: usize, left: &Env, right: &Env) -> DMatrix<f64> {
        let g = self.layout.groups[k].len();
        pair_rdm(
            1usize << g,
            &self.tensors[k]
                .iter()
                .map(|e| (e.sigma, e.y, e.x, e.coef))
                .collect::<Vec<_>>(),
            &self.cuts[k],
            &self.cuts[k + 1],
            left,
            right,
        )
    }

    /// Unnormalized reduced matrix of groups `k` and `k + 1`; bit order is
    /// group `k`'s sites then group `k + 1`'s.
    pub fn two_group_rdm(&self, k: usize, left: &Env, right: &Env) -> DMatrix<f64> {
        let ga = self.layout.groups[k].len();
        let gb = self.layout.groups[k + 1].len();
        let mut second_by_y: BTreeMap<u32, Vec<&Entry>> = BTreeMap::new();
        for e in &self.tensors[k + 1] {
            second_by_y.entry(e.y).or_default().push(e);
        }
        let mut merged: BTreeMap<(u32, u32, u32), f64> = BTreeMap::new();
        for e1 in &self.tensors[k] {
            if let Some(list) = second_by_y.get(&e1.x) {
                for e2 in list {
                    let sigma = e1.sigma | e2.sigma << ga;
                    *merged.entry((sigma, e1.y, e2.x)).or_insert(0.0) += e1.coef * e2.coef;
                }
            }
        }
        let combined: Vec<(u32, u32, u32, f64)> = merged.into_iter().map(|((s, y, z), c)| (s, y, z, c)).collect();
        pair_rdm(1usize << (ga + gb), &combined, &self.cuts[k], &self.cuts[k + 2], left, right)
    }
}

/// `ρ[σ, σ'] = Σ L[y, y'] R[z, z'] c c'` over entries `(σ, y, z, c)`.
fn pair_rdm(dim: usize, entries: &[(u32, u32, u32, f64)], cl: &Cut, cr: &Cut, left: &Env, right: &Env) -> DMatrix<f64> {
    // bucket by (left block, right block): only matching buckets interact
    let mut buckets: BTreeMap<(usize, usize), Vec<(usize, usize, usize, f64)>> = BTreeMap::new();
    for &(s, y, z, c) in entries {
        let (by, iy) = cl.locate(y).expect("entry bond state on the left cut");
        let (bz, iz) = cr.locate(z).expect("entry bond state on the right cut");
        buckets.entry((by, bz)).or_default().push((s as usize, iy, iz, c));
    }
    let mut rho = DMatrix::<f64>::zeros(dim, dim);
    for (&(by, bz), list) in &buckets {
        let (lb, rb) = (&left[by], &right[bz]);
        for &(s1, iy1, iz1, c1) in list {
            for &(s2, iy2, iz2, c2) in list {
                rho[(s1, s2)] += lb[(iy1, iy2)] * rb[(iz1, iz2)] * c1 * c2;
            }
        }
    }
    rho
}
