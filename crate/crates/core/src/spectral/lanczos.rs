use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::hamiltonian::HamiltonianSpec;
use crate::error::{Error, Result};
use crate::hilbert::{SectorBasis, StateVector};
use crate::numeric;
use crate::tolerances::{DEGENERACY_REL, LANCZOS_RESIDUAL_REL, LANCZOS_RITZ_TOL};

/// Start-vector seed used when none is given.
pub const DEFAULT_SEED: u64 = 0x5eed_1ad0;

/// Largest system handed to the eigensolver.
pub const MAX_ED_SITES: usize = 24;

/// Krylov vectors are capped so that the basis stays under this many bytes.
const KRYLOV_BYTES: usize = 1_200_000_000;
const MAX_KRYLOV: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LanczosOptions {
    /// Convergence threshold on the change of the lowest Ritz value.
    pub tol: f64,
    /// Cap on Hamiltonian applications, restarts included.
    pub max_iter: usize,
    pub seed: u64,
    /// Override for the Krylov basis size before a restart.
    pub krylov_dim: Option<usize>,
    /// Run a second, deflated solve to look for a (near-)degenerate partner.
    pub detect_degeneracy: bool,
    /// Accepted residual ‖Hψ − Eψ‖ relative to ‖H‖. Errors in quantities
    /// read off the state, such as λ², are of this order.
    #[serde(default = "default_residual_rel")]
    pub residual_rel: f64,
}

fn default_residual_rel() -> f64 {
    LANCZOS_RESIDUAL_REL
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self {
            tol: LANCZOS_RITZ_TOL,
            max_iter: 500,
            seed: DEFAULT_SEED,
            krylov_dim: None,
            detect_degeneracy: true,
            residual_rel: LANCZOS_RESIDUAL_REL,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GroundStateResult {
    pub energy: f64,
    pub state: StateVector,
    pub iterations: usize,
    pub residual: f64,
    pub degeneracy_warning: bool,
    /// Upper bound on the next eigenvalue in the same sector, when it was computed.
    pub next_energy: Option<f64>,
}

/// Lowest eigenpair of a real symmetric operator.
#[derive(Debug, Clone)]
pub struct Eigenpair {
    pub value: f64,
    pub vector: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
    /// Second Ritz value of the last Krylov space.
    pub second_ritz: Option<f64>,
}

fn random_start(dim: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect()
}

fn project_out(w: &mut [f64], basis: &[Vec<f64>]) {
    for v in basis {
        let c = numeric::dot(v, w);
        numeric::axpy(-c, v, w);
    }
}

/// Orthogonalize against `basis`, repeating once if the norm collapsed.
fn orthogonalize(w: &mut [f64], basis: &[Vec<f64>]) {
    let before = numeric::norm_sq(w);
    project_out(w, basis);
    if numeric::norm_sq(w) < 0.5 * before {
        project_out(w, basis);
    }
}

fn tridiagonal_eigen(alpha: &[f64], beta: &[f64]) -> SymmetricEigen<f64, nalgebra::Dyn> {
    let k = alpha.len();
    let t = DMatrix::from_fn(k, k, |r, c| {
        if r == c {
            alpha[r]
        } else if r + 1 == c {
            beta[r]
        } else if c + 1 == r {
            beta[c]
        } else {
            0.0
        }
    });
    crate::eigen::sym_eigen(t)
}

/// Restarted Lanczos with full reorthogonalization.
///
/// Every Krylov vector is also kept orthogonal to `deflate`, which must hold
/// orthonormal (near-)eigenvectors; the result is then the lowest eigenpair in
/// their orthogonal complement. Convergence needs both the Ritz-value change
/// below `opts.tol·max(1, |θ|)` and a true residual below `resid_rel·‖H‖`.
pub fn lanczos_lowest<F>(
    dim: usize,
    apply: F,
    opts: &LanczosOptions,
    resid_rel: f64,
    deflate: &[Vec<f64>],
    seed: u64,
) -> Result<Eigenpair>
where
    F: Fn(&[f64], &mut [f64]),
{
    if dim == 0 {
        return Err(Error::domain("empty Hilbert space"));
    }
    if deflate.len() >= dim {
        return Err(Error::domain("deflation exhausts the space"));
    }
    let cap = opts
        .krylov_dim
        .unwrap_or_else(|| (KRYLOV_BYTES / (8 * dim)).clamp(8, MAX_KRYLOV))
        .max(2)
        .min(dim - deflate.len());

    let mut v0 = random_start(dim, seed);
    orthogonalize(&mut v0, deflate);
    let nrm = numeric::norm_sq(&v0).sqrt();
    numeric::scale(1.0 / nrm, &mut v0);

    let mut total = 0usize;
    let mut h_norm = 0.0f64;
    let mut best: Option<Eigenpair> = None;
    let mut prev_theta: Option<f64> = None;

    loop {
        let mut basis: Vec<Vec<f64>> = vec![v0];
        let mut alpha: Vec<f64> = Vec::with_capacity(cap);
        let mut beta: Vec<f64> = Vec::with_capacity(cap);
        let mut w = vec![0.0; dim];
        let (s, second) = loop {
            let j = basis.len() - 1;
            apply(&basis[j], &mut w);
            total += 1;
            let a = numeric::dot(&basis[j], &w);
            alpha.push(a);
            orthogonalize(&mut w, deflate);
            orthogonalize(&mut w, &basis);
            let b = numeric::norm_sq(&w).sqrt();

            let eig = tridiagonal_eigen(&alpha, &beta);
            let mut order: Vec<usize> = (0..alpha.len()).collect();
            order.sort_by(|&x, &y| eig.eigenvalues[x].total_cmp(&eig.eigenvalues[y]));
            let theta = eig.eigenvalues[order[0]];
            let top = eig.eigenvalues[*order.last().unwrap()];
            h_norm = h_norm.max(theta.abs()).max(top.abs());
            let s_last = eig.eigenvectors[(alpha.len() - 1, order[0])];
            let est_resid = b * s_last.abs();
            let resid_tol = resid_rel * h_norm.max(f64::MIN_POSITIVE);
            let settled = prev_theta.is_some_and(|p| (theta - p).abs() <= opts.tol * theta.abs().max(1.0));
            prev_theta = Some(theta);

            let exhausted = b <= 1e-13 * h_norm.max(1.0);
            let full = basis.len() >= cap;
            if (settled && est_resid <= resid_tol) || exhausted || full || total >= opts.max_iter {
                let s: Vec<f64> = (0..alpha.len()).map(|k| eig.eigenvectors[(k, order[0])]).collect();
                let second = order.get(1).map(|&k| eig.eigenvalues[k]);
                break (s, second);
            }
            numeric::scale(1.0 / b, &mut w);
            beta.push(b);
            basis.push(std::mem::replace(&mut w, vec![0.0; dim]));
        };
        let mut x = vec![0.0; dim];
        for (coef, v) in s.iter().zip(&basis) {
            numeric::axpy(*coef, v, &mut x);
        }
        drop(basis);
        orthogonalize(&mut x, deflate);
        let nrm = numeric::norm_sq(&x).sqrt();
        numeric::scale(1.0 / nrm, &mut x);
        let mut hx = vec![0.0; dim];
        apply(&x, &mut hx);
        total += 1;
        let value = numeric::dot(&x, &hx);
        numeric::axpy(-value, &x, &mut hx);
        orthogonalize(&mut hx, deflate);
        let residual = numeric::norm_sq(&hx).sqrt();
        let converged = residual <= resid_rel * h_norm.max(f64::MIN_POSITIVE)
            && prev_theta.is_some_and(|p| (value - p).abs() <= opts.tol * value.abs().max(1.0) + residual * residual);

        let candidate = Eigenpair {
            value,
            vector: x,
            iterations: total,
            residual,
            converged,
            second_ritz: second,
        };
        if converged {
            return Ok(candidate);
        }
        if total >= opts.max_iter {
            let best_residual = best.as_ref().map_or(residual, |b| b.residual.min(residual));
            return Err(Error::Convergence {
                iterations: total,
                best_residual,
            });
        }
        prev_theta = Some(value);
        v0 = candidate.vector.clone();
        if best.as_ref().is_none_or(|b| candidate.residual < b.residual) {
            best = Some(candidate);
        }
    }
}

/// Magnetization sector holding the ground state: `Sz = 0` for even `n`,
/// `Sz = +1/2` for odd `n`.
pub fn ground_sector(n: usize) -> Result<SectorBasis> {
    SectorBasis::new(n, n / 2)
}

/// Lowest eigenpair of the ladder Hamiltonian in its ground sector.
pub fn ground_state(spec: &HamiltonianSpec, opts: &LanczosOptions) -> Result<GroundStateResult> {
    let n = spec.geometry.n();
    if n > MAX_ED_SITES {
        return Err(Error::resource(format!(
            "exact diagonalization is limited to {MAX_ED_SITES} sites, got {n}"
        )));
    }
    let basis = Arc::new(ground_sector(n)?);
    let op = spec.operator();
    let apply = |x: &[f64], y: &mut [f64]| op.apply_real(&basis, x, y);
    let ground = lanczos_lowest(basis.len(), apply, opts, opts.residual_rel, &[], opts.seed)?;

    let scale = DEGENERACY_REL * ground.value.abs().max(f64::MIN_POSITIVE);
    let mut warning = ground
        .second_ritz
        .is_some_and(|e1| (e1 - ground.value).abs() <= scale);
    let mut next_energy = None;
    if opts.detect_degeneracy && basis.len() > 1 {
        // Loose settings suffice: the deflated Ritz value is an upper bound on
        // the next eigenvalue, so a close value can only mean a close level.
        let loose = LanczosOptions {
            tol: 1e-8,
            ..*opts
        };
        let deflate = vec![ground.vector.clone()];
        let next = match lanczos_lowest(basis.len(), apply, &loose, 1e-5, &deflate, opts.seed.wrapping_add(1)) {
            Ok(p) => Some(p.value),
            Err(Error::Convergence { .. }) => None,
            Err(e) => return Err(e),
        };
        if let Some(e1) = next {
            warning |= e1 - ground.value <= scale;
        }
        next_energy = next;
    }

    let state = StateVector::from_real_sector(basis, &ground.vector)?.normalized()?;
    Ok(GroundStateResult {
        energy: ground.value,
        state,
        iterations: ground.iterations,
        residual: ground.residual,
        degeneracy_warning: warning,
        next_energy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_ladder, Boundary};
    use crate::spectral::dense::dense_ground_energy;

    fn solve(legs: usize, rungs: usize, boundary: Boundary, delta: f64) -> GroundStateResult {
        let spec = HamiltonianSpec::new(build_ladder(legs, rungs, boundary).unwrap(), 1.0, delta).unwrap();
        ground_state(&spec, &LanczosOptions::default()).unwrap()
    }

    #[test]
    fn two_site_singlet() {
        let r = solve(1, 2, Boundary::Open, 1.0);
        assert!((r.energy + 0.75).abs() < 1e-12);
        assert!(!r.degeneracy_warning);
        assert!(r.state.is_normalized());
    }

    #[test]
    fn four_site_rings() {
        assert!((solve(1, 4, Boundary::PeriodicAlongLegs, 1.0).energy + 2.0).abs() < 1e-10);
        assert!((solve(2, 2, Boundary::Open, 1.0).energy + 2.0).abs() < 1e-10);
    }

    #[test]
    fn matches_dense_oracle() {
        for (l, m, b, d) in [
            (2, 3, Boundary::Open, 1.0),
            (3, 3, Boundary::PeriodicAlongLegs, 1.2),
            (1, 9, Boundary::Open, 1.4),
            (2, 5, Boundary::PeriodicAlongLegs, 1.0),
        ] {
            let spec = HamiltonianSpec::new(build_ladder(l, m, b).unwrap(), 1.0, d).unwrap();
            let lan = ground_state(&spec, &LanczosOptions::default()).unwrap();
            let oracle = dense_ground_energy(&spec).unwrap();
            assert!((lan.energy - oracle).abs() < 1e-9, "{l}x{m} {b}: {} vs {oracle}", lan.energy);
        }
    }

    #[test]
    fn odd_chain_doublet_is_not_flagged_within_sector() {
        // the Sz = +1/2 member of the doublet is unique in its sector
        let r = solve(1, 3, Boundary::Open, 1.0);
        assert!((r.energy + 1.0).abs() < 1e-10);
        assert!(!r.degeneracy_warning);
    }

    #[test]
    fn frustrated_triangle_is_flagged() {
        // the 3-ring has two degenerate doublets
        let r = solve(1, 3, Boundary::PeriodicAlongLegs, 1.0);
        assert!((r.energy + 0.75).abs() < 1e-10);
        assert!(r.degeneracy_warning);
    }

    #[test]
    fn restarts_with_tiny_krylov_space() {
        let spec = HamiltonianSpec::heisenberg(build_ladder(2, 4, Boundary::Open).unwrap());
        let opts = LanczosOptions {
            krylov_dim: Some(6),
            max_iter: 2000,
            ..Default::default()
        };
        let small = ground_state(&spec, &opts).unwrap();
        let oracle = dense_ground_energy(&spec).unwrap();
        assert!((small.energy - oracle).abs() < 1e-9);
    }

    #[test]
    fn reports_non_convergence() {
        let spec = HamiltonianSpec::heisenberg(build_ladder(2, 5, Boundary::Open).unwrap());
        let opts = LanczosOptions {
            max_iter: 3,
            ..Default::default()
        };
        assert!(matches!(ground_state(&spec, &opts), Err(Error::Convergence { .. })));
    }

    #[test]
    fn rejects_oversized_systems() {
        let spec = HamiltonianSpec::heisenberg(build_ladder(5, 5, Boundary::Open).unwrap());
        assert!(matches!(ground_state(&spec, &LanczosOptions::default()), Err(Error::Resource(_))));
    }

    #[test]
    fn seeded_runs_are_bit_identical() {
        let a = solve(2, 4, Boundary::PeriodicAlongLegs, 1.0);
        let b = solve(2, 4, Boundary::PeriodicAlongLegs, 1.0);
        assert_eq!(a.energy.to_bits(), b.energy.to_bits());
        assert_eq!(a.state, b.state);
    }
}
