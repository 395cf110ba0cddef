//! Symmetric and Hermitian eigensolvers with a checked fallback.
//!
//! nalgebra's implicit QR occasionally returns `inf` or `NaN` on matrices
//! with exactly decoupled blocks (seen on reduced states of RVB rings). Every
//! result is checked against the trace and the Frobenius norm; a failed
//! check reruns the problem with cyclic Jacobi rotations.

use nalgebra::{DMatrix, DVector, Dyn, SymmetricEigen};
use num_complex::Complex64;

const MAX_SWEEPS: usize = 100;

fn plausible(values: &[f64], trace: f64, frob_sq: f64) -> bool {
    if !values.iter().all(|v| v.is_finite()) {
        return false;
    }
    let scale = 1.0 + frob_sq.sqrt() * values.len() as f64;
    let sum: f64 = values.iter().sum();
    let sq: f64 = values.iter().map(|v| v * v).sum();
    (sum - trace).abs() <= 1e-10 * scale && (sq - frob_sq).abs() <= 1e-10 * scale * (1.0 + frob_sq.sqrt())
}

/// Cyclic Jacobi on a symmetric matrix; eigenvectors are the columns of the
/// returned matrix when requested.
fn jacobi(mut a: DMatrix<f64>, vectors: bool) -> (DVector<f64>, Option<DMatrix<f64>>) {
    let n = a.nrows();
    let mut v = vectors.then(|| DMatrix::<f64>::identity(n, n));
    let frob = a.norm();
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum();
        if off.sqrt() <= 1e-15 * frob.max(f64::MIN_POSITIVE) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                if let Some(v) = v.as_mut() {
                    for k in 0..n {
                        let vkp = v[(k, p)];
                        let vkq = v[(k, q)];
                        v[(k, p)] = c * vkp - s * vkq;
                        v[(k, q)] = s * vkp + c * vkq;
                    }
                }
            }
        }
    }
    (a.diagonal(), v)
}

/// Eigenvalues of a real symmetric matrix, unordered.
pub fn sym_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let values: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    if plausible(&values, m.trace(), m.norm_squared()) {
        return values;
    }
    jacobi(m.clone(), false).0.iter().copied().collect()
}

/// Full eigendecomposition of a real symmetric matrix.
pub fn sym_eigen(m: DMatrix<f64>) -> SymmetricEigen<f64, Dyn> {
    let (trace, frob_sq) = (m.trace(), m.norm_squared());
    let e = m.clone().symmetric_eigen();
    if plausible(e.eigenvalues.as_slice(), trace, frob_sq) && e.eigenvectors.iter().all(|x| x.is_finite()) {
        return e;
    }
    let (eigenvalues, vectors) = jacobi(m, true);
    SymmetricEigen {
        eigenvalues,
        eigenvectors: vectors.expect("requested"),
    }
}

/// Eigenvalues of a Hermitian matrix, unordered.
pub fn herm_eigenvalues(m: &DMatrix<Complex64>) -> Vec<f64> {
    let values: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    let trace = m.trace().re;
    let frob_sq = m.iter().map(|z| z.norm_sqr()).sum();
    if plausible(&values, trace, frob_sq) {
        return values;
    }
    // [[Re, −Im], [Im, Re]] has every eigenvalue of m twice.
    let n = m.nrows();
    let big = DMatrix::<f64>::from_fn(2 * n, 2 * n, |r, c| {
        let z = m[(r % n, c % n)];
        match (r < n, c < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    });
    let mut doubled: Vec<f64> = jacobi(big, false).0.iter().copied().collect();
    doubled.sort_by(f64::total_cmp);
    doubled.into_iter().step_by(2).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobi_matches_closed_form() {
        let m = DMatrix::from_row_slice(3, 3, &[2.0, 1.0, 0.0, 1.0, 2.0, 0.0, 0.0, 0.0, 5.0]);
        let mut ev: Vec<f64> = jacobi(m.clone(), false).0.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        for (g, w) in ev.iter().zip([1.0, 3.0, 5.0]) {
            assert!((g - w).abs() < 1e-14);
        }
        let (vals, vecs) = jacobi(m.clone(), true);
        let v = vecs.unwrap();
        let back = &v * DMatrix::from_diagonal(&vals) * v.transpose();
        assert!((back - m).abs().max() < 1e-13);
    }

    #[test]
    fn hermitian_fallback_halves_the_embedding() {
        let i = Complex64::new(0.0, 1.0);
        let one = Complex64::new(1.0, 0.0);
        // σ_y + 2: eigenvalues 1 and 3
        let m = DMatrix::from_row_slice(2, 2, &[2.0 * one, -i, i, 2.0 * one]);
        let n = 2;
        let big = DMatrix::<f64>::from_fn(2 * n, 2 * n, |r, c| {
            let z = m[(r % n, c % n)];
            match (r < n, c < n) {
                (true, true) | (false, false) => z.re,
                (true, false) => -z.im,
                (false, true) => z.im,
            }
        });
        let mut d: Vec<f64> = jacobi(big, false).0.iter().copied().collect();
        d.sort_by(f64::total_cmp);
        let halved: Vec<f64> = d.into_iter().step_by(2).collect();
        assert!((halved[0] - 1.0).abs() < 1e-14 && (halved[1] - 3.0).abs() < 1e-14);
        let mut direct = herm_eigenvalues(&m);
        direct.sort_by(f64::total_cmp);
        assert!((direct[0] - 1.0).abs() < 1e-13 && (direct[1] - 3.0).abs() < 1e-13);
    }

    #[test]
    fn rejects_implausible_spectra() {
        assert!(!plausible(&[f64::INFINITY, 0.0], 1.0, 1.0));
        assert!(!plausible(&[0.5, 0.2], 1.0, 0.29));
        assert!(plausible(&[0.5, 0.5], 1.0, 0.5));
    }
}
