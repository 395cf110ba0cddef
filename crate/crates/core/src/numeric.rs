//! Reductions with a fixed summation order.
//!
//! Vectors are cut into fixed-size chunks, each chunk is summed left to right,
//! and the chunk sums are combined by a pairwise tree. The result therefore
//! depends only on the data, never on the number of worker threads.

use num_complex::Complex64;
use rayon::prelude::*;

const CHUNK: usize = 4096;

fn tree_sum<T: Copy + std::ops::Add<Output = T>>(mut parts: Vec<T>, zero: T) -> T {
    if parts.is_empty() {
        return zero;
    }
    while parts.len() > 1 {
        let next = parts
            .chunks(2)
            .map(|p| if p.len() == 2 { p[0] + p[1] } else { p[0] })
            .collect();
        parts = next;
    }
    parts[0]
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let parts: Vec<f64> = a
        .par_chunks(CHUNK)
        .zip(b.par_chunks(CHUNK))
        .map(|(x, y)| x.iter().zip(y).map(|(p, q)| p * q).sum())
        .collect();
    tree_sum(parts, 0.0)
}

pub fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

/// Σ conj(a_i) b_i.
pub fn dot_c(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    debug_assert_eq!(a.len(), b.len());
    let parts: Vec<Complex64> = a
        .par_chunks(CHUNK)
        .zip(b.par_chunks(CHUNK))
        .map(|(x, y)| x.iter().zip(y).map(|(p, q)| p.conj() * q).sum())
        .collect();
    tree_sum(parts, Complex64::new(0.0, 0.0))
}

pub fn norm_sq_c(a: &[Complex64]) -> f64 {
    let parts: Vec<f64> = a
        .par_chunks(CHUNK)
        .map(|x| x.iter().map(|p| p.norm_sqr()).sum())
        .collect();
    tree_sum(parts, 0.0)
}

/// y ← y + alpha·x
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    y.par_iter_mut().zip(x.par_iter()).for_each(|(yi, xi)| *yi += alpha * xi);
}

pub fn scale(alpha: f64, x: &mut [f64]) {
    x.par_iter_mut().for_each(|xi| *xi *= alpha);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thread_count_does_not_change_sums() {
        let a: Vec<f64> = (0..50_000).map(|i| ((i as u64 * 7919) % 1000) as f64 / 997.0 - 0.5).collect();
        let b: Vec<f64> = (0..50_000).map(|i| ((i as u64 * 104_729) % 777) as f64 / 333.0).collect();
        let reference = dot(&a, &b);
        for threads in [1, 2, 3] {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            let got = pool.install(|| dot(&a, &b));
            assert_eq!(got.to_bits(), reference.to_bits());
        }
    }

    #[test]
    fn complex_dot_conjugates_left() {
        let a = [Complex64::new(0.0, 1.0)];
        let b = [Complex64::new(0.0, 1.0)];
        assert_eq!(dot_c(&a, &b), Complex64::new(1.0, 0.0));
        assert_eq!(norm_sq_c(&a), 1.0);
    }
}
