//! Dense power iteration for small nonnegative matrices.

use crate::error::{Error, Result};

/// Row-major square matrix.
pub type Matrix = Vec<Vec<f64>>;

pub fn mat_vec(a: &Matrix, x: &[f64]) -> Vec<f64> {
    a.iter()
        .map(|row| row.iter().zip(x).map(|(aij, xj)| aij * xj).sum())
        .collect()
}

/// Perron root and eigenvector of a nonnegative matrix.
///
/// Iterates `x ← (A + λ I) x / ‖·‖₁` with the shift `λ` set to the current
/// root estimate `‖A x‖₁` (for `‖x‖₁ = 1`). The shift makes periodic chains
/// converge while keeping full relative precision when the root is small.
/// Stops when both the estimate and the iterate change by less than `tol`
/// (relative), and returns the eigenvector normalised to unit 1-norm.
pub fn perron_root(a: &Matrix, tol: f64, max_iter: usize) -> Result<(f64, Vec<f64>)> {
    let n = a.len();
    if n == 0 || a.iter().any(|row| row.len() != n) {
        return Err(Error::Domain("power iteration needs a non-empty square matrix".into()));
    }
    if a.iter().flatten().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(Error::Domain("power iteration needs finite nonnegative entries".into()));
    }
    let mut x = vec![1.0 / n as f64; n];
    let mut lambda = mat_vec(a, &x).iter().sum::<f64>();
    if lambda == 0.0 {
        return Ok((0.0, x));
    }
    for _ in 0..max_iter {
        let ax = mat_vec(a, &x);
        let estimate: f64 = ax.iter().sum();
        let mut y: Vec<f64> = ax.iter().zip(&x).map(|(v, xi)| v + lambda * xi).collect();
        let norm: f64 = y.iter().sum();
        y.iter_mut().for_each(|v| *v /= norm);
        let dx: f64 = y.iter().zip(&x).map(|(u, v)| (u - v).abs()).sum();
        let dl = (estimate - lambda).abs();
        x = y;
        lambda = estimate;
        if dl <= tol * lambda && dx <= tol.max(1e-15) * 10.0 {
            let refined: f64 = mat_vec(a, &x).iter().sum();
            return Ok((refined, x));
        }
    }
    Err(Error::PowerIteration(max_iter))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stochastic_matrix_has_unit_root() {
        let a = vec![vec![0.5, 1.0], vec![0.5, 0.0]];
        let (r, v) = perron_root(&a, 1e-14, 100_000).unwrap();
        assert!((r - 1.0).abs() < 1e-13);
        assert!((v[0] - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn periodic_cycle_converges() {
        let a = vec![vec![0.0, 0.0, 0.2], vec![0.2, 0.0, 0.0], vec![0.0, 0.2, 0.0]];
        let (r, _) = perron_root(&a, 1e-14, 100_000).unwrap();
        assert!((r - 0.2).abs() < 1e-14);
    }

    #[test]
    fn tiny_root_keeps_relative_precision() {
        let a = vec![vec![1e-30]];
        let (r, _) = perron_root(&a, 1e-14, 100).unwrap();
        assert!((r / 1e-30 - 1.0).abs() < 1e-14);
    }
}
