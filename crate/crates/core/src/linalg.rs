//! Weighted ridge regression through the normal equations.

use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("dimension mismatch")]
    Dimension,
}

/// Symmetric positive-definite solve of `a x = b` (row-major `n x n`).
pub fn cholesky_solve(a: &[f64], b: &[f64], n: usize) -> Result<Vec<f64>, LinalgError> {
    if a.len() != n * n || b.len() != n {
        return Err(LinalgError::Dimension);
    }
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if !(s > 1e-12 * a[i * n + i].abs().max(1e-300)) {
                    return Err(LinalgError::NotPositiveDefinite);
                }
                l[i * n + i] = libm::sqrt(s);
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i * n + k] * y[k];
        }
        y[i] = s / l[i * n + i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in i + 1..n {
            s -= l[k * n + i] * x[k];
        }
        x[i] = s / l[i * n + i];
    }
    Ok(x)
}

/// Accumulated weighted normal equations for `y ~ b0 + w . x`.
#[derive(Debug, Clone)]
pub struct NormalEquations {
    dim: usize,
    gram: Vec<f64>,
    rhs: Vec<f64>,
}

impl NormalEquations {
    /// `features` excludes the intercept.
    pub fn new(features: usize) -> Self {
        let dim = features + 1;
        Self {
            dim,
            gram: vec![0.0; dim * dim],
            rhs: vec![0.0; dim],
        }
    }

    pub fn add(&mut self, x: &[f64], y: f64, weight: f64) {
        let d = self.dim;
        debug_assert_eq!(x.len() + 1, d);
        let at = |i: usize| if i == 0 { 1.0 } else { x[i - 1] };
        for i in 0..d {
            let xi = at(i);
            if xi == 0.0 {
                continue;
            }
            let wxi = weight * xi;
            self.rhs[i] += wxi * y;
            for j in 0..=i {
                self.gram[i * d + j] += wxi * at(j);
            }
        }
    }

    /// Solves with an L2 penalty on every coefficient but the intercept.
    /// Returns `(intercept, weights)`. If the system is singular the
    /// penalty is raised tenfold until it is not.
    pub fn solve(&self, ridge: f64) -> Result<(f64, Vec<f64>), LinalgError> {
        let d = self.dim;
        let mut gram = self.gram.clone();
        for i in 0..d {
            for j in 0..i {
                gram[j * d + i] = gram[i * d + j];
            }
        }
        let mut penalty = ridge.max(0.0);
        for _ in 0..12 {
            let mut a = gram.clone();
            for i in 1..d {
                a[i * d + i] += penalty;
            }
            match cholesky_solve(&a, &self.rhs, d) {
                Ok(beta) => return Ok((beta[0], beta[1..].to_vec())),
                Err(LinalgError::NotPositiveDefinite) => {
                    penalty = if penalty > 0.0 { penalty * 10.0 } else { 1e-6 };
                }
                Err(e) => return Err(e),
            }
        }
        Err(LinalgError::NotPositiveDefinite)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_small_system() {
        let a = [4.0, 2.0, 2.0, 3.0];
        let x = cholesky_solve(&a, &[2.0, 1.0], 2).unwrap();
        assert!((4.0 * x[0] + 2.0 * x[1] - 2.0).abs() < 1e-12);
        assert!((2.0 * x[0] + 3.0 * x[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn exact_linear_fit() {
        let mut ne = NormalEquations::new(2);
        for i in 0..20 {
            let x = [(i % 3) as f64, (i % 5) as f64];
            let y = 1.5 + 2.0 * x[0] - 0.5 * x[1];
            ne.add(&x, y, 1.0 + (i % 2) as f64);
        }
        let (b0, w) = ne.solve(0.0).unwrap();
        assert!((b0 - 1.5).abs() < 1e-9);
        assert!((w[0] - 2.0).abs() < 1e-9);
        assert!((w[1] + 0.5).abs() < 1e-9);
    }

    #[test]
    fn singular_design_falls_back_to_ridge() {
        let mut ne = NormalEquations::new(2);
        for i in 0..10 {
            let x = [i as f64, i as f64];
            ne.add(&x, i as f64, 1.0);
        }
        let (_, w) = ne.solve(0.0).unwrap();
        assert!((w[0] - w[1]).abs() < 1e-6);
        assert!((w[0] + w[1] - 1.0).abs() < 1e-3);
    }
}
