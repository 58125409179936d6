//! Small dense linear algebra for the reduced Newton systems.
//!
//! Problem sizes in this crate are desk scale (hundreds of unknowns), so the
//! Hessian is stored dense and factored with an unpivoted Cholesky. The
//! factorization doubles as the positive-definiteness check the solver relies
//! on for descent directions.

use alloc::vec;
use alloc::vec::Vec;

#[cfg_attr(feature = "std", allow(unused_imports))]
use num_traits::Float;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LinalgError {
    /// A Cholesky pivot was not strictly positive: the matrix is not
    /// numerically SPD.
    NotPositiveDefinite { pivot: usize },
    DimensionMismatch { rows: usize, rhs: usize },
}

impl core::fmt::Display for LinalgError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            LinalgError::NotPositiveDefinite { pivot } => {
                write!(f, "matrix is not positive definite (pivot {pivot})")
            }
            LinalgError::DimensionMismatch { rows, rhs } => {
                write!(f, "dimension mismatch: {rows} rows vs rhs length {rhs}")
            }
        }
    }
}

impl core::error::Error for LinalgError {}

/// Dense square matrix, row major.
#[derive(Clone, Debug)]
pub struct DenseMatrix {
    n: usize,
    a: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        DenseMatrix { n, a: vec![0.0; n * n] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.n + j]
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        self.a[i * self.n + j] += v;
    }

    pub fn max_asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                worst = worst.max((self.at(i, j) - self.at(j, i)).abs());
            }
        }
        worst
    }

    /// Solves `A x = b` for SPD `A` via Cholesky (`A = L Lᵀ`).
    pub fn solve_spd(&self, b: &[f64]) -> Result<Vec<f64>, LinalgError> {
        let n = self.n;
        if b.len() != n {
            return Err(LinalgError::DimensionMismatch { rows: n, rhs: b.len() });
        }
        // Factor into the lower triangle of a working copy.
        let mut l = self.a.clone();
        for j in 0..n {
            let mut d = l[j * n + j];
            for k in 0..j {
                d -= l[j * n + k] * l[j * n + k];
            }
            if !(d > 0.0) || !d.is_finite() {
                return Err(LinalgError::NotPositiveDefinite { pivot: j });
            }
            let dj = d.sqrt();
            l[j * n + j] = dj;
            for i in (j + 1)..n {
                let mut s = l[i * n + j];
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                l[i * n + j] = s / dj;
            }
        }
        // Forward then backward substitution.
        let mut x = b.to_vec();
        for i in 0..n {
            let mut s = x[i];
            for k in 0..i {
                s -= l[i * n + k] * x[k];
            }
            x[i] = s / l[i * n + i];
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in (i + 1)..n {
                s -= l[k * n + i] * x[k];
            }
            x[i] = s / l[i * n + i];
        }
        Ok(x)
    }
}

pub fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, &x| m.max(x.abs()))
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_small_spd_system() {
        let mut m = DenseMatrix::zeros(3);
        // A = diag(2,3,4) + ones rank-one bump, SPD.
        for i in 0..3 {
            for j in 0..3 {
                m.add(i, j, 1.0);
            }
            m.add(i, i, 1.0 + i as f64);
        }
        let x_true = [1.0, -2.0, 0.5];
        let mut b = [0.0; 3];
        for i in 0..3 {
            for j in 0..3 {
                b[i] += m.at(i, j) * x_true[j];
            }
        }
        let x = m.solve_spd(&b).unwrap();
        for i in 0..3 {
            assert!((x[i] - x_true[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_indefinite_matrix() {
        let mut m = DenseMatrix::zeros(2);
        m.add(0, 0, 1.0);
        m.add(1, 1, -1.0);
        assert!(matches!(
            m.solve_spd(&[1.0, 1.0]),
            Err(LinalgError::NotPositiveDefinite { pivot: 1 })
        ));
    }
}
