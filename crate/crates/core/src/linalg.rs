//! Small dense symmetric matrices (n ≤ 4) and the handful of f64 kernels the
//! geometry code needs.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::num::{Num, MAX_DIM};

/// Square matrix of size `n ≤ MAX_DIM` with inline storage.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SMat<T> {
    pub n: usize,
    pub a: [[T; MAX_DIM]; MAX_DIM],
}

impl<T: Num> SMat<T> {
    pub fn zeros(n: usize) -> Self {
        SMat { n, a: [[T::zero(); MAX_DIM]; MAX_DIM] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.a[i][i] = T::one();
        }
        m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.a[i][j]
    }

    #[inline]
    pub fn set_sym(&mut self, i: usize, j: usize, v: T) {
        self.a[i][j] = v;
        self.a[j][i] = v;
    }

    pub fn scale(&self, s: T) -> Self {
        let mut m = *self;
        for i in 0..self.n {
            for j in 0..self.n {
                m.a[i][j] = self.a[i][j] * s;
            }
        }
        m
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut m = *self;
        for i in 0..self.n {
            for j in 0..self.n {
                m.a[i][j] = self.a[i][j] + o.a[i][j];
            }
        }
        m
    }

    pub fn map_f64(&self) -> SMat<f64> {
        let mut m = SMat::<f64>::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                m.a[i][j] = self.a[i][j].re();
            }
        }
        m
    }
}

impl SMat<f64> {
    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.a[i][j] = f(i, j);
            }
        }
        m
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.a[i][j])
    }

    pub fn from_dmatrix(m: &DMatrix<f64>) -> Self {
        Self::from_fn(m.nrows(), |i, j| m[(i, j)])
    }

    pub fn quad(&self, u: &[f64], v: &[f64]) -> f64 {
        let mut s = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                s += u[i] * self.a[i][j] * v[j];
            }
        }
        s
    }

    pub fn mul_vec(&self, v: &[f64]) -> [f64; MAX_DIM] {
        let mut out = [0.0; MAX_DIM];
        for i in 0..self.n {
            for j in 0..self.n {
                out[i] += self.a[i][j] * v[j];
            }
        }
        out
    }

    pub fn max_asymmetry(&self) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..self.n {
            for j in 0..i {
                m = m.max((self.a[i][j] - self.a[j][i]).abs());
            }
        }
        m
    }

    /// Positive-definiteness via leading principal minors.
    pub fn is_positive_definite(&self) -> bool {
        (1..=self.n).all(|k| {
            let sub = DMatrix::from_fn(k, k, |i, j| self.a[i][j]);
            sub.determinant() > 0.0
        })
    }

    pub fn determinant(&self) -> f64 {
        self.to_dmatrix().determinant()
    }

    pub fn inverse(&self) -> Option<Self> {
        self.to_dmatrix().try_inverse().map(|m| Self::from_dmatrix(&m))
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.a[i][i]).sum()
    }
}

/// Eigenvalues (ascending) of the symmetric pencil `a x = λ b x`, `b` positive definite.
pub fn generalized_symmetric_eigenvalues(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Option<Vec<f64>> {
    let chol = b.clone().cholesky()?;
    let l = chol.l();
    let linv = l.clone().try_inverse()?;
    let c = &linv * a * linv.transpose();
    let sym = (&c + c.transpose()) * 0.5;
    let mut ev: Vec<f64> = SymmetricEigen::new(sym).eigenvalues.iter().copied().collect();
    ev.sort_by(|x, y| x.total_cmp(y));
    Some(ev)
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn cross3(a: &[f64], b: &[f64]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Solve a small dense linear system in place; `None` when singular.
pub fn solve_dense(a: &DMatrix<f64>, b: &[f64]) -> Option<Vec<f64>> {
    let rhs = nalgebra::DVector::from_column_slice(b);
    a.clone().lu().solve(&rhs).map(|x| x.iter().copied().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pencil_eigenvalues_match_scaled_identity() {
        let b = DMatrix::from_row_slice(2, 2, &[4.0, 0.0, 0.0, 4.0]);
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, -4.0]);
        let ev = generalized_symmetric_eigenvalues(&a, &b).unwrap();
        assert!((ev[0] + 1.0).abs() < 1e-14);
        assert!((ev[1] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn leading_minors_detect_indefinite() {
        let m = SMat::from_fn(2, |i, j| if i == j { 1.0 } else { 2.0 });
        assert!(!m.is_positive_definite());
        assert!(SMat::<f64>::identity(3).is_positive_definite());
    }
}
