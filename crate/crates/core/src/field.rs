//! Vector fields `F: X → ℝⁿ` of variational inequalities.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{check_dim, Error, Result};

pub trait VectorField: Send + Sync {
    fn dim(&self) -> usize;
    fn eval(&self, x: &[f64]) -> Vec<f64>;
    fn describe(&self) -> String {
        "field".into()
    }
}

/// `F(x) = Mx + q`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineField {
    matrix: DMatrix<f64>,
    offset: DVector<f64>,
}

impl AffineField {
    pub fn new(matrix: Vec<Vec<f64>>, offset: Vec<f64>) -> Result<Self> {
        let n = offset.len();
        check_dim(n, matrix.len())?;
        for row in &matrix {
            check_dim(n, row.len())?;
        }
        if n == 0 {
            return Err(Error::InvalidArgument("affine field needs dimension >= 1".into()));
        }
        let flat: Vec<f64> = matrix.into_iter().flatten().collect();
        Ok(Self { matrix: DMatrix::from_row_slice(n, n, &flat), offset: DVector::from_vec(offset) })
    }

    /// `F(x) = x + q`.
    pub fn shifted(offset: Vec<f64>) -> Self {
        let n = offset.len();
        Self { matrix: DMatrix::identity(n, n), offset: DVector::from_vec(offset) }
    }

    /// `F(x) = x − u`.
    pub fn shifted_identity(anchor: &[f64]) -> Self {
        Self::shifted(anchor.iter().map(|u| 0.0 - u).collect())
    }

    pub fn identity(dim: usize) -> Self {
        Self::shifted(vec![0.0; dim])
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Spectral norm of `M`, the Lipschitz modulus.
    pub fn lipschitz(&self) -> f64 {
        self.matrix.clone().svd(false, false).singular_values.max()
    }

    /// Smallest eigenvalue of the symmetric part of `M`, the strong monotonicity modulus.
    pub fn monotonicity(&self) -> f64 {
        let sym = (&self.matrix + self.matrix.transpose()) * 0.5;
        sym.symmetric_eigen().eigenvalues.min()
    }
}

impl VectorField for AffineField {
    fn dim(&self) -> usize {
        self.offset.len()
    }

    fn eval(&self, x: &[f64]) -> Vec<f64> {
        let n = self.offset.len();
        let mut out = self.offset.as_slice().to_vec();
        for i in 0..n {
            let mut s = 0.0;
            for j in 0..n {
                let m = self.matrix[(i, j)];
                if m != 0.0 {
                    s += m * x[j];
                }
            }
            out[i] += s;
        }
        out
    }

    fn describe(&self) -> String {
        format!("affine(M={:?}, q={:?})", self.matrix.as_slice(), self.offset.as_slice())
    }
}

/// A field backed by a closure.
#[derive(Clone)]
pub struct FnField {
    dim: usize,
    name: String,
    f: Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>,
}

impl FnField {
    pub fn new(dim: usize, name: impl Into<String>, f: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static) -> Self {
        Self { dim, name: name.into(), f: Arc::new(f) }
    }
}

impl fmt::Debug for FnField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FnField({}, dim={})", self.name, self.dim)
    }
}

impl VectorField for FnField {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, x: &[f64]) -> Vec<f64> {
        (self.f)(x)
    }

    fn describe(&self) -> String {
        self.name.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn affine_eval_and_moduli() {
        let f = AffineField::new(vec![vec![1.0, 2.0], vec![-2.0, 1.0]], vec![0.5, 0.0]).unwrap();
        assert_eq!(f.eval(&[1.0, 1.0]), vec![3.5, -1.0]);
        assert!((f.monotonicity() - 1.0).abs() < 1e-12);
        assert!((f.lipschitz() - 5f64.sqrt()).abs() < 1e-12);
        let g = AffineField::shifted_identity(&[-0.4, 0.0, 1.0]);
        assert_eq!(g.eval(&[0.0, 0.0, 1.0]), vec![0.4, 0.0, 0.0]);
    }
}
