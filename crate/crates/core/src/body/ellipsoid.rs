//! Quadric cones `{v : v^T Q v < 0}` with `Q` of signature `(n, 1)`.

use nalgebra::{DMatrix, DVector};

use crate::error::{HilbertError, Result};
use crate::linalg;

#[derive(Debug, Clone)]
pub struct Ellipsoid {
    q: DMatrix<f64>,
}

impl Ellipsoid {
    pub fn new(q: DMatrix<f64>) -> Result<Self> {
        if q.nrows() != q.ncols() || q.nrows() < 2 {
            return Err(HilbertError::InvalidMatrix(
                "form must be square of size at least 2".into(),
            ));
        }
        if q.iter().any(|x| !x.is_finite()) {
            return Err(HilbertError::InvalidMatrix("non-finite entry".into()));
        }
        let scale = q.norm();
        if scale == 0.0 {
            return Err(HilbertError::DegenerateBody("zero form".into()));
        }
        if (&q - q.transpose()).norm() > 1e-12 * scale {
            return Err(HilbertError::NotSymmetric);
        }
        let q = (&q + q.transpose()) * (0.5 / scale);
        let (vals, _) = linalg::sym_eigen(&q);
        let floor = 1e-12 * vals.amax();
        let neg = vals.iter().filter(|&&l| l < -floor).count();
        let pos = vals.iter().filter(|&&l| l > floor).count();
        if neg != 1 || pos != vals.len() - 1 {
            return Err(HilbertError::DegenerateBody(format!(
                "form has signature ({pos},{neg}), expected ({},1)",
                vals.len() - 1
            )));
        }
        Ok(Self { q })
    }

    /// The form `x_1^2 + ... + x_n^2 - x_{n+1}^2` of the unit ball.
    pub fn unit_ball(n: usize) -> Self {
        let mut q = DMatrix::identity(n + 1, n + 1);
        q[(n, n)] = -1.0;
        Self::new(q).expect("signature (n,1)")
    }

    /// The defining form, scaled to unit Frobenius norm.
    pub fn form(&self) -> &DMatrix<f64> {
        &self.q
    }

    pub fn value(&self, v: &DVector<f64>) -> f64 {
        v.dot(&(&self.q * v))
    }

    /// Eigenvector of the negative eigenvalue: a chart covector in which the
    /// body is bounded.
    pub fn negative_axis(&self) -> DVector<f64> {
        let (_, vecs) = linalg::sym_eigen(&self.q);
        vecs.column(0).into_owned()
    }

    /// True when `Q` restricted to `xi^perp` is positive definite.
    pub fn bounded_in(&self, xi: &DVector<f64>) -> bool {
        let w = linalg::complement_basis(xi);
        let a = w.transpose() * &self.q * &w;
        let (vals, _) = linalg::sym_eigen(&a);
        vals[0] > 1e-12
    }

    pub fn transformed(&self, m: &DMatrix<f64>) -> Result<Self> {
        let inv = m
            .clone()
            .try_inverse()
            .ok_or_else(|| HilbertError::InvalidMatrix("singular".into()))?;
        Self::new(inv.transpose() * &self.q * inv)
    }
}
