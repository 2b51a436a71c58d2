use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use super::field::scaled_step;
use crate::error::{Error, Result};

pub type MetricFn = Arc<dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync>;
pub type MetricDerivativeFn = Arc<dyn Fn(&[f64]) -> Vec<DMatrix<f64>> + Send + Sync>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Signature {
    /// `(+, -, ..., -)`
    Lorentzian,
}

/// Position-dependent inverse metric `g^{uv}(q)`.
#[derive(Clone)]
pub struct MetricField {
    dim: usize,
    inverse: MetricFn,
    derivative: Option<MetricDerivativeFn>,
    signature: Signature,
    fd_step: f64,
}

impl fmt::Debug for MetricField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MetricField")
            .field("dim", &self.dim)
            .field("signature", &self.signature)
            .field("analytic_derivative", &self.derivative.is_some())
            .finish()
    }
}

impl MetricField {
    pub fn new<F>(dim: usize, inverse: F) -> Self
    where
        F: Fn(&[f64]) -> DMatrix<f64> + Send + Sync + 'static,
    {
        MetricField {
            dim,
            inverse: Arc::new(inverse),
            derivative: None,
            signature: Signature::Lorentzian,
            fd_step: 1e-5,
        }
    }

    /// Analytic `d_l g^{uv}` as one matrix per coordinate `l`.
    pub fn with_derivative<D>(mut self, derivative: D) -> Self
    where
        D: Fn(&[f64]) -> Vec<DMatrix<f64>> + Send + Sync + 'static,
    {
        self.derivative = Some(Arc::new(derivative));
        self
    }

    pub fn minkowski(dim: usize) -> Self {
        let eta = minkowski_matrix(dim);
        MetricField::new(dim, move |_| eta.clone()).with_derivative(move |_| vec![DMatrix::zeros(dim, dim); dim])
    }

    /// Weak static field around a softened point mass:
    /// `g_00 = 1 + 2phi`, `g_ii = -(1 - 2phi)`, `phi = -kappa / sqrt(r^2 + eps^2)`.
    pub fn weak_field(dim: usize, kappa: f64, softening: f64) -> Self {
        let phi = move |q: &[f64]| {
            let r2: f64 = q[1..].iter().map(|x| x * x).sum();
            let d = (r2 + softening * softening).sqrt();
            let grad: Vec<f64> = (0..q.len()).map(|l| if l == 0 { 0.0 } else { kappa * q[l] / (d * d * d) }).collect();
            (-kappa / d, grad)
        };
        MetricField::new(dim, move |q| {
            let (f, _) = phi(q);
            DMatrix::from_fn(dim, dim, |u, v| match (u, v) {
                (0, 0) => 1.0 / (1.0 + 2.0 * f),
                (u, v) if u == v => -1.0 / (1.0 - 2.0 * f),
                _ => 0.0,
            })
        })
        .with_derivative(move |q| {
            let (f, grad) = phi(q);
            grad.iter()
                .map(|dl| {
                    DMatrix::from_fn(dim, dim, |u, v| match (u, v) {
                        (0, 0) => -2.0 * dl / (1.0 + 2.0 * f).powi(2),
                        (u, v) if u == v => -2.0 * dl / (1.0 - 2.0 * f).powi(2),
                        _ => 0.0,
                    })
                })
                .collect()
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn signature(&self) -> Signature {
        self.signature
    }

    pub fn has_analytic_derivative(&self) -> bool {
        self.derivative.is_some()
    }

    pub fn inverse_at(&self, q: &[f64]) -> DMatrix<f64> {
        (self.inverse)(q)
    }

    /// Covariant components `g_{uv}`.
    pub fn lower_at(&self, q: &[f64]) -> Result<DMatrix<f64>> {
        let ginv = self.inverse_at(q);
        let det = ginv.determinant();
        if !det.is_finite() || det.abs() < 1e-300 {
            return Err(Error::MetricInversion(q.to_vec()));
        }
        ginv.try_inverse().ok_or_else(|| Error::MetricInversion(q.to_vec()))
    }

    /// `d_l g^{uv}`, analytic when supplied, central differences otherwise.
    pub fn inverse_derivative(&self, q: &[f64]) -> Vec<DMatrix<f64>> {
        if let Some(d) = &self.derivative {
            return d(q);
        }
        let mut qs = q.to_vec();
        (0..self.dim)
            .map(|l| {
                let h = scaled_step(self.fd_step, q[l]);
                qs[l] = q[l] + h;
                let gp = self.inverse_at(&qs);
                qs[l] = q[l] - h;
                let gm = self.inverse_at(&qs);
                qs[l] = q[l];
                (gp - gm) / (2.0 * h)
            })
            .collect()
    }

    /// Symmetric, `g^{00} > 0`, invertible.
    pub fn validate_at(&self, q: &[f64]) -> Result<()> {
        let g = self.inverse_at(q);
        if g.nrows() != self.dim || g.ncols() != self.dim {
            return Err(Error::InvalidMetric(format!("expected {0}x{0} components", self.dim)));
        }
        let defect = (&g - g.transpose()).amax();
        if defect > 1e-12 * g.amax().max(1.0) {
            return Err(Error::InvalidMetric(format!("asymmetric at {q:?} (defect {defect:e})")));
        }
        if g[(0, 0)] <= 0.0 {
            return Err(Error::InvalidMetric(format!("g^00 = {} is not positive at {q:?}", g[(0, 0)])));
        }
        self.lower_at(q).map(|_| ())
    }
}

pub fn minkowski_matrix(dim: usize) -> DMatrix<f64> {
    DMatrix::from_fn(dim, dim, |i, j| match (i, j) {
        (0, 0) => 1.0,
        (i, j) if i == j => -1.0,
        _ => 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minkowski_is_its_own_inverse() {
        let g = MetricField::minkowski(4);
        let lower = g.lower_at(&[0.0; 4]).unwrap();
        assert_eq!(lower, minkowski_matrix(4));
        g.validate_at(&[1.0, 2.0, 3.0, 4.0]).unwrap();
    }

    #[test]
    fn negative_time_component_is_rejected() {
        let g = MetricField::new(2, |_| DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![-1.0, 1.0])));
        assert!(matches!(g.validate_at(&[0.0, 0.0]), Err(Error::InvalidMetric(_))));
    }

    #[test]
    fn asymmetric_metric_is_rejected() {
        let g = MetricField::new(2, |_| DMatrix::from_row_slice(2, 2, &[1.0, 0.2, 0.0, -1.0]));
        assert!(g.validate_at(&[0.0, 0.0]).is_err());
    }

    #[test]
    fn finite_difference_derivative_matches_analytic() {
        let g = MetricField::new(2, |q| {
            DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0 + q[1] * q[1], -1.0]))
        });
        let d = g.inverse_derivative(&[0.0, 0.5]);
        assert!((d[1][(0, 0)] - 1.0).abs() < 1e-9);
        assert!(d[0].amax() < 1e-12);
    }

    #[test]
    fn weak_field_derivative_matches_differences() {
        let g = MetricField::weak_field(4, 0.2, 0.5);
        let numeric = MetricField::new(4, {
            let g = g.clone();
            move |q| g.inverse_at(q)
        });
        let q = [0.3, 0.7, -0.4, 1.1];
        g.validate_at(&q).unwrap();
        for (a, b) in g.inverse_derivative(&q).iter().zip(numeric.inverse_derivative(&q)) {
            assert!((a - b).amax() < 1e-8);
        }
    }
}
