use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub type MapFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;
pub type JacobianFn = Arc<dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync>;

/// Coordinate change `q -> q~` with its Jacobian `J^i_j = dq~^i / dq^j`.
#[derive(Clone)]
pub struct Transition {
    dim: usize,
    forward: MapFn,
    jacobian: JacobianFn,
    inverse: Option<MapFn>,
}

impl fmt::Debug for Transition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Transition")
            .field("dim", &self.dim)
            .field("closed_form_inverse", &self.inverse.is_some())
            .finish()
    }
}

impl Transition {
    pub fn new<F, J>(dim: usize, forward: F, jacobian: J) -> Self
    where
        F: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
        J: Fn(&[f64]) -> DMatrix<f64> + Send + Sync + 'static,
    {
        Transition { dim, forward: Arc::new(forward), jacobian: Arc::new(jacobian), inverse: None }
    }

    pub fn with_inverse<G>(mut self, inverse: G) -> Self
    where
        G: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        self.inverse = Some(Arc::new(inverse));
        self
    }

    pub fn identity(dim: usize) -> Self {
        Transition::new(dim, |q| q.to_vec(), move |_| DMatrix::identity(dim, dim)).with_inverse(|q| q.to_vec())
    }

    /// `q~ = M q + c`.
    pub fn affine(matrix: DMatrix<f64>, offset: Vec<f64>) -> Result<Self> {
        let dim = matrix.nrows();
        if matrix.ncols() != dim || offset.len() != dim {
            return Err(Error::dims("affine transition must be square with matching offset"));
        }
        let inv = matrix.clone().try_inverse().ok_or_else(|| Error::NonInvertibleJacobian(offset.clone()))?;
        let (m, c) = (matrix.clone(), DVector::from_vec(offset.clone()));
        let (mi, ci) = (inv, DVector::from_vec(offset));
        Ok(Transition::new(
            dim,
            move |q| (&m * DVector::from_column_slice(q) + &c).iter().copied().collect(),
            move |_| matrix.clone(),
        )
        .with_inverse(move |qt| (&mi * (DVector::from_column_slice(qt) - &ci)).iter().copied().collect()))
    }

    /// Lorentz boost with rapidity `alpha` along axis 1 of a Minkowski chart of dimension `dim`.
    pub fn lorentz_boost(dim: usize, alpha: f64) -> Self {
        assert!(dim >= 2, "a boost needs a time and one space axis");
        let mut m = DMatrix::identity(dim, dim);
        let (ch, sh) = (alpha.cosh(), alpha.sinh());
        m[(0, 0)] = ch;
        m[(0, 1)] = -sh;
        m[(1, 0)] = -sh;
        m[(1, 1)] = ch;
        Transition::affine(m, vec![0.0; dim]).expect("boost matrix is invertible")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn forward(&self, q: &[f64]) -> Vec<f64> {
        (self.forward)(q)
    }

    pub fn jacobian(&self, q: &[f64]) -> DMatrix<f64> {
        (self.jacobian)(q)
    }

    pub fn jacobian_det(&self, q: &[f64]) -> f64 {
        self.jacobian(q).determinant()
    }

    pub fn check_invertible(&self, q: &[f64], eps: f64) -> Result<()> {
        if self.jacobian_det(q).abs() <= eps {
            return Err(Error::NonInvertibleJacobian(q.to_vec()));
        }
        Ok(())
    }

    /// `q` with `forward(q) = target`: the closed-form inverse when supplied,
    /// otherwise Newton iteration from `guess`.
    pub fn inverse(&self, target: &[f64], guess: &[f64]) -> Result<Vec<f64>> {
        if let Some(inv) = &self.inverse {
            return Ok(inv(target));
        }
        let mut q = guess.to_vec();
        let t = DVector::from_column_slice(target);
        for _ in 0..100 {
            let r = DVector::from_vec(self.forward(&q)) - &t;
            let scale = t.amax().max(1.0);
            if r.amax() <= 1e-14 * scale {
                return Ok(q);
            }
            let j = self.jacobian(&q);
            let dq = j.lu().solve(&r).ok_or_else(|| Error::NonInvertibleJacobian(q.clone()))?;
            // damped step keeps Newton inside the region where the map is monotone
            let mut lambda = 1.0;
            loop {
                let trial: Vec<f64> = q.iter().zip(dq.iter()).map(|(a, d)| a - lambda * d).collect();
                let rt = DVector::from_vec(self.forward(&trial)) - &t;
                if rt.norm() < r.norm() || lambda < 1e-6 {
                    q = trial;
                    break;
                }
                lambda *= 0.5;
            }
        }
        let r = DVector::from_vec(self.forward(&q)) - &t;
        if r.amax() <= 1e-10 * t.amax().max(1.0) {
            Ok(q)
        } else {
            Err(Error::NonInvertibleJacobian(q))
        }
    }
}

/// A coordinate chart on `Q` with at most one transition to a second chart.
#[derive(Clone, Debug)]
pub struct Chart {
    names: Vec<String>,
    transition: Option<Transition>,
    eps: f64,
}

impl Chart {
    pub fn new(names: Vec<String>) -> Result<Self> {
        if names.is_empty() {
            return Err(Error::dims("chart needs at least one coordinate"));
        }
        Ok(Chart { names, transition: None, eps: 1e-12 })
    }

    /// Chart named `q0..q{dim-1}`.
    pub fn standard(dim: usize) -> Result<Self> {
        Self::new((0..dim).map(|i| format!("q{i}")).collect())
    }

    pub fn with_transition(mut self, transition: Transition) -> Result<Self> {
        if transition.dim() != self.dim() {
            return Err(Error::dims(format!(
                "transition of dimension {} on a chart of dimension {}",
                transition.dim(),
                self.dim()
            )));
        }
        self.transition = Some(transition);
        Ok(self)
    }

    /// Singularity guard (relative to the local coordinate scale).
    pub fn with_epsilon(mut self, eps: f64) -> Self {
        self.eps = eps;
        self
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn transition(&self) -> Option<&Transition> {
        self.transition.as_ref()
    }

    pub fn epsilon(&self) -> f64 {
        self.eps
    }
}
