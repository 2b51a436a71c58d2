use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::poly::Polynomial;

pub type ScalarFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
pub type GradientFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;
pub type HessianFn = Arc<dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync>;

/// How an object produces its derivatives; tests pick tolerances from this.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GradientMode {
    Analytic,
    CentralDifference { step: f64 },
}

pub const DEFAULT_FD_STEP: f64 = 1e-6;

/// Step used for coordinate `x`, scaled to the coordinate's magnitude.
pub(crate) fn scaled_step(base: f64, x: f64) -> f64 {
    base * x.abs().max(1.0)
}

/// A real function of configuration coordinates, used for coefficients of
/// affine observables, gauge potentials and the like.
#[derive(Clone)]
pub enum ScalarField {
    Polynomial(Polynomial),
    Function { nvars: usize, value: ScalarFn, gradient: Option<GradientFn>, hessian: Option<HessianFn> },
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarField::Polynomial(p) => write!(f, "Polynomial({p:?})"),
            ScalarField::Function { nvars, gradient, hessian, .. } => f
                .debug_struct("Function")
                .field("nvars", nvars)
                .field("analytic_gradient", &gradient.is_some())
                .field("analytic_hessian", &hessian.is_some())
                .finish(),
        }
    }
}

impl ScalarField {
    pub fn constant(nvars: usize, c: f64) -> Self {
        ScalarField::Polynomial(Polynomial::constant(nvars, c))
    }

    pub fn zero(nvars: usize) -> Self {
        ScalarField::Polynomial(Polynomial::zero(nvars))
    }

    pub fn coordinate(nvars: usize, i: usize) -> Self {
        ScalarField::Polynomial(Polynomial::var(nvars, i))
    }

    /// A closure with no analytic derivatives; gradients fall back to central differences.
    pub fn function<F>(nvars: usize, value: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        ScalarField::Function { nvars, value: Arc::new(value), gradient: None, hessian: None }
    }

    pub fn with_gradient<F, G>(nvars: usize, value: F, gradient: G) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
        G: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        ScalarField::Function { nvars, value: Arc::new(value), gradient: Some(Arc::new(gradient)), hessian: None }
    }

    pub fn nvars(&self) -> usize {
        match self {
            ScalarField::Polynomial(p) => p.nvars(),
            ScalarField::Function { nvars, .. } => *nvars,
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        match self {
            ScalarField::Polynomial(p) => p.eval(x),
            ScalarField::Function { value, .. } => value(x),
        }
    }

    pub fn has_analytic_gradient(&self) -> bool {
        match self {
            ScalarField::Polynomial(_) => true,
            ScalarField::Function { gradient, .. } => gradient.is_some(),
        }
    }

    pub fn has_analytic_hessian(&self) -> bool {
        match self {
            ScalarField::Polynomial(_) => true,
            ScalarField::Function { hessian, .. } => hessian.is_some(),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, ScalarField::Polynomial(p) if p.is_zero())
    }

    /// Analytic gradient, or `None` if the field only has values.
    pub fn analytic_gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        match self {
            ScalarField::Polynomial(p) => Some((0..p.nvars()).map(|i| p.partial(i).eval(x)).collect()),
            ScalarField::Function { gradient, .. } => gradient.as_ref().map(|g| g(x)),
        }
    }

    pub fn analytic_hessian(&self, x: &[f64]) -> Option<DMatrix<f64>> {
        match self {
            ScalarField::Polynomial(p) => {
                let n = p.nvars();
                let grads = p.gradient();
                Some(DMatrix::from_fn(n, n, |i, j| grads[i].partial(j).eval(x)))
            }
            ScalarField::Function { hessian, .. } => hessian.as_ref().map(|h| h(x)),
        }
    }

    /// Gradient, analytic when available, central differences with `step` otherwise.
    pub fn gradient(&self, x: &[f64], step: f64) -> Vec<f64> {
        self.analytic_gradient(x).unwrap_or_else(|| central_gradient(&|y: &[f64]| self.value(y), x, step))
    }

    pub fn hessian(&self, x: &[f64], step: f64) -> DMatrix<f64> {
        if let Some(h) = self.analytic_hessian(x) {
            return h;
        }
        let n = self.nvars();
        if self.has_analytic_gradient() {
            let mut raw = DMatrix::zeros(n, n);
            let mut xs = x.to_vec();
            for j in 0..n {
                let h = scaled_step(step.max(1e-5), x[j]);
                xs[j] = x[j] + h;
                let gp = self.gradient(&xs, step);
                xs[j] = x[j] - h;
                let gm = self.gradient(&xs, step);
                xs[j] = x[j];
                for i in 0..n {
                    raw[(i, j)] = (gp[i] - gm[i]) / (2.0 * h);
                }
            }
            return (&raw + raw.transpose()) * 0.5;
        }
        second_differences(&|y: &[f64]| self.value(y), x, step.max(1e-4))
    }

    /// Exact partial derivative field when derivatives are analytic.
    pub fn partial_field(&self, i: usize) -> Result<ScalarField> {
        match self {
            ScalarField::Polynomial(p) => Ok(ScalarField::Polynomial(p.partial(i))),
            ScalarField::Function { nvars, gradient: Some(g), hessian, .. } => {
                let g = g.clone();
                let gradient = hessian
                    .clone()
                    .map(|h| -> GradientFn { Arc::new(move |x: &[f64]| h(x).row(i).iter().copied().collect()) });
                Ok(ScalarField::Function { nvars: *nvars, value: Arc::new(move |x| g(x)[i]), gradient, hessian: None })
            }
            ScalarField::Function { .. } => {
                Err(Error::MissingAnalyticPartials("partial derivative of a value-only field".into()))
            }
        }
    }

    pub fn as_polynomial(&self) -> Option<&Polynomial> {
        match self {
            ScalarField::Polynomial(p) => Some(p),
            _ => None,
        }
    }
}

pub(crate) fn central_gradient(f: &dyn Fn(&[f64]) -> f64, x: &[f64], step: f64) -> Vec<f64> {
    let mut xs = x.to_vec();
    (0..x.len())
        .map(|i| {
            let h = scaled_step(step, x[i]);
            xs[i] = x[i] + h;
            let fp = f(&xs);
            xs[i] = x[i] - h;
            let fm = f(&xs);
            xs[i] = x[i];
            (fp - fm) / (2.0 * h)
        })
        .collect()
}

pub(crate) fn second_differences(f: &dyn Fn(&[f64]) -> f64, x: &[f64], step: f64) -> DMatrix<f64> {
    let n = x.len();
    let hs: Vec<f64> = x.iter().map(|&xi| scaled_step(step, xi)).collect();
    let f0 = f(x);
    let mut out = DMatrix::zeros(n, n);
    let mut w = x.to_vec();
    for i in 0..n {
        w[i] = x[i] + hs[i];
        let fp = f(&w);
        w[i] = x[i] - hs[i];
        let fm = f(&w);
        w[i] = x[i];
        out[(i, i)] = (fp - 2.0 * f0 + fm) / (hs[i] * hs[i]);
        for j in 0..i {
            let mut corner = |si: f64, sj: f64| {
                w[i] = x[i] + si * hs[i];
                w[j] = x[j] + sj * hs[j];
                let v = f(&w);
                w[i] = x[i];
                w[j] = x[j];
                v
            };
            let m =
                (corner(1.0, 1.0) - corner(1.0, -1.0) - corner(-1.0, 1.0) + corner(-1.0, -1.0)) / (4.0 * hs[i] * hs[j]);
            out[(i, j)] = m;
            out[(j, i)] = m;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finite_difference_fallback_is_second_order() {
        let f = ScalarField::function(1, |x| x[0].powi(3));
        let exact = 3.0 * 0.7f64.powi(2);
        let e1 = (f.gradient(&[0.7], 1e-2)[0] - exact).abs();
        let e2 = (f.gradient(&[0.7], 5e-3)[0] - exact).abs();
        // cubic: truncation error is exactly h^2 f'''/6 = h^2
        assert!((e1 / e2 - 4.0).abs() < 1e-3, "ratio {}", e1 / e2);
    }

    #[test]
    fn value_only_field_has_no_exact_partial() {
        let f = ScalarField::function(2, |x| x[0] * x[1]);
        assert!(matches!(f.partial_field(0), Err(Error::MissingAnalyticPartials(_))));
    }

    #[test]
    fn polynomial_hessian_is_exact() {
        let x = Polynomial::var(2, 0);
        let y = Polynomial::var(2, 1);
        let f = ScalarField::Polynomial(x.mul(&x).mul(&y));
        let h = f.analytic_hessian(&[2.0, 3.0]).unwrap();
        assert_eq!(h[(0, 0)], 6.0);
        assert_eq!(h[(0, 1)], 4.0);
        assert_eq!(h[(1, 1)], 0.0);
    }
}
