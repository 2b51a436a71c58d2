use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use super::field::{central_gradient, scaled_step, second_differences, GradientMode, ScalarField, DEFAULT_FD_STEP};
use super::point::{PhasePoint, VerticalPhasePoint};
use crate::error::{Error, Result};
use crate::poly::Polynomial;

pub type PhaseFn = Arc<dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync>;
pub type PhaseGradientFn = Arc<dyn Fn(&[f64], &[f64]) -> (Vec<f64>, Vec<f64>) + Send + Sync>;
pub type PhaseHessianFn = Arc<dyn Fn(&[f64], &[f64]) -> DMatrix<f64> + Send + Sync>;

/// Which phase space an observable lives on.
///
/// On `T*Q` there is one momentum per configuration coordinate. On `V*Q` the
/// configuration coordinates are `(t, q^1..q^m)` and momentum `p_k` pairs with
/// `q^k`, so `t` has no conjugate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PhaseSpace {
    Cotangent,
    Vertical,
}

/// `a^j(x) y_j + b(x)`.
#[derive(Clone, Debug)]
pub struct AffineObservable {
    pub a: Vec<ScalarField>,
    pub b: ScalarField,
}

#[derive(Clone)]
pub enum GeneralObservable {
    /// Polynomial in the flattened variables `(x, y)`.
    Polynomial(Polynomial),
    Function {
        value: PhaseFn,
        gradient: Option<PhaseGradientFn>,
        hessian: Option<PhaseHessianFn>,
    },
}

#[derive(Clone)]
pub enum ObservableKind {
    Affine(AffineObservable),
    General(GeneralObservable),
}

/// A smooth function on phase space. Immutable once built.
#[derive(Clone)]
pub struct Observable {
    nq: usize,
    np: usize,
    kind: ObservableKind,
    fd_step: f64,
}

impl fmt::Debug for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.kind {
            ObservableKind::Affine(a) => format!("Affine({a:?})"),
            ObservableKind::General(GeneralObservable::Polynomial(p)) => format!("Polynomial({p:?})"),
            ObservableKind::General(GeneralObservable::Function { gradient, hessian, .. }) => {
                format!("Function(analytic_gradient: {}, analytic_hessian: {})", gradient.is_some(), hessian.is_some())
            }
        };
        write!(f, "Observable[{:?}, nq={}, np={}] {kind}", self.space(), self.nq, self.np)
    }
}

fn space_for(nq: usize, np: usize) -> Result<PhaseSpace> {
    if nq == 0 {
        Err(Error::dims("observable with no configuration coordinates"))
    } else if nq == np {
        Ok(PhaseSpace::Cotangent)
    } else if np + 1 == nq {
        Ok(PhaseSpace::Vertical)
    } else {
        Err(Error::dims(format!("{nq} coordinates with {np} momenta is neither T*Q nor V*Q")))
    }
}

impl Observable {
    pub fn affine(a: Vec<ScalarField>, b: ScalarField) -> Result<Self> {
        let nq = b.nvars();
        let np = a.len();
        space_for(nq, np)?;
        if let Some(bad) = a.iter().find(|f| f.nvars() != nq) {
            return Err(Error::dims(format!("coefficient with {} variables, expected {nq}", bad.nvars())));
        }
        Ok(Observable { nq, np, kind: ObservableKind::Affine(AffineObservable { a, b }), fd_step: DEFAULT_FD_STEP })
    }

    /// Polynomial in the flattened variables `(x_0..x_{nq-1}, y_0..y_{np-1})`.
    pub fn polynomial(nq: usize, np: usize, poly: Polynomial) -> Result<Self> {
        space_for(nq, np)?;
        if poly.nvars() != nq + np {
            return Err(Error::dims(format!("polynomial in {} variables, expected {}", poly.nvars(), nq + np)));
        }
        Ok(Observable {
            nq,
            np,
            kind: ObservableKind::General(GeneralObservable::Polynomial(poly)),
            fd_step: DEFAULT_FD_STEP,
        })
    }

    /// A closure observable; derivatives by central differences.
    pub fn from_fn<F>(nq: usize, np: usize, value: F) -> Result<Self>
    where
        F: Fn(&[f64], &[f64]) -> f64 + Send + Sync + 'static,
    {
        space_for(nq, np)?;
        Ok(Observable {
            nq,
            np,
            kind: ObservableKind::General(GeneralObservable::Function {
                value: Arc::new(value),
                gradient: None,
                hessian: None,
            }),
            fd_step: DEFAULT_FD_STEP,
        })
    }

    /// A closure observable with an analytic gradient `(df/dx, df/dy)`.
    pub fn from_fn_with_gradient<F, G>(nq: usize, np: usize, value: F, gradient: G) -> Result<Self>
    where
        F: Fn(&[f64], &[f64]) -> f64 + Send + Sync + 'static,
        G: Fn(&[f64], &[f64]) -> (Vec<f64>, Vec<f64>) + Send + Sync + 'static,
    {
        space_for(nq, np)?;
        Ok(Observable {
            nq,
            np,
            kind: ObservableKind::General(GeneralObservable::Function {
                value: Arc::new(value),
                gradient: Some(Arc::new(gradient)),
                hessian: None,
            }),
            fd_step: DEFAULT_FD_STEP,
        })
    }

    /// Attaches an analytic Hessian over the flattened `(x, y)` variables to a closure observable.
    pub fn with_hessian<H>(mut self, hessian: H) -> Self
    where
        H: Fn(&[f64], &[f64]) -> DMatrix<f64> + Send + Sync + 'static,
    {
        if let ObservableKind::General(GeneralObservable::Function { hessian: h, .. }) = &mut self.kind {
            *h = Some(Arc::new(hessian));
        }
        self
    }

    pub fn with_fd_step(mut self, step: f64) -> Self {
        self.fd_step = step;
        self
    }

    /// `p_j`
    pub fn momentum(nq: usize, np: usize, j: usize) -> Result<Self> {
        let a = (0..np).map(|k| ScalarField::constant(nq, if k == j { 1.0 } else { 0.0 })).collect();
        Self::affine(a, ScalarField::zero(nq))
    }

    /// `x_i`
    pub fn coordinate(nq: usize, np: usize, i: usize) -> Result<Self> {
        let a = (0..np).map(|_| ScalarField::zero(nq)).collect();
        Self::affine(a, ScalarField::coordinate(nq, i))
    }

    pub fn constant(nq: usize, np: usize, c: f64) -> Result<Self> {
        let a = (0..np).map(|_| ScalarField::zero(nq)).collect();
        Self::affine(a, ScalarField::constant(nq, c))
    }

    pub fn config_dim(&self) -> usize {
        self.nq
    }

    pub fn momentum_dim(&self) -> usize {
        self.np
    }

    pub fn space(&self) -> PhaseSpace {
        if self.nq == self.np {
            PhaseSpace::Cotangent
        } else {
            PhaseSpace::Vertical
        }
    }

    /// Offset between momentum index and the index of its conjugate coordinate.
    pub(crate) fn offset(&self) -> usize {
        self.nq - self.np
    }

    pub fn kind(&self) -> &ObservableKind {
        &self.kind
    }

    pub fn as_affine(&self) -> Option<&AffineObservable> {
        match &self.kind {
            ObservableKind::Affine(a) => Some(a),
            _ => None,
        }
    }

    pub fn fd_step(&self) -> f64 {
        self.fd_step
    }

    pub fn gradient_mode(&self) -> GradientMode {
        let analytic = match &self.kind {
            ObservableKind::Affine(a) => a.a.iter().chain(std::iter::once(&a.b)).all(|f| f.has_analytic_gradient()),
            ObservableKind::General(GeneralObservable::Polynomial(_)) => true,
            ObservableKind::General(GeneralObservable::Function { gradient, .. }) => gradient.is_some(),
        };
        if analytic {
            GradientMode::Analytic
        } else {
            GradientMode::CentralDifference { step: self.fd_step }
        }
    }

    pub fn has_analytic_hessian(&self) -> bool {
        match &self.kind {
            ObservableKind::Affine(a) => a.a.iter().chain(std::iter::once(&a.b)).all(|f| f.has_analytic_hessian()),
            ObservableKind::General(GeneralObservable::Polynomial(_)) => true,
            ObservableKind::General(GeneralObservable::Function { hessian, .. }) => hessian.is_some(),
        }
    }

    /// The observable as a polynomial in `(x, y)`, when it is one.
    pub fn to_polynomial(&self) -> Option<Polynomial> {
        let n = self.nq + self.np;
        match &self.kind {
            ObservableKind::General(GeneralObservable::Polynomial(p)) => Some(p.clone()),
            ObservableKind::Affine(af) => {
                let xmap: Vec<usize> = (0..self.nq).collect();
                let mut out = af.b.as_polynomial()?.embed(n, &xmap);
                for (j, aj) in af.a.iter().enumerate() {
                    let term = aj.as_polynomial()?.embed(n, &xmap).mul(&Polynomial::var(n, self.nq + j));
                    out = out.add(&term);
                }
                Some(out)
            }
            _ => None,
        }
    }

    fn check_dims(&self, x: &[f64], y: &[f64]) -> Result<()> {
        if x.len() != self.nq || y.len() != self.np {
            return Err(Error::dims(format!(
                "observable on ({}, {}) evaluated at ({}, {})",
                self.nq,
                self.np,
                x.len(),
                y.len()
            )));
        }
        Ok(())
    }

    pub(crate) fn value_raw(&self, x: &[f64], y: &[f64]) -> f64 {
        match &self.kind {
            ObservableKind::Affine(af) => af.a.iter().zip(y).map(|(a, p)| a.value(x) * p).sum::<f64>() + af.b.value(x),
            ObservableKind::General(GeneralObservable::Polynomial(poly)) => {
                let z: Vec<f64> = x.iter().chain(y).copied().collect();
                poly.eval(&z)
            }
            ObservableKind::General(GeneralObservable::Function { value, .. }) => value(x, y),
        }
    }

    pub(crate) fn gradient_raw(&self, x: &[f64], y: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let step = self.fd_step;
        match &self.kind {
            ObservableKind::Affine(af) => {
                let mut dx = af.b.gradient(x, step);
                for (a, p) in af.a.iter().zip(y) {
                    for (d, g) in dx.iter_mut().zip(a.gradient(x, step)) {
                        *d += g * p;
                    }
                }
                let dy = af.a.iter().map(|a| a.value(x)).collect();
                (dx, dy)
            }
            ObservableKind::General(GeneralObservable::Polynomial(poly)) => {
                let z: Vec<f64> = x.iter().chain(y).copied().collect();
                let g: Vec<f64> = (0..z.len()).map(|i| poly.partial(i).eval(&z)).collect();
                (g[..self.nq].to_vec(), g[self.nq..].to_vec())
            }
            ObservableKind::General(GeneralObservable::Function { gradient: Some(g), .. }) => g(x, y),
            ObservableKind::General(GeneralObservable::Function { value, gradient: None, .. }) => {
                let nq = self.nq;
                let z: Vec<f64> = x.iter().chain(y).copied().collect();
                let g = central_gradient(&|w: &[f64]| value(&w[..nq], &w[nq..]), &z, step);
                (g[..nq].to_vec(), g[nq..].to_vec())
            }
        }
    }

    pub(crate) fn hessian_raw(&self, x: &[f64], y: &[f64]) -> DMatrix<f64> {
        let (nq, np) = (self.nq, self.np);
        let n = nq + np;
        match &self.kind {
            ObservableKind::General(GeneralObservable::Polynomial(poly)) => {
                let z: Vec<f64> = x.iter().chain(y).copied().collect();
                let grads = poly.gradient();
                DMatrix::from_fn(n, n, |i, j| grads[i].partial(j).eval(&z))
            }
            ObservableKind::General(GeneralObservable::Function { hessian: Some(h), .. }) => h(x, y),
            ObservableKind::Affine(af) if self.has_analytic_hessian() => {
                let step = self.fd_step;
                let mut h = DMatrix::zeros(n, n);
                let hb = af.b.hessian(x, step);
                h.view_mut((0, 0), (nq, nq)).copy_from(&hb);
                for (j, (a, p)) in af.a.iter().zip(y).enumerate() {
                    let ha = a.hessian(x, step);
                    let mut block = h.view_mut((0, 0), (nq, nq));
                    block += ha * *p;
                    let ga = a.gradient(x, step);
                    for i in 0..nq {
                        h[(i, nq + j)] = ga[i];
                        h[(nq + j, i)] = ga[i];
                    }
                }
                h
            }
            _ if self.gradient_mode() == GradientMode::Analytic => {
                // Central differences of the analytic gradient.
                let z: Vec<f64> = x.iter().chain(y).copied().collect();
                let mut raw = DMatrix::zeros(n, n);
                let mut zs = z.clone();
                for j in 0..n {
                    let h = scaled_step(self.fd_step.max(1e-5), z[j]);
                    zs[j] = z[j] + h;
                    let (gxp, gyp) = self.gradient_raw(&zs[..nq], &zs[nq..]);
                    zs[j] = z[j] - h;
                    let (gxm, gym) = self.gradient_raw(&zs[..nq], &zs[nq..]);
                    zs[j] = z[j];
                    for (i, (a, b)) in gxp.iter().chain(&gyp).zip(gxm.iter().chain(&gym)).enumerate() {
                        raw[(i, j)] = (a - b) / (2.0 * h);
                    }
                }
                (&raw + raw.transpose()) * 0.5
            }
            _ => {
                let z: Vec<f64> = x.iter().chain(y).copied().collect();
                second_differences(&|w: &[f64]| self.value_raw(&w[..nq], &w[nq..]), &z, self.fd_step.max(1e-4))
            }
        }
    }

    pub fn value(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        self.check_dims(x, y)?;
        Ok(self.value_raw(x, y))
    }

    /// `(df/dx, df/dy)` with a finiteness check.
    pub fn gradient(&self, x: &[f64], y: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        self.check_dims(x, y)?;
        let g = self.gradient_raw(x, y);
        if g.0.iter().chain(&g.1).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("observable gradient".into()));
        }
        Ok(g)
    }

    /// Hessian over the flattened variables `(x, y)`.
    pub fn hessian(&self, x: &[f64], y: &[f64]) -> Result<DMatrix<f64>> {
        self.check_dims(x, y)?;
        let h = self.hessian_raw(x, y);
        if h.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("observable Hessian".into()));
        }
        Ok(h)
    }

    pub fn at(&self, z: &PhasePoint) -> Result<f64> {
        self.value(&z.q, &z.p)
    }

    pub fn at_vertical(&self, s: &VerticalPhasePoint) -> Result<f64> {
        self.value(&s.config(), &s.p)
    }

    /// Pointwise product. Stays polynomial when both factors are.
    pub fn product(&self, other: &Observable) -> Result<Observable> {
        if (self.nq, self.np) != (other.nq, other.np) {
            return Err(Error::dims("product of observables on different spaces"));
        }
        if let (Some(a), Some(b)) = (self.to_polynomial(), other.to_polynomial()) {
            return Observable::polynomial(self.nq, self.np, a.mul(&b));
        }
        let (f, g) = (self.clone(), other.clone());
        let value: PhaseFn = {
            let (f, g) = (f.clone(), g.clone());
            Arc::new(move |x, y| f.value_raw(x, y) * g.value_raw(x, y))
        };
        let both_analytic = f.gradient_mode() == GradientMode::Analytic && g.gradient_mode() == GradientMode::Analytic;
        let gradient: Option<PhaseGradientFn> = both_analytic.then(|| {
            let (f, g) = (f.clone(), g.clone());
            Arc::new(move |x: &[f64], y: &[f64]| {
                let (fv, gv) = (f.value_raw(x, y), g.value_raw(x, y));
                let (fx, fy) = f.gradient_raw(x, y);
                let (gx, gy) = g.gradient_raw(x, y);
                let comb = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(da, db)| fv * db + gv * da).collect();
                (comb(&fx, &gx), comb(&fy, &gy))
            }) as PhaseGradientFn
        });
        let hessian: Option<PhaseHessianFn> = (both_analytic && f.has_analytic_hessian() && g.has_analytic_hessian())
            .then(|| {
                let (f, g) = (f.clone(), g.clone());
                Arc::new(move |x: &[f64], y: &[f64]| {
                    let (fv, gv) = (f.value_raw(x, y), g.value_raw(x, y));
                    let (fx, fy) = f.gradient_raw(x, y);
                    let (gx, gy) = g.gradient_raw(x, y);
                    let df = nalgebra::DVector::from_iterator(fx.len() + fy.len(), fx.into_iter().chain(fy));
                    let dg = nalgebra::DVector::from_iterator(gx.len() + gy.len(), gx.into_iter().chain(gy));
                    f.hessian_raw(x, y) * gv + g.hessian_raw(x, y) * fv + &df * dg.transpose() + dg * df.transpose()
                }) as PhaseHessianFn
            });
        Ok(Observable {
            nq: self.nq,
            np: self.np,
            kind: ObservableKind::General(GeneralObservable::Function { value, gradient, hessian }),
            fd_step: self.fd_step.max(other.fd_step),
        })
    }

    pub(crate) fn from_parts(nq: usize, np: usize, kind: ObservableKind, fd_step: f64) -> Self {
        Observable { nq, np, kind, fd_step }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn affine_evaluation_is_exact() {
        let x = Polynomial::var(2, 0);
        let a = vec![ScalarField::Polynomial(x.clone()), ScalarField::constant(2, 2.0)];
        let b = ScalarField::Polynomial(x.mul(&x));
        let f = Observable::affine(a, b).unwrap();
        let (q, p) = ([1.5, -0.5], [0.25, 3.0]);
        assert_eq!(f.value(&q, &p).unwrap(), 1.5 * 0.25 + 2.0 * 3.0 + 2.25);
        let (gx, gy) = f.gradient(&q, &p).unwrap();
        assert_eq!(gx, vec![0.25 + 3.0, 0.0]);
        assert_eq!(gy, vec![1.5, 2.0]);
    }

    #[test]
    fn affine_to_polynomial_agrees() {
        let x = Polynomial::var(2, 1);
        let f = Observable::affine(
            vec![ScalarField::Polynomial(x.clone()), ScalarField::constant(2, -1.0)],
            ScalarField::Polynomial(x.mul(&x)),
        )
        .unwrap();
        let poly = f.to_polynomial().unwrap();
        let (q, p) = ([0.3, -1.1], [2.0, 0.7]);
        assert!((poly.eval(&[0.3, -1.1, 2.0, 0.7]) - f.value(&q, &p).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn vertical_shape_is_detected() {
        let f = Observable::momentum(3, 2, 0).unwrap();
        assert_eq!(f.space(), PhaseSpace::Vertical);
        assert!(Observable::momentum(3, 1, 0).is_err());
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let f = Observable::momentum(2, 2, 0).unwrap();
        assert!(matches!(f.value(&[0.0], &[1.0, 2.0]), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn non_finite_gradient_is_an_error() {
        let f = Observable::from_fn_with_gradient(1, 1, |_, _| 0.0, |_, _| (vec![f64::NAN], vec![0.0])).unwrap();
        assert!(matches!(f.gradient(&[0.0], &[0.0]), Err(Error::NonFinite(_))));
    }

    #[test]
    fn product_of_closures_matches_finite_differences() {
        let f = Observable::from_fn_with_gradient(
            1,
            1,
            |x, y| x[0].sin() * y[0],
            |x, y| (vec![x[0].cos() * y[0]], vec![x[0].sin()]),
        )
        .unwrap();
        let g = Observable::from_fn(1, 1, |x, y| x[0] + y[0] * y[0]).unwrap();
        let fg = f.product(&g).unwrap();
        let (gx, gy) = fg.gradient(&[0.4], &[1.3]).unwrap();
        let h = 1e-6;
        let v = |a: f64, b: f64| fg.value(&[a], &[b]).unwrap();
        assert!((gx[0] - (v(0.4 + h, 1.3) - v(0.4 - h, 1.3)) / (2.0 * h)).abs() < 1e-6);
        assert!((gy[0] - (v(0.4, 1.3 + h) - v(0.4, 1.3 - h)) / (2.0 * h)).abs() < 1e-6);
    }
}
