//! Canonical Poisson brackets on `T*Q` and `V*Q` and the operations built on them.

use std::sync::Arc;

use nalgebra::DMatrix;

use super::field::{GradientFn, ScalarField, ScalarFn};
use super::observable::{AffineObservable, GeneralObservable, Observable, ObservableKind, PhaseGradientFn, PhaseSpace};
use super::point::{PhasePoint, VerticalPhasePoint};
use crate::error::{Error, Result};
use crate::poly::Polynomial;

/// Components `(u^q, u_p)` of a Hamiltonian vector field.
#[derive(Clone, Debug, PartialEq)]
pub struct TangentComponents {
    pub dq: Vec<f64>,
    pub dp: Vec<f64>,
}

fn same_space(f: &Observable, g: &Observable) -> Result<()> {
    if f.config_dim() != g.config_dim() || f.momentum_dim() != g.momentum_dim() {
        return Err(Error::dims(format!(
            "bracket of observables on ({}, {}) and ({}, {})",
            f.config_dim(),
            f.momentum_dim(),
            g.config_dim(),
            g.momentum_dim()
        )));
    }
    Ok(())
}

/// `sum_j (df/dp_j dg/dq^j - df/dq^j dg/dp_j)` from precomputed gradients.
fn pair(off: usize, fx: &[f64], fy: &[f64], gx: &[f64], gy: &[f64]) -> f64 {
    fy.iter().enumerate().map(|(j, fpj)| fpj * gx[j + off] - fx[j + off] * gy[j]).sum()
}

pub(crate) fn bracket_at(f: &Observable, g: &Observable, x: &[f64], y: &[f64]) -> Result<f64> {
    same_space(f, g)?;
    let (fx, fy) = f.gradient(x, y)?;
    let (gx, gy) = g.gradient(x, y)?;
    Ok(pair(f.offset(), &fx, &fy, &gx, &gy))
}

/// `{f, g}_T` at `z`.
pub fn poisson_bracket_t(f: &Observable, g: &Observable, z: &PhasePoint) -> Result<f64> {
    if f.space() != PhaseSpace::Cotangent {
        return Err(Error::dims("T*Q bracket of a vertical observable; pull it back first"));
    }
    bracket_at(f, g, &z.q, &z.p)
}

/// `{f, g}_V` at `s`. The time coordinate never enters.
pub fn poisson_bracket_v(f: &Observable, g: &Observable, s: &VerticalPhasePoint) -> Result<f64> {
    if f.space() != PhaseSpace::Vertical {
        return Err(Error::dims("V*Q bracket of an observable on T*Q"));
    }
    bracket_at(f, g, &s.config(), &s.p)
}

/// `u_f = df/dp d/dq - df/dq d/dp`, so that `u_f -| Omega = -df`.
pub fn hamiltonian_vector_field(f: &Observable, z: &PhasePoint) -> Result<TangentComponents> {
    let (fx, fy) = f.gradient(&z.q, &z.p)?;
    let off = f.offset();
    let mut dq = vec![0.0; fx.len()];
    for (j, v) in fy.iter().enumerate() {
        dq[j + off] = *v;
    }
    let dp = (0..fy.len()).map(|j| -fx[j + off]).collect();
    Ok(TangentComponents { dq, dp })
}

/// `sum_j A_j d_j P - C_j d_j R`, the building block of the closed-form affine bracket.
fn lie_term(
    a: &[ScalarField],
    c: &[ScalarField],
    p: &ScalarField,
    r: &ScalarField,
    off: usize,
    nq: usize,
    step: f64,
) -> ScalarField {
    let polys: Option<Vec<&Polynomial>> = a.iter().chain(c).chain([p, r]).map(|f| f.as_polynomial()).collect();
    if let Some(ps) = polys {
        let np = a.len();
        let (pa, pc, pp, pr) = (&ps[..np], &ps[np..2 * np], ps[2 * np], ps[2 * np + 1]);
        let mut out = Polynomial::zero(nq);
        for j in 0..np {
            out = out.add(&pa[j].mul(&pp.partial(j + off)));
            out = out.sub(&pc[j].mul(&pr.partial(j + off)));
        }
        return ScalarField::Polynomial(out);
    }

    let (a, c, p, r) = (a.to_vec(), c.to_vec(), p.clone(), r.clone());
    let with_hessians = a.iter().chain(&c).chain([&p, &r]).all(|f| f.has_analytic_hessian());
    let value: ScalarFn = {
        let (a, c, p, r) = (a.clone(), c.clone(), p.clone(), r.clone());
        Arc::new(move |x: &[f64]| {
            let gp = p.gradient(x, step);
            let gr = r.gradient(x, step);
            (0..a.len()).map(|j| a[j].value(x) * gp[j + off] - c[j].value(x) * gr[j + off]).sum()
        })
    };
    let gradient: Option<GradientFn> = with_hessians.then(|| {
        Arc::new(move |x: &[f64]| {
            let gp = p.gradient(x, step);
            let gr = r.gradient(x, step);
            let hp = p.hessian(x, step);
            let hr = r.hessian(x, step);
            (0..nq)
                .map(|w| {
                    (0..a.len())
                        .map(|j| {
                            let (ga, gc) = (a[j].gradient(x, step), c[j].gradient(x, step));
                            ga[w] * gp[j + off] + a[j].value(x) * hp[(w, j + off)]
                                - gc[w] * gr[j + off]
                                - c[j].value(x) * hr[(w, j + off)]
                        })
                        .sum()
                })
                .collect()
        }) as GradientFn
    });
    ScalarField::Function { nvars: nq, value, gradient, hessian: None }
}

/// Closed-form bracket of two affine observables.
///
/// For `f = a^j p_j + b` and `g = c^j p_j + d` the bracket is again affine with
/// momentum coefficients `a^j d_j c^v - c^j d_j a^v` and free term
/// `a^j d_j d - c^j d_j b`.
pub fn affine_bracket(f: &Observable, g: &Observable) -> Result<Observable> {
    same_space(f, g)?;
    let (fa, ga) = match (f.kind(), g.kind()) {
        (ObservableKind::Affine(fa), ObservableKind::Affine(ga)) => (fa, ga),
        _ => return Err(Error::QuadraticRequired),
    };
    let analytic = |af: &AffineObservable| af.a.iter().chain([&af.b]).all(|c| c.has_analytic_gradient());
    if !analytic(fa) || !analytic(ga) {
        return Err(Error::MissingAnalyticPartials("affine bracket coefficients".into()));
    }
    let (nq, off) = (f.config_dim(), f.offset());
    let step = f.fd_step();
    let a: Vec<ScalarField> =
        (0..fa.a.len()).map(|v| lie_term(&fa.a, &ga.a, &ga.a[v], &fa.a[v], off, nq, step)).collect();
    let b = lie_term(&fa.a, &ga.a, &ga.b, &fa.b, off, nq, step);
    Observable::affine(a, b)
}

/// Pull-back along `zeta: T*Q -> V*Q`; the result ignores `p_0`.
pub fn pullback_zeta(f: &Observable) -> Result<Observable> {
    if f.space() != PhaseSpace::Vertical {
        return Err(Error::dims("pull-back of an observable that is not on V*Q"));
    }
    let (nq, np) = (f.config_dim(), f.momentum_dim());
    match f.kind() {
        ObservableKind::Affine(af) => {
            let mut a = Vec::with_capacity(nq);
            a.push(ScalarField::zero(nq));
            a.extend(af.a.iter().cloned());
            Ok(Observable::affine(a, af.b.clone())?.with_fd_step(f.fd_step()))
        }
        ObservableKind::General(GeneralObservable::Polynomial(p)) => {
            // x stays in place, y_k moves past the new p_0 slot.
            let map: Vec<usize> = (0..nq).chain((0..np).map(|k| nq + 1 + k)).collect();
            Observable::polynomial(nq, nq, p.embed(2 * nq, &map))
        }
        ObservableKind::General(GeneralObservable::Function { .. }) => {
            let inner = f.clone();
            let value = {
                let inner = inner.clone();
                Arc::new(move |x: &[f64], y: &[f64]| inner.value_raw(x, &y[1..]))
            };
            let gradient: Option<PhaseGradientFn> =
                (f.gradient_mode() == super::field::GradientMode::Analytic).then(|| {
                    let inner = inner.clone();
                    Arc::new(move |x: &[f64], y: &[f64]| {
                        let (gx, gy) = inner.gradient_raw(x, &y[1..]);
                        let mut dy = Vec::with_capacity(gy.len() + 1);
                        dy.push(0.0);
                        dy.extend(gy);
                        (gx, dy)
                    }) as PhaseGradientFn
                });
            let hessian = f.has_analytic_hessian().then(|| {
                let inner = inner.clone();
                Arc::new(move |x: &[f64], y: &[f64]| {
                    let h = inner.hessian_raw(x, &y[1..]);
                    let n = 2 * nq;
                    // Insert a zero row/column for p_0 at index nq.
                    let src = |i: usize| {
                        if i < nq {
                            Some(i)
                        } else if i == nq {
                            None
                        } else {
                            Some(i - 1)
                        }
                    };
                    DMatrix::from_fn(n, n, |i, j| match (src(i), src(j)) {
                        (Some(a), Some(b)) => h[(a, b)],
                        _ => 0.0,
                    })
                }) as super::observable::PhaseHessianFn
            });
            Ok(Observable::from_parts(
                nq,
                nq,
                ObservableKind::General(GeneralObservable::Function { value, gradient, hessian }),
                f.fd_step(),
            ))
        }
    }
}

/// Gradient of `{g, h}` over the flattened variables, from the two Hessians.
fn bracket_gradient(g: &Observable, h: &Observable, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    let off = g.offset();
    let nq = x.len();
    let (gx, gy) = g.gradient(x, y)?;
    let (hx, hy) = h.gradient(x, y)?;
    let hg = g.hessian(x, y)?;
    let hh = h.hessian(x, y)?;
    let n = nq + y.len();
    Ok((0..n)
        .map(|w| {
            (0..y.len())
                .map(|j| {
                    let (pj, qj) = (nq + j, j + off);
                    hg[(w, pj)] * hx[qj] + gy[j] * hh[(w, qj)] - hg[(w, qj)] * hy[j] - gx[qj] * hh[(w, pj)]
                })
                .sum()
        })
        .collect())
}

/// `{f, g}` as an observable in its own right. Its gradient is analytic when
/// both Hessians are.
pub fn bracket_observable(f: &Observable, g: &Observable) -> Result<Observable> {
    same_space(f, g)?;
    if let (ObservableKind::Affine(_), ObservableKind::Affine(_)) = (f.kind(), g.kind()) {
        if let Ok(b) = affine_bracket(f, g) {
            return Ok(b);
        }
    }
    let (nq, np) = (f.config_dim(), f.momentum_dim());
    let (f, g) = (f.clone(), g.clone());
    let value = {
        let (f, g) = (f.clone(), g.clone());
        Arc::new(move |x: &[f64], y: &[f64]| bracket_at(&f, &g, x, y).unwrap_or(f64::NAN))
    };
    let gradient: PhaseGradientFn = {
        let (f, g) = (f.clone(), g.clone());
        Arc::new(move |x: &[f64], y: &[f64]| {
            let full = bracket_gradient(&f, &g, x, y).unwrap_or_else(|_| vec![f64::NAN; x.len() + y.len()]);
            (full[..x.len()].to_vec(), full[x.len()..].to_vec())
        })
    };
    let kind = ObservableKind::General(GeneralObservable::Function { value, gradient: Some(gradient), hessian: None });
    Ok(Observable::from_parts(nq, np, kind, f.fd_step().max(g.fd_step())))
}

/// `|{f,{g,h}} + {g,{h,f}} + {h,{f,g}}|` at `z`.
pub fn jacobi_residual(f: &Observable, g: &Observable, h: &Observable, z: &PhasePoint) -> Result<f64> {
    same_space(f, g)?;
    same_space(g, h)?;
    let (x, y) = (&z.q, &z.p);
    let off = f.offset();
    let outer = |a: &Observable, b: &Observable, c: &Observable| -> Result<f64> {
        let (ax, ay) = a.gradient(x, y)?;
        let bc = bracket_gradient(b, c, x, y)?;
        let (bcx, bcy) = bc.split_at(x.len());
        Ok(pair(off, &ax, &ay, bcx, bcy))
    };
    Ok((outer(f, g, h)? + outer(g, h, f)? + outer(h, f, g)?).abs())
}
