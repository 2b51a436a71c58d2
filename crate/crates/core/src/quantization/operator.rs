use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::Serialize;

use super::grid::{Boundary, Grid, GridGeometry, GridKind};
use super::stencil::{derivative, flux_second_derivative, Stencil};
use crate::error::{Error, Result};
use crate::phase_space::{Observable, PhaseSpace, ScalarField, DEFAULT_FD_STEP};
use crate::poly::Polynomial;
use crate::Complex64;

pub type MatrixFieldFn = Arc<dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync>;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// How an operator was built.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum OperatorDescriptor {
    /// `-i a^u d_u - (i/2) d_u a^u + b` on half-densities.
    Schrodinger { observable: String, metaplectic_correction: bool },
    /// `-d_u (a^{uv} d_v) + (b^u p_u + c)^`; only meaningful in the chart it was written in.
    Quadratic { chart_local: bool },
    /// `-i u_f + (f - p d_p f)` on phase-space sections.
    Prequantum { observable: String, space: String },
}

#[derive(Clone)]
enum Kernel {
    Affine { a: Vec<ScalarField>, offset: usize, b: ScalarField, correction: bool },
    Quadratic { a: MatrixFieldFn, b: Vec<ScalarField>, c: ScalarField },
    Prequantum { f: Observable },
}

/// A linear operator on complex grids.
#[derive(Clone)]
pub struct QuantumOperator {
    descriptor: OperatorDescriptor,
    stencil: Stencil,
    kernel: Kernel,
}

impl fmt::Debug for QuantumOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("QuantumOperator").field("descriptor", &self.descriptor).field("stencil", &self.stencil).finish()
    }
}

fn describe(f: &Observable) -> String {
    match f.to_polynomial() {
        Some(p) => format!("{p:?}"),
        None => "closure".into(),
    }
}

/// Rewrites a polynomial observable of degree at most one in the momenta as an
/// affine observable.
pub fn to_affine(f: &Observable) -> Result<Observable> {
    if f.as_affine().is_some() {
        return Ok(f.clone());
    }
    let (a, b) = affine_parts(f)?;
    Observable::affine(a, b)
}

fn affine_parts(f: &Observable) -> Result<(Vec<ScalarField>, ScalarField)> {
    if let Some(af) = f.as_affine() {
        return Ok((af.a.clone(), af.b.clone()));
    }
    let poly = f.to_polynomial().ok_or(Error::QuadraticRequired)?;
    let (nq, np) = (f.config_dim(), f.momentum_dim());
    let mut b = Polynomial::zero(nq);
    let mut a = vec![Polynomial::zero(nq); np];
    for (e, c) in poly.terms() {
        let pdeg: u32 = e[nq..].iter().sum();
        let qe = e[..nq].to_vec();
        match pdeg {
            0 => b.add_term(qe, c),
            1 => {
                let j = e[nq..].iter().position(|&k| k == 1).expect("degree one");
                a[j].add_term(qe, c);
            }
            _ => return Err(Error::QuadraticRequired),
        }
    }
    Ok((a.into_iter().map(ScalarField::Polynomial).collect(), ScalarField::Polynomial(b)))
}

/// Schrödinger-representation operator of an affine observable
/// `f = a^u(q) p_u + b(q)` with the metaplectic correction. Observables on
/// `V*Q` act with `a^0 = 0` along the time axis.
pub fn schrodinger_operator(f: &Observable) -> Result<QuantumOperator> {
    build_affine(f, true)
}

/// The same operator without the `-(i/2) d_u a^u` term. Not symmetric in general.
pub fn schrodinger_operator_uncorrected(f: &Observable) -> Result<QuantumOperator> {
    build_affine(f, false)
}

fn build_affine(f: &Observable, correction: bool) -> Result<QuantumOperator> {
    let (a, b) = affine_parts(f)?;
    let offset = f.config_dim() - f.momentum_dim();
    Ok(QuantumOperator {
        descriptor: OperatorDescriptor::Schrodinger { observable: describe(f), metaplectic_correction: correction },
        stencil: Stencil::Central,
        kernel: Kernel::Affine { a, offset, b, correction },
    })
}

/// `-d_u (a^{uv} d_v rho)` plus the Schrödinger operator of `b^u p_u + c`.
pub fn quadratic_operator<A>(a: A, b: Vec<ScalarField>, c: ScalarField) -> Result<QuantumOperator>
where
    A: Fn(&[f64]) -> DMatrix<f64> + Send + Sync + 'static,
{
    let n = c.nvars();
    if b.len() != n || b.iter().any(|f| f.nvars() != n) {
        return Err(Error::dims(format!("quadratic operator over {n} coordinates needs {n} linear coefficients")));
    }
    Ok(QuantumOperator {
        descriptor: OperatorDescriptor::Quadratic { chart_local: true },
        stencil: Stencil::Central,
        kernel: Kernel::Quadratic { a: Arc::new(a), b, c },
    })
}

/// Prequantum operator on sections over the `(q, p)` box. Works on `T*Q`, and
/// on `V*Q` where it is the operator of the vertical Poisson structure.
pub fn prequantum_operator(f: &Observable) -> Result<QuantumOperator> {
    if f.config_dim() > 2 {
        return Err(Error::dims("prequantum grids are limited to two configuration dimensions"));
    }
    let space = match f.space() {
        PhaseSpace::Cotangent => "cotangent",
        PhaseSpace::Vertical => "vertical",
    };
    Ok(QuantumOperator {
        descriptor: OperatorDescriptor::Prequantum { observable: describe(f), space: space.into() },
        stencil: Stencil::Central,
        kernel: Kernel::Prequantum { f: f.clone() },
    })
}

/// Prequantum operator of an observable on `V*Q`.
pub fn prequantum_operator_v(f: &Observable) -> Result<QuantumOperator> {
    if f.space() != PhaseSpace::Vertical {
        return Err(Error::dims("expected an observable on the vertical cotangent bundle"));
    }
    prequantum_operator(f)
}

/// Coefficients of an operator sampled on one grid.
#[derive(Clone, Debug)]
pub struct PreparedOperator {
    geometry: GridGeometry,
    kind: GridKind,
    stencil: Stencil,
    /// `(axis, coefficient)` pairs of first-order terms `coef * d_axis`.
    first_order: Vec<(usize, Vec<Complex64>)>,
    /// Diagonal second-order flux terms.
    flux: Vec<(usize, Vec<f64>, Vec<f64>)>,
    /// `(u, v, a^{uv})` terms applied as `d_u (a^{uv} d_v)`.
    nested: Vec<(usize, usize, Vec<f64>)>,
    potential: Vec<Complex64>,
}

impl PreparedOperator {
    pub fn geometry(&self) -> &GridGeometry {
        &self.geometry
    }

    pub fn apply_values(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        if v.len() != self.geometry.len() {
            return Err(Error::GridMismatch(format!("{} values for {} nodes", v.len(), self.geometry.len())));
        }
        let mut out: Vec<Complex64> = v.iter().zip(&self.potential).map(|(x, p)| x * p).collect();
        for (axis, coef) in &self.first_order {
            let d = derivative(&self.geometry, v, *axis, self.stencil)?;
            for ((o, c), d) in out.iter_mut().zip(coef).zip(d) {
                *o += c * d;
            }
        }
        for (axis, up, edge) in &self.flux {
            for (o, d) in out.iter_mut().zip(flux_second_derivative(&self.geometry, v, up, edge, *axis)) {
                *o -= d;
            }
        }
        for (u, w, coef) in &self.nested {
            let inner: Vec<Complex64> =
                derivative(&self.geometry, v, *w, self.stencil)?.iter().zip(coef).map(|(d, c)| d * c).collect();
            for (o, d) in out.iter_mut().zip(derivative(&self.geometry, &inner, *u, self.stencil)?) {
                *o -= d;
            }
        }
        Ok(out)
    }

    pub fn apply(&self, g: &Grid) -> Result<Grid> {
        self.geometry.check_same(&g.geometry)?;
        if g.kind != self.kind {
            return Err(Error::GridMismatch("operator prepared for a different grid kind".into()));
        }
        Ok(g.with_values(self.apply_values(&g.values)?))
    }
}

impl QuantumOperator {
    pub fn descriptor(&self) -> &OperatorDescriptor {
        &self.descriptor
    }

    pub fn stencil(&self) -> Stencil {
        self.stencil
    }

    pub fn with_stencil(mut self, stencil: Stencil) -> Self {
        self.stencil = stencil;
        self
    }

    pub fn grid_kind(&self) -> GridKind {
        match &self.kernel {
            Kernel::Prequantum { f } => {
                GridKind::PhaseSection { config_dim: f.config_dim(), momentum_dim: f.momentum_dim() }
            }
            _ => GridKind::HalfDensity,
        }
    }

    pub fn prepare(&self, geometry: &GridGeometry) -> Result<PreparedOperator> {
        self.stencil.check(geometry)?;
        let kind = self.grid_kind();
        let d = geometry.dims();
        let npts = geometry.len();
        let points: Vec<Vec<f64>> = geometry.points().collect();
        let mut prepared = PreparedOperator {
            geometry: geometry.clone(),
            kind,
            stencil: self.stencil,
            first_order: Vec::new(),
            flux: Vec::new(),
            nested: Vec::new(),
            potential: vec![Complex64::new(0.0, 0.0); npts],
        };
        match &self.kernel {
            Kernel::Affine { a, offset, b, correction } => {
                if b.nvars() != d {
                    return Err(Error::GridMismatch(format!(
                        "observable over {} coordinates on a {d}-axis grid",
                        b.nvars()
                    )));
                }
                add_affine(&mut prepared, &points, a, *offset, b, *correction);
            }
            Kernel::Quadratic { a, b, c } => {
                if c.nvars() != d {
                    return Err(Error::GridMismatch(format!(
                        "operator over {} coordinates on a {d}-axis grid",
                        c.nvars()
                    )));
                }
                for x in &points {
                    let m = a(x);
                    if m.nrows() != d || m.ncols() != d {
                        return Err(Error::dims(format!("coefficient matrix must be {d}x{d}")));
                    }
                    let defect = (&m - m.transpose()).amax();
                    if defect > 1e-12 * m.amax().max(1.0) {
                        return Err(Error::AsymmetricCoefficients { at: x.clone(), defect });
                    }
                }
                for u in 0..d {
                    for v in 0..d {
                        if u == v && self.stencil == Stencil::Central {
                            let h = geometry.spacing(u);
                            let shifted = |s: f64| -> Vec<f64> {
                                points
                                    .iter()
                                    .map(|x| {
                                        let mut y = x.clone();
                                        y[u] += s * h;
                                        a(&y)[(u, u)]
                                    })
                                    .collect()
                            };
                            let up = shifted(0.5);
                            let edge = match geometry.boundary() {
                                Boundary::DirichletZero => shifted(-0.5),
                                Boundary::Periodic => vec![0.0; npts],
                            };
                            if up.iter().any(|&x| x != 0.0) || edge.iter().any(|&x| x != 0.0) {
                                prepared.flux.push((u, up, edge));
                            }
                        } else {
                            let coef: Vec<f64> = points.iter().map(|x| a(x)[(u, v)]).collect();
                            if coef.iter().any(|&x| x != 0.0) {
                                prepared.nested.push((u, v, coef));
                            }
                        }
                    }
                }
                add_affine(&mut prepared, &points, b, 0, c, true);
            }
            Kernel::Prequantum { f } => {
                let (nq, np) = (f.config_dim(), f.momentum_dim());
                if d != nq + np {
                    return Err(Error::GridMismatch(format!(
                        "observable over {} phase variables on a {d}-axis grid",
                        nq + np
                    )));
                }
                let off = nq - np;
                let mut dq = vec![vec![Complex64::new(0.0, 0.0); npts]; np];
                let mut dp = vec![vec![Complex64::new(0.0, 0.0); npts]; np];
                for (k, z) in points.iter().enumerate() {
                    let (x, y) = z.split_at(nq);
                    let (gq, gp) = f.gradient(x, y)?;
                    let value = f.value(x, y)?;
                    for j in 0..np {
                        dq[j][k] = -I * gp[j];
                        dp[j][k] = I * gq[j + off];
                    }
                    let liouville: f64 = (0..np).map(|j| y[j] * gp[j]).sum();
                    prepared.potential[k] = Complex64::new(value - liouville, 0.0);
                }
                for (j, (cq, cp)) in dq.into_iter().zip(dp).enumerate() {
                    prepared.first_order.push((j + off, cq));
                    prepared.first_order.push((nq + j, cp));
                }
            }
        }
        Ok(prepared)
    }

    pub fn apply(&self, g: &Grid) -> Result<Grid> {
        self.prepare(&g.geometry)?.apply(g)
    }
}

fn add_affine(
    prepared: &mut PreparedOperator,
    points: &[Vec<f64>],
    a: &[ScalarField],
    offset: usize,
    b: &ScalarField,
    correction: bool,
) {
    for (j, aj) in a.iter().enumerate() {
        if aj.is_zero() {
            continue;
        }
        let coef = points.iter().map(|x| -I * aj.value(x)).collect();
        prepared.first_order.push((j + offset, coef));
    }
    for (k, x) in points.iter().enumerate() {
        let mut pot = Complex64::new(b.value(x), 0.0);
        if correction {
            let div: f64 = a
                .iter()
                .enumerate()
                .filter(|(_, aj)| !aj.is_zero())
                .map(|(j, aj)| aj.gradient(x, DEFAULT_FD_STEP)[j + offset])
                .sum();
            pot -= 0.5 * I * div;
        }
        prepared.potential[k] += pot;
    }
}
