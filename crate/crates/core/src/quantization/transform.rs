use super::grid::{Boundary, Grid, GridGeometry, GridKind};
use crate::error::{Error, Result};
use crate::phase_space::Transition;
use crate::Complex64;

/// Cubic Lagrange interpolation of grid values at an arbitrary point.
pub fn interpolate(rho: &Grid, x: &[f64]) -> Complex64 {
    let g = &rho.geometry;
    let d = g.dims();
    let mut nodes: Vec<[(isize, f64); 4]> = Vec::with_capacity(d);
    for (axis, &xi) in x.iter().enumerate() {
        let h = g.spacing(axis);
        let s = (xi - g.coordinate(axis, 0)) / h;
        let base = s.floor();
        let t = s - base;
        let w = [
            -t * (t - 1.0) * (t - 2.0) / 6.0,
            (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0,
            -(t + 1.0) * t * (t - 2.0) / 2.0,
            (t + 1.0) * t * (t - 1.0) / 6.0,
        ];
        let b = base as isize;
        nodes.push([(b - 1, w[0]), (b, w[1]), (b + 1, w[2]), (b + 2, w[3])]);
    }
    let mut total = Complex64::new(0.0, 0.0);
    for combo in 0..4usize.pow(d as u32) {
        let mut flat = 0usize;
        let mut weight = 1.0;
        let mut inside = true;
        let mut c = combo;
        for (axis, choices) in nodes.iter().enumerate() {
            let (j, w) = choices[c % 4];
            c /= 4;
            let n = g.axes()[axis].n as isize;
            let j = match g.boundary() {
                Boundary::Periodic => j.rem_euclid(n),
                Boundary::DirichletZero if j < 0 || j >= n => {
                    inside = false;
                    break;
                }
                Boundary::DirichletZero => j,
            };
            flat += j as usize * g.stride(axis);
            weight *= w;
        }
        if inside {
            total += rho.values[flat] * weight;
        }
    }
    total
}

/// Half-density in the new chart: `rho'(y) = |det dy/dq|^(-1/2) rho(q(y))` on `target`.
pub fn half_density_transform(rho: &Grid, transition: &Transition, target: &GridGeometry) -> Result<Grid> {
    if rho.kind != GridKind::HalfDensity {
        return Err(Error::GridMismatch("half-density transform of a phase-space section".into()));
    }
    let d = rho.dims();
    if transition.dim() != d || target.dims() != d {
        return Err(Error::GridMismatch("transition, source and target dimensions differ".into()));
    }
    let mut guess: Option<Vec<f64>> = None;
    let mut values = Vec::with_capacity(target.len());
    for y in target.points() {
        let q = match guess.as_deref().map(|g| transition.inverse(&y, g)) {
            Some(Ok(q)) => q,
            _ => transition.inverse(&y, &y)?,
        };
        let det = transition.jacobian_det(&q);
        if !(det.abs() > 1e-12) {
            return Err(Error::NonInvertibleJacobian(q));
        }
        values.push(interpolate(rho, &q) / det.abs().sqrt());
        guess = Some(q);
    }
    Grid::new(target.clone(), GridKind::HalfDensity, values)
}
