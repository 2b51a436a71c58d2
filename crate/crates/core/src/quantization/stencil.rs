use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::grid::{Boundary, GridGeometry};
use crate::error::{Error, Result};
use crate::Complex64;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stencil {
    /// Second-order central differences.
    #[default]
    Central,
    /// Fourier differentiation; periodic grids only.
    Spectral,
}

impl Stencil {
    pub(crate) fn check(self, geometry: &GridGeometry) -> Result<()> {
        if self == Stencil::Spectral && geometry.boundary() != Boundary::Periodic {
            return Err(Error::GridMismatch("spectral stencils need a periodic grid".into()));
        }
        Ok(())
    }
}

/// Calls `f` with the flat indices of every grid line along `axis`.
fn for_each_line(g: &GridGeometry, axis: usize, mut f: impl FnMut(&[usize])) {
    let n = g.axes()[axis].n;
    let stride = g.stride(axis);
    let mut line = vec![0; n];
    for base in 0..g.len() {
        if !(base / stride).is_multiple_of(n) {
            continue;
        }
        for (j, l) in line.iter_mut().enumerate() {
            *l = base + j * stride;
        }
        f(&line);
    }
}

fn neighbour(g: &GridGeometry, v: &[Complex64], line: &[usize], j: usize, shift: isize) -> Complex64 {
    let n = line.len() as isize;
    let k = j as isize + shift;
    match g.boundary() {
        Boundary::Periodic => v[line[k.rem_euclid(n) as usize]],
        Boundary::DirichletZero if k < 0 || k >= n => Complex64::new(0.0, 0.0),
        Boundary::DirichletZero => v[line[k as usize]],
    }
}

/// `d/dx_axis` of grid values.
pub fn derivative(g: &GridGeometry, v: &[Complex64], axis: usize, stencil: Stencil) -> Result<Vec<Complex64>> {
    stencil.check(g)?;
    let mut out = vec![Complex64::new(0.0, 0.0); v.len()];
    let h = g.spacing(axis);
    match stencil {
        Stencil::Central => for_each_line(g, axis, |line| {
            for j in 0..line.len() {
                out[line[j]] = (neighbour(g, v, line, j, 1) - neighbour(g, v, line, j, -1)) / (2.0 * h);
            }
        }),
        Stencil::Spectral => {
            let n = g.axes()[axis].n;
            let mut planner = FftPlanner::<f64>::new();
            let fwd = planner.plan_fft_forward(n);
            let inv = planner.plan_fft_inverse(n);
            let len = n as f64 * h;
            let ik: Vec<Complex64> = (0..n)
                .map(|j| {
                    let m = if 2 * j < n {
                        j as f64
                    } else if 2 * j == n {
                        0.0
                    } else {
                        j as f64 - n as f64
                    };
                    Complex64::new(0.0, 2.0 * std::f64::consts::PI * m / len)
                })
                .collect();
            let mut buf = vec![Complex64::new(0.0, 0.0); n];
            for_each_line(g, axis, |line| {
                for (b, &k) in buf.iter_mut().zip(line) {
                    *b = v[k];
                }
                fwd.process(&mut buf);
                for (b, k) in buf.iter_mut().zip(&ik) {
                    *b *= k / n as f64;
                }
                inv.process(&mut buf);
                for (&k, b) in line.iter().zip(&buf) {
                    out[k] = *b;
                }
            });
        }
    }
    Ok(out)
}

/// Compact flux difference `(F_{j+1/2} - F_{j-1/2}) / h` with
/// `F_{j+1/2} = a_{j+1/2} (v_{j+1} - v_j) / h`. `a_up[k]` is the coefficient
/// half a cell above node `k` along `axis`; `a_edge[k]` is the one half a cell
/// below, read only at the first node of a Dirichlet line.
pub fn flux_second_derivative(
    g: &GridGeometry,
    v: &[Complex64],
    a_up: &[f64],
    a_edge: &[f64],
    axis: usize,
) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); v.len()];
    let h2 = g.spacing(axis).powi(2);
    let n = g.axes()[axis].n;
    for_each_line(g, axis, |line| {
        for j in 0..n {
            let a_down = match (j, g.boundary()) {
                (0, Boundary::Periodic) => a_up[line[n - 1]],
                (0, Boundary::DirichletZero) => a_edge[line[0]],
                (j, _) => a_up[line[j - 1]],
            };
            let c = v[line[j]];
            let up = (neighbour(g, v, line, j, 1) - c) * a_up[line[j]];
            let down = (c - neighbour(g, v, line, j, -1)) * a_down;
            out[line[j]] = (up - down) / h2;
        }
    });
    out
}

/// Central-difference Laplacian `sum_u (v_{j+1} - 2 v_j + v_{j-1}) / h_u^2`.
pub fn laplacian(g: &GridGeometry, v: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); v.len()];
    for axis in 0..g.dims() {
        let h2 = g.spacing(axis).powi(2);
        for_each_line(g, axis, |line| {
            for j in 0..line.len() {
                let c = v[line[j]];
                out[line[j]] += (neighbour(g, v, line, j, 1) - 2.0 * c + neighbour(g, v, line, j, -1)) / h2;
            }
        });
    }
    out
}
