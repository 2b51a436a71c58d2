use crate::error::{Error, Result};
use crate::Complex64;

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Outcome of an iterative solve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveStats {
    pub iterations: usize,
    pub relative_residual: f64,
}

/// BiCGSTAB for `A x = b` with `A` given as a matrix-free product. Starts from
/// `x` and stops when `||b - A x|| <= tol ||b||`.
pub fn bicgstab<A>(apply: A, b: &[Complex64], x: &mut [Complex64], tol: f64, max_iter: usize) -> Result<SolveStats>
where
    A: Fn(&[Complex64]) -> Result<Vec<Complex64>>,
{
    let bnorm = norm(b);
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        return Ok(SolveStats { iterations: 0, relative_residual: 0.0 });
    }
    let ax = apply(x)?;
    let mut r: Vec<Complex64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
    let mut rel = norm(&r) / bnorm;
    if rel <= tol {
        return Ok(SolveStats { iterations: 0, relative_residual: rel });
    }
    let shadow = r.clone();
    let zero = Complex64::new(0.0, 0.0);
    let (mut rho, mut alpha, mut omega) =
        (Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0));
    let mut v = vec![zero; b.len()];
    let mut p = vec![zero; b.len()];
    for it in 1..=max_iter {
        let rho_next = dot(&shadow, &r);
        if rho_next.norm() == 0.0 {
            break;
        }
        let beta = (rho_next / rho) * (alpha / omega);
        rho = rho_next;
        for i in 0..p.len() {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        v = apply(&p)?;
        alpha = rho / dot(&shadow, &v);
        let s: Vec<Complex64> = r.iter().zip(&v).map(|(r, v)| r - alpha * v).collect();
        if norm(&s) / bnorm <= tol {
            for i in 0..x.len() {
                x[i] += alpha * p[i];
            }
            return Ok(SolveStats { iterations: it, relative_residual: norm(&s) / bnorm });
        }
        let t = apply(&s)?;
        let tt = dot(&t, &t);
        omega = if tt.norm() == 0.0 { zero } else { dot(&t, &s) / tt };
        for i in 0..x.len() {
            x[i] += alpha * p[i] + omega * s[i];
            r[i] = s[i] - omega * t[i];
        }
        rel = norm(&r) / bnorm;
        if !rel.is_finite() {
            break;
        }
        if rel <= tol {
            return Ok(SolveStats { iterations: it, relative_residual: rel });
        }
        if omega.norm() == 0.0 {
            break;
        }
    }
    Err(Error::LinearSolveDiverged { iterations: max_iter, residual: rel, tolerance: tol })
}
