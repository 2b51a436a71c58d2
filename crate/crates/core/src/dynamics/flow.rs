use nalgebra::{DMatrix, DVector};

use super::system::HamiltonianSystem;
use crate::error::{Error, Result};
use crate::phase_space::{MetricField, Observable, PhasePoint, VerticalPhasePoint};

/// Components `(dt, dq^k, dp_k)` of a vector field on the vertical cotangent bundle.
#[derive(Clone, Debug, PartialEq)]
pub struct VerticalTangent {
    pub dt: f64,
    pub dq: Vec<f64>,
    pub dp: Vec<f64>,
}

/// Components `(dq^u, dp_u)` of a vector field on the cotangent bundle.
#[derive(Clone, Debug, PartialEq)]
pub struct CotangentTangent {
    pub dq: Vec<f64>,
    pub dp: Vec<f64>,
}

fn finite(v: &[f64], what: &str) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what.into()))
    }
}

fn relativistic_parts(sys: &HamiltonianSystem) -> Result<(&Observable, &MetricField)> {
    match sys {
        HamiltonianSystem::Relativistic { hamiltonian, metric } => Ok((hamiltonian, metric)),
        _ => Err(Error::dims("expected a relativistic system")),
    }
}

fn nonrel_hamiltonian(sys: &HamiltonianSystem) -> Result<&Observable> {
    match sys {
        HamiltonianSystem::NonRelativistic { hamiltonian } => Ok(hamiltonian),
        _ => Err(Error::dims("expected a non-relativistic system")),
    }
}

/// The Hamiltonian connection: `dt = 1`, `dq^k = dH/dp_k`, `dp_k = -dH/dq^k`.
pub fn nonrel_vector_field(sys: &HamiltonianSystem, s: &VerticalPhasePoint) -> Result<VerticalTangent> {
    let h = nonrel_hamiltonian(sys)?;
    let (gq, gp) = h.gradient(&s.config(), &s.p)?;
    let dp: Vec<f64> = gq[1..].iter().map(|x| -x).collect();
    finite(&gp, "Hamiltonian gradient")?;
    finite(&dp, "Hamiltonian gradient")?;
    Ok(VerticalTangent { dt: 1.0, dq: gp, dp })
}

/// `dq^u = dH/dp_u`, `dp_u = -dH/dq^u`.
pub fn rel_vector_field(sys: &HamiltonianSystem, z: &PhasePoint) -> Result<CotangentTangent> {
    let (h, _) = relativistic_parts(sys)?;
    let (gq, gp) = h.gradient(&z.q, &z.p)?;
    finite(&gq, "Hamiltonian gradient")?;
    finite(&gp, "Hamiltonian gradient")?;
    Ok(CotangentTangent { dq: gp, dp: gq.iter().map(|x| -x).collect() })
}

/// Flow of `p_0 + H` on the cotangent bundle, or of the relativistic `H`.
pub(crate) fn lifted_rhs(sys: &HamiltonianSystem, z: &[f64]) -> Result<Vec<f64>> {
    let n = z.len() / 2;
    let (q, p) = z.split_at(n);
    let h = sys.hamiltonian();
    let mut out = vec![0.0; 2 * n];
    match sys {
        HamiltonianSystem::NonRelativistic { .. } => {
            let (gq, gp) = h.gradient(q, &p[1..])?;
            out[0] = 1.0;
            out[1..n].copy_from_slice(&gp);
            for u in 0..n {
                out[n + u] = -gq[u];
            }
        }
        HamiltonianSystem::Relativistic { .. } => {
            let (gq, gp) = h.gradient(q, p)?;
            out[..n].copy_from_slice(&gp);
            for u in 0..n {
                out[n + u] = -gq[u];
            }
        }
    }
    Ok(out)
}

/// `p_0 + H(t, q^k, p_k)`.
pub fn constraint_residual_nonrel(z: &PhasePoint, sys: &HamiltonianSystem) -> Result<f64> {
    let h = nonrel_hamiltonian(sys)?;
    Ok(z.p[0] + h.value(&z.q, &z.p[1..])?)
}

/// `g_{uv} dH/dp_u dH/dp_v - 1`.
pub fn constraint_residual_rel(z: &PhasePoint, sys: &HamiltonianSystem) -> Result<f64> {
    let (h, g) = relativistic_parts(sys)?;
    let (_, gp) = h.gradient(&z.q, &z.p)?;
    let lower = g.lower_at(&z.q)?;
    let v = DVector::from_column_slice(&gp);
    Ok((v.transpose() * lower * &v)[(0, 0)] - 1.0)
}

pub fn constraint_residual(z: &PhasePoint, sys: &HamiltonianSystem) -> Result<f64> {
    if sys.is_relativistic() {
        constraint_residual_rel(z, sys)
    } else {
        constraint_residual_nonrel(z, sys)
    }
}

/// Gradient of the constraint function `g_{uv} dH/dp_u dH/dp_v` in `(q, p)`.
fn shell_gradient(h: &Observable, g: &MetricField, z: &PhasePoint) -> Result<(DVector<f64>, DVector<f64>)> {
    let n = z.dim();
    let (_, gp) = h.gradient(&z.q, &z.p)?;
    let v = DVector::from_column_slice(&gp);
    let hess = h.hessian(&z.q, &z.p)?;
    let lower = g.lower_at(&z.q)?;
    let gv = &lower * &v;
    // d_a g_{uv} = -g_{us} (d_a g^{st}) g_{tv}
    let dlower: Vec<DMatrix<f64>> = g.inverse_derivative(&z.q).iter().map(|d| -(&lower * d * &lower)).collect();
    let mut dq = DVector::zeros(n);
    let mut dp = DVector::zeros(n);
    for a in 0..n {
        let mut sq = 0.0;
        let mut sp = 0.0;
        for u in 0..n {
            sq += 2.0 * hess[(a, n + u)] * gv[u];
            sp += 2.0 * hess[(n + a, n + u)] * gv[u];
        }
        sq += (v.transpose() * &dlower[a] * &v)[(0, 0)];
        dq[a] = sq;
        dp[a] = sp;
    }
    Ok((dq, dp))
}

/// `{H, g_{uv} dH/dp_u dH/dp_v}` on the cotangent bundle.
pub fn rq10_residual(sys: &HamiltonianSystem, z: &PhasePoint) -> Result<f64> {
    let (h, g) = relativistic_parts(sys)?;
    let (hq, hp) = h.gradient(&z.q, &z.p)?;
    let (fq, fp) = shell_gradient(h, g, z)?;
    Ok((0..z.dim()).map(|j| hp[j] * fq[j] - hq[j] * fp[j]).sum())
}

/// Contraction of `dp_k ^ dq^k - dH ^ dt` with a vector field, as components
/// `(dt, dq^1.., dp_1..)`.
pub fn contract_two_form(sys: &HamiltonianSystem, s: &VerticalPhasePoint, field: &VerticalTangent) -> Result<Vec<f64>> {
    let h = nonrel_hamiltonian(sys)?;
    let m = s.q.len();
    if field.dq.len() != m || field.dp.len() != m {
        return Err(Error::dims("vector field does not match the state"));
    }
    let (gq, gp) = h.gradient(&s.config(), &s.p)?;
    let dh_along: f64 = field.dt * gq[0] + (0..m).map(|k| field.dq[k] * gq[k + 1] + field.dp[k] * gp[k]).sum::<f64>();
    let mut out = Vec::with_capacity(2 * m + 1);
    out.push(gq[0] * field.dt - dh_along);
    out.extend((0..m).map(|k| field.dp[k] + field.dt * gq[k + 1]));
    out.extend((0..m).map(|k| -field.dq[k] + field.dt * gp[k]));
    Ok(out)
}

/// The contraction of the Hamiltonian two-form with the Hamiltonian connection.
pub fn contraction_residual_nonrel(sys: &HamiltonianSystem, s: &VerticalPhasePoint) -> Result<Vec<f64>> {
    let field = nonrel_vector_field(sys, s)?;
    contract_two_form(sys, s, &field)
}

/// One Newton step along `grad_p` of the shell function toward the zero residual.
pub(crate) fn project_on_shell(sys: &HamiltonianSystem, z: &mut PhasePoint) -> Result<()> {
    match sys {
        HamiltonianSystem::NonRelativistic { .. } => {
            z.p[0] -= constraint_residual_nonrel(z, sys)?;
        }
        HamiltonianSystem::Relativistic { hamiltonian, metric } => {
            for _ in 0..3 {
                let r = constraint_residual_rel(z, sys)?;
                let (_, dp) = shell_gradient(hamiltonian, metric, z)?;
                let n2 = dp.norm_squared();
                if n2 == 0.0 || r.abs() < 1e-15 {
                    break;
                }
                for (p, d) in z.p.iter_mut().zip(dp.iter()) {
                    *p -= r * d / n2;
                }
            }
        }
    }
    Ok(())
}
