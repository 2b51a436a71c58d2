//! Three-velocity (jet) coordinates and their relation to tangent vectors,
//! the velocity hyperboloid and the free-mass Legendre map.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::phase_space::{Chart, MetricField, Transition};

/// Default singularity guard, relative to the local coordinate scale.
pub const SINGULARITY_EPS: f64 = 1e-12;

/// A point `(q^0, q^k, v^k)` of the jet manifold, `v^k = dq^k/dq^0`.
#[derive(Clone, Debug, PartialEq)]
pub struct JetVelocity {
    pub q0: f64,
    pub q: Vec<f64>,
    pub v: Vec<f64>,
}

impl JetVelocity {
    pub fn new(q0: f64, q: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        if q.len() != v.len() {
            return Err(Error::dims(format!("jet velocity with |q| = {}, |v| = {}", q.len(), v.len())));
        }
        if !q0.is_finite() || q.iter().chain(&v).any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("jet velocity".into()));
        }
        Ok(JetVelocity { q0, q, v })
    }

    /// Three-velocity at the origin.
    pub fn at_origin(v: Vec<f64>) -> Self {
        JetVelocity { q0: 0.0, q: vec![0.0; v.len()], v }
    }

    pub fn position(&self) -> Vec<f64> {
        let mut x = Vec::with_capacity(self.q.len() + 1);
        x.push(self.q0);
        x.extend_from_slice(&self.q);
        x
    }

    pub fn speed_sq(&self) -> f64 {
        self.v.iter().map(|v| v * v).sum()
    }
}

/// A tangent vector `(q^u, qdot^u)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TangentVector {
    pub q: Vec<f64>,
    pub qdot: Vec<f64>,
}

impl TangentVector {
    pub fn new(q: Vec<f64>, qdot: Vec<f64>) -> Result<Self> {
        if q.is_empty() || q.len() != qdot.len() {
            return Err(Error::dims("tangent vector components"));
        }
        if q.iter().chain(&qdot).any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("tangent vector".into()));
        }
        Ok(TangentVector { q, qdot })
    }
}

/// Transforms three-velocities under the chart's transition:
/// `v~^k = (dq~^k/dq^0 + v^j dq~^k/dq^j) / (dq~^0/dq^0 + v^j dq~^0/dq^j)`.
pub fn jet_transition(v: &JetVelocity, chart: &Chart) -> Result<JetVelocity> {
    let t = chart.transition().ok_or_else(|| Error::dims("chart has no transition"))?;
    transform_jet(v, t, chart.epsilon())
}

pub(crate) fn transform_jet(v: &JetVelocity, t: &Transition, eps: f64) -> Result<JetVelocity> {
    let x = v.position();
    if t.dim() != x.len() {
        return Err(Error::dims(format!("transition of dim {} on a jet of dim {}", t.dim(), x.len())));
    }
    let j = t.jacobian(&x);
    let total = |row: usize| j[(row, 0)] + v.v.iter().enumerate().map(|(k, vk)| vk * j[(row, k + 1)]).sum::<f64>();
    let denom = total(0);
    let scale = j.row(0).amax().max(1.0);
    if denom.abs() <= eps * scale {
        return Err(Error::DenominatorVanishes { value: denom });
    }
    let xt = t.forward(&x);
    Ok(JetVelocity { q0: xt[0], q: xt[1..].to_vec(), v: (1..x.len()).map(|k| total(k) / denom).collect() })
}

/// Closed-form boost of three-velocities with rapidity `alpha` along axis 1.
pub fn lorentz_boost_velocity(v: &JetVelocity, alpha: f64) -> Result<JetVelocity> {
    if v.v.is_empty() {
        return Err(Error::dims("boost needs at least one spatial axis"));
    }
    let (ch, sh) = (alpha.cosh(), alpha.sinh());
    let denom = ch - v.v[0] * sh;
    if denom.abs() <= SINGULARITY_EPS * ch {
        return Err(Error::DenominatorVanishes { value: denom });
    }
    let mut vt: Vec<f64> = v.v.iter().map(|vk| vk / denom).collect();
    vt[0] = (-sh + v.v[0] * ch) / denom;
    let mut q = v.q.clone();
    q[0] = -v.q0 * sh + v.q[0] * ch;
    Ok(JetVelocity { q0: v.q0 * ch - v.q[0] * sh, q, v: vt })
}

/// `lambda`: the tangent vector `(qdot0, qdot0 v)` on the line of `v`.
pub fn lambda_lift(v: &JetVelocity, qdot0: f64) -> Result<TangentVector> {
    if !qdot0.is_finite() {
        return Err(Error::NonFinite("lift scale".into()));
    }
    let mut qdot = Vec::with_capacity(v.v.len() + 1);
    qdot.push(qdot0);
    qdot.extend(v.v.iter().map(|vk| qdot0 * vk));
    Ok(TangentVector { q: v.position(), qdot })
}

/// `rho`: `v^k = qdot^k / qdot^0`.
pub fn rho_project(w: &TangentVector) -> Result<JetVelocity> {
    let scale = w.qdot.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(f64::MIN_POSITIVE);
    let q0dot = w.qdot[0];
    if q0dot.abs() <= SINGULARITY_EPS * scale {
        return Err(Error::ChartSingularity { value: q0dot });
    }
    Ok(JetVelocity { q0: w.q[0], q: w.q[1..].to_vec(), v: w.qdot[1..].iter().map(|x| x / q0dot).collect() })
}

/// `g_{uv}(q) qdot^u qdot^v - 1`. Membership in the future sheet additionally needs `qdot^0 > 0`.
pub fn hyperboloid_residual(w: &TangentVector, g: &MetricField) -> Result<f64> {
    if g.dim() != w.q.len() {
        return Err(Error::dims("metric and tangent vector dimensions differ"));
    }
    let lower = g.lower_at(&w.q)?;
    let u = DVector::from_column_slice(&w.qdot);
    Ok((u.transpose() * lower * &u)[(0, 0)] - 1.0)
}

pub fn on_future_hyperboloid(w: &TangentVector, g: &MetricField, tol: f64) -> Result<bool> {
    Ok(w.qdot[0] > 0.0 && hyperboloid_residual(w, g)?.abs() <= tol)
}

/// The unit future-pointing tangent vector over a subluminal three-velocity
/// in Minkowski space.
pub fn four_velocity(v: &JetVelocity) -> Result<TangentVector> {
    let s = v.speed_sq();
    if s >= 1.0 {
        return Err(Error::SuperluminalInput { speed_sq: s });
    }
    lambda_lift(v, 1.0 / (1.0 - s).sqrt())
}

/// Boost of a tangent vector (position and velocity) with rapidity `alpha` along axis 1.
pub fn boost_tangent(w: &TangentVector, alpha: f64) -> TangentVector {
    let t = Transition::lorentz_boost(w.q.len(), alpha);
    let j = t.jacobian(&w.q);
    TangentVector { q: t.forward(&w.q), qdot: (j * DVector::from_column_slice(&w.qdot)).iter().copied().collect() }
}

/// Covector rule: `p~_u = p_v (L^-1)^v_u` for the boost `L` with rapidity `alpha`.
pub fn boost_covector(p: &[f64], alpha: f64) -> Vec<f64> {
    let (ch, sh) = (alpha.cosh(), alpha.sinh());
    let mut out = p.to_vec();
    out[0] = ch * p[0] + sh * p[1];
    out[1] = sh * p[0] + ch * p[1];
    out
}

/// Free-mass Legendre map: `p_i = m v^i / sqrt(1 - v^2)`, `p_0 = -m / sqrt(1 - v^2)`.
/// Returns the covector `(p_0, p_1, .., p_m)`.
pub fn legendre_free_mass(v: &JetVelocity, mass: f64) -> Result<Vec<f64>> {
    if !(mass > 0.0) {
        return Err(Error::config("mass", "must be positive"));
    }
    let s = v.speed_sq();
    if s >= 1.0 {
        return Err(Error::SuperluminalInput { speed_sq: s });
    }
    let gamma = 1.0 / (1.0 - s).sqrt();
    let mut p = Vec::with_capacity(v.v.len() + 1);
    p.push(-mass * gamma);
    p.extend(v.v.iter().map(|vk| mass * vk * gamma));
    Ok(p)
}

/// `p_0^2 - sum p_i^2 - m^2`
pub fn mass_shell_residual(p: &[f64], mass: f64) -> f64 {
    p[0] * p[0] - p[1..].iter().map(|x| x * x).sum::<f64>() - mass * mass
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_transition_leaves_velocity() {
        let chart = Chart::standard(3).unwrap().with_transition(Transition::identity(3)).unwrap();
        let v = JetVelocity::new(0.5, vec![1.0, 2.0], vec![0.3, -0.4]).unwrap();
        assert_eq!(jet_transition(&v, &chart).unwrap(), v);
    }

    #[test]
    fn boost_of_rest_frame() {
        let alpha = 0.8;
        let chart = Chart::standard(4).unwrap().with_transition(Transition::lorentz_boost(4, alpha)).unwrap();
        let v = JetVelocity::at_origin(vec![0.0; 3]);
        let vt = jet_transition(&v, &chart).unwrap();
        assert!((vt.v[0] + alpha.tanh()).abs() < 1e-15);
        assert_eq!(&vt.v[1..], &[0.0, 0.0]);
    }

    #[test]
    fn denominator_guard() {
        // v^1 = coth(alpha) makes ch - v sh vanish
        let alpha: f64 = 0.5;
        let v = JetVelocity::at_origin(vec![1.0 / alpha.tanh(), 0.0]);
        assert!(matches!(lorentz_boost_velocity(&v, alpha), Err(Error::DenominatorVanishes { .. })));
        let chart = Chart::standard(3).unwrap().with_transition(Transition::lorentz_boost(3, alpha)).unwrap();
        assert!(matches!(jet_transition(&v, &chart), Err(Error::DenominatorVanishes { .. })));
    }

    #[test]
    fn lift_and_project() {
        let v = JetVelocity::new(1.0, vec![2.0, 3.0], vec![0.1, 0.2]).unwrap();
        let w = lambda_lift(&v, 1.0).unwrap();
        assert_eq!(w.qdot, vec![1.0, 0.1, 0.2]);
        assert_eq!(rho_project(&lambda_lift(&v, -3.5).unwrap()).unwrap().v, v.v);
    }

    #[test]
    fn projection_singular_at_zero_time_rate() {
        let w = TangentVector::new(vec![0.0, 0.0], vec![0.0, 1.0]).unwrap();
        assert!(matches!(rho_project(&w), Err(Error::ChartSingularity { .. })));
    }

    #[test]
    fn hyperboloid_examples() {
        let eta = MetricField::minkowski(4);
        let rest = TangentVector::new(vec![0.0; 4], vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(hyperboloid_residual(&rest, &eta).unwrap(), 0.0);
        let a: f64 = 1.3;
        let moving = TangentVector::new(vec![0.0; 4], vec![a.cosh(), a.sinh(), 0.0, 0.0]).unwrap();
        assert!(hyperboloid_residual(&moving, &eta).unwrap().abs() < 1e-14);
    }

    #[test]
    fn legendre_at_rest_and_superluminal() {
        let p = legendre_free_mass(&JetVelocity::at_origin(vec![0.0; 3]), 2.0).unwrap();
        assert_eq!(p, vec![-2.0, 0.0, 0.0, 0.0]);
        assert!(matches!(
            legendre_free_mass(&JetVelocity::at_origin(vec![0.8, 0.7]), 1.0),
            Err(Error::SuperluminalInput { .. })
        ));
    }
}
