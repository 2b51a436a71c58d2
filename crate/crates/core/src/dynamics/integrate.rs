use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use super::flow::{constraint_residual, lifted_rhs, project_on_shell};
use super::system::HamiltonianSystem;
use crate::error::{Error, Result};
use crate::phase_space::{PhasePoint, VerticalPhasePoint};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Method {
    ExplicitRK4,
    ImplicitMidpoint,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IntegratorConfig {
    pub method: Method,
    pub step: f64,
    pub implicit_tol: f64,
    pub implicit_max_iter: usize,
    pub record_every: usize,
    /// Largest admissible `|constraint residual|` of a relativistic initial state.
    pub admission_tol: f64,
    /// Pull the momenta back onto the constraint surface after every step.
    pub project: bool,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            method: Method::ImplicitMidpoint,
            step: 1e-3,
            implicit_tol: 1e-14,
            implicit_max_iter: 100,
            record_every: 1,
            admission_tol: 1e-9,
            project: false,
        }
    }
}

impl IntegratorConfig {
    pub fn rk4(step: f64) -> Self {
        IntegratorConfig { method: Method::ExplicitRK4, step, ..Default::default() }
    }

    pub fn implicit_midpoint(step: f64) -> Self {
        IntegratorConfig { method: Method::ImplicitMidpoint, step, ..Default::default() }
    }

    pub fn with_record_every(mut self, n: usize) -> Self {
        self.record_every = n;
        self
    }

    pub fn with_projection(mut self, on: bool) -> Self {
        self.project = on;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::config("integrator.step", "must be positive"));
        }
        if !(self.implicit_tol > 0.0) {
            return Err(Error::config("integrator.implicit_tol", "must be positive"));
        }
        if self.record_every == 0 {
            return Err(Error::config("integrator.record_every", "must be at least 1"));
        }
        if self.implicit_max_iter == 0 {
            return Err(Error::config("integrator.implicit_max_iter", "must be at least 1"));
        }
        Ok(())
    }
}

/// Sampled solution of the constrained Hamilton equations.
#[derive(Clone, Debug, Serialize)]
pub struct TrajectoryRecord {
    pub parameter: Vec<f64>,
    pub states: Vec<PhasePoint>,
    pub constraint_residuals: Vec<f64>,
    pub conserved: BTreeMap<String, Vec<f64>>,
}

impl TrajectoryRecord {
    pub fn len(&self) -> usize {
        self.parameter.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parameter.is_empty()
    }

    pub fn last(&self) -> Option<&PhasePoint> {
        self.states.last()
    }

    /// Projections of the states onto the vertical cotangent bundle.
    pub fn vertical_states(&self) -> Vec<VerticalPhasePoint> {
        self.states.iter().map(PhasePoint::zeta).collect()
    }

    pub fn max_abs_residual(&self) -> f64 {
        self.constraint_residuals.iter().fold(0.0, |m, r| m.max(r.abs()))
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let n = self.states.first().map_or(0, PhasePoint::dim);
        let mut header = vec!["s".to_string()];
        header.extend((0..n).map(|u| format!("q{u}")));
        header.extend((0..n).map(|u| format!("p{u}")));
        header.push("residual".into());
        header.extend(self.conserved.keys().cloned());
        out.write_record(&header)?;
        for (i, z) in self.states.iter().enumerate() {
            let mut row = vec![self.parameter[i]];
            row.extend(&z.q);
            row.extend(&z.p);
            row.push(self.constraint_residuals[i]);
            row.extend(self.conserved.values().map(|s| s[i]));
            out.write_record(row.iter().map(|x| format!("{x:e}")))?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }

    pub fn save_json(&self, path: &Path) -> Result<()> {
        serde_json::to_writer_pretty(std::fs::File::create(path)?, self)?;
        Ok(())
    }

    fn push(&mut self, sys: &HamiltonianSystem, s: f64, z: &[f64]) -> Result<()> {
        let point = PhasePoint::from_flat(z);
        self.constraint_residuals.push(constraint_residual(&point, sys)?);
        let h = match sys {
            HamiltonianSystem::NonRelativistic { hamiltonian } => hamiltonian.value(&point.q, &point.p[1..])?,
            HamiltonianSystem::Relativistic { hamiltonian, .. } => hamiltonian.value(&point.q, &point.p)?,
        };
        self.conserved.entry("hamiltonian".into()).or_default().push(h);
        self.parameter.push(s);
        self.states.push(point);
        Ok(())
    }
}

fn rk4_step(sys: &HamiltonianSystem, z: &[f64], h: f64) -> Result<Vec<f64>> {
    let shift = |a: &[f64], k: &[f64], c: f64| -> Vec<f64> { a.iter().zip(k).map(|(a, k)| a + c * k).collect() };
    let k1 = lifted_rhs(sys, z)?;
    let k2 = lifted_rhs(sys, &shift(z, &k1, h / 2.0))?;
    let k3 = lifted_rhs(sys, &shift(z, &k2, h / 2.0))?;
    let k4 = lifted_rhs(sys, &shift(z, &k3, h))?;
    Ok((0..z.len()).map(|i| z[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])).collect())
}

fn midpoint_step(sys: &HamiltonianSystem, z: &[f64], h: f64, cfg: &IntegratorConfig) -> Result<Vec<f64>> {
    let scale = z.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    let mut next = rk4_step(sys, z, h)?;
    let mut update = f64::INFINITY;
    for _ in 0..cfg.implicit_max_iter {
        let mid: Vec<f64> = z.iter().zip(&next).map(|(a, b)| 0.5 * (a + b)).collect();
        let f = lifted_rhs(sys, &mid)?;
        let cand: Vec<f64> = z.iter().zip(&f).map(|(a, f)| a + h * f).collect();
        update = cand.iter().zip(&next).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        next = cand;
        if update <= cfg.implicit_tol * scale {
            return Ok(next);
        }
    }
    Err(Error::ImplicitSolveDiverged { iterations: cfg.implicit_max_iter, update })
}

/// Integrates the flow for `duration` in the flow parameter. Non-relativistic
/// systems are integrated through the lifted flow of `p_0 + H` on the
/// cotangent bundle, so `p_0` tracks the energy.
pub fn integrate(
    sys: &HamiltonianSystem,
    z0: &PhasePoint,
    cfg: &IntegratorConfig,
    duration: f64,
) -> Result<TrajectoryRecord> {
    cfg.validate()?;
    if z0.dim() != sys.config_dim() {
        return Err(Error::dims(format!("state of dim {} for a system of dim {}", z0.dim(), sys.config_dim())));
    }
    if !(duration >= 0.0 && duration.is_finite()) {
        return Err(Error::config("duration", "must be finite and non-negative"));
    }
    if sys.is_relativistic() {
        let r = constraint_residual(z0, sys)?;
        if !(r.abs() <= cfg.admission_tol) {
            return Err(Error::OffShell { residual: r, tolerance: cfg.admission_tol });
        }
    }
    let mut record = TrajectoryRecord {
        parameter: Vec::new(),
        states: Vec::new(),
        constraint_residuals: Vec::new(),
        conserved: BTreeMap::new(),
    };
    let mut z = z0.to_flat();
    record.push(sys, 0.0, &z)?;
    let full = (duration / cfg.step * (1.0 + 1e-12)).floor() as usize;
    let tail = duration - full as f64 * cfg.step;
    let steps = full + usize::from(tail > 1e-12 * cfg.step);
    let mut s = 0.0;
    for i in 0..steps {
        let h = if i < full { cfg.step } else { tail };
        z = match cfg.method {
            Method::ExplicitRK4 => rk4_step(sys, &z, h)?,
            Method::ImplicitMidpoint => midpoint_step(sys, &z, h, cfg)?,
        };
        if z.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFiniteState { step: i + 1 });
        }
        if cfg.project {
            let mut p = PhasePoint::from_flat(&z);
            project_on_shell(sys, &mut p)?;
            z = p.to_flat();
        }
        s = if i < full { (i + 1) as f64 * cfg.step } else { duration };
        if (i + 1) % cfg.record_every == 0 || i + 1 == steps {
            record.push(sys, s, &z)?;
        }
    }
    debug_assert!(steps == 0 || (s - duration).abs() <= 1e-9 * duration.max(1.0));
    Ok(record)
}
