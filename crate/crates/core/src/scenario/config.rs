use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::constraints::{EvolutionConfig, Scheme};
use crate::dynamics::IntegratorConfig;
use crate::error::{Error, Result};
use crate::quantization::Boundary;

use super::ScenarioId;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: ScenarioId,
    pub seed: Option<u64>,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default)]
    pub system: SystemSpec,
    pub initial: Option<InitialSpec>,
    pub integrator: Option<IntegratorSpec>,
    pub grid: Option<GridSpec>,
    pub wave: Option<WaveSpec>,
    pub evolution: Option<EvolutionSpec>,
    pub dispersion: Option<DispersionSpec>,
    #[serde(default)]
    pub checks: CheckSpec,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: Option<PathBuf>,
    #[serde(default)]
    pub grid_dumps: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSpec {
    pub mass: Option<f64>,
    pub charge: Option<f64>,
    /// Oscillator frequency of the non-relativistic system.
    pub omega: Option<f64>,
    /// Spatial dimension; the configuration space adds time.
    pub spatial_dim: Option<usize>,
    pub field: Option<FieldSpec>,
    pub metric: Option<MetricSpec>,
    /// Scalar potential of the Schrödinger Hamiltonian, in `q1..qd`.
    pub potential: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FieldSpec {
    UniformMagnetic {
        strength: f64,
    },
    UniformElectric {
        strength: f64,
    },
    /// Covariant components `A_u`; in `q0..q3` for relativistic systems,
    /// spatial components in `q1..qd` for Schrödinger runs.
    Expression {
        components: Vec<String>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MetricSpec {
    Minkowski,
    WeakField {
        kappa: f64,
        softening: f64,
    },
    /// Diagonal inverse metric `g^{uu}` in `q0..q3`.
    Diagonal {
        inverse: Vec<String>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSpec {
    /// Configuration point; includes time for relativistic systems.
    pub q: Vec<f64>,
    /// Spatial momenta; the time component is solved on the constraint surface.
    pub momentum: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSpec {
    #[serde(default = "default_method")]
    pub method: MethodName,
    pub step: f64,
    pub duration: f64,
    #[serde(default = "one")]
    pub record_every: usize,
    #[serde(default)]
    pub project: bool,
    /// Fixed-point tolerance of the implicit step, relative to the state size.
    pub implicit_tol: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodName {
    Rk4,
    ImplicitMidpoint,
}

fn default_method() -> MethodName {
    MethodName::ImplicitMidpoint
}

fn one() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
    pub n: Vec<usize>,
    #[serde(default = "default_boundary")]
    pub boundary: BoundaryName,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundaryName {
    Periodic,
    DirichletZero,
}

fn default_boundary() -> BoundaryName {
    BoundaryName::Periodic
}

/// Normalized Gaussian packet `exp(-|x - c|^2 / 4 width^2 + i k.x)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveSpec {
    pub centre: Vec<f64>,
    pub width: f64,
    #[serde(default)]
    pub wavenumber: Vec<f64>,
    /// Initial time derivative for Klein–Gordon runs.
    #[serde(default)]
    pub time_derivative: TimeDerivative,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TimeDerivative {
    #[default]
    Zero,
    /// `-i sqrt(m^2 + |k|^2) psi`.
    PositiveFrequency,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolutionSpec {
    pub dt: f64,
    pub steps: usize,
    pub cfl_bound: Option<f64>,
    pub solver_tol: Option<f64>,
    pub solver_max_iter: Option<usize>,
    pub hermiticity_threshold: Option<f64>,
    #[serde(default = "one")]
    pub record_every: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DispersionSpec {
    pub modes: Vec<i64>,
}

/// Tolerances of the per-run checks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CheckSpec {
    pub constraint_drift: f64,
    pub conserved_drift: f64,
    pub period: f64,
    pub norm_drift: f64,
    pub energy_drift: f64,
    pub dispersion: f64,
}

impl Default for CheckSpec {
    fn default() -> Self {
        CheckSpec {
            constraint_drift: 1e-8,
            conserved_drift: 1e-8,
            period: 1e-6,
            norm_drift: 1e-8,
            energy_drift: 1e-8,
            dispersion: 1e-2,
        }
    }
}

pub const DEFAULT_SEED: u64 = 1;

fn require<'a, T>(value: &'a Option<T>, path: &str) -> Result<&'a T> {
    value.as_ref().ok_or_else(|| Error::config(path, "missing"))
}

fn positive(x: f64, path: &str) -> Result<f64> {
    if x.is_finite() && x > 0.0 {
        Ok(x)
    } else {
        Err(Error::config(path, format!("must be positive and finite, got {x}")))
    }
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| {
            let path = match e.span() {
                Some(s) => format!("line {}", text[..s.start].matches('\n').count() + 1),
                None => "<root>".into(),
            };
            Error::config(path, e.message())
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    /// Default configuration of scenarios that need no parameters.
    pub fn for_scenario(scenario: ScenarioId) -> Self {
        ScenarioConfig { scenario, ..Default::default() }
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }

    pub fn mass(&self) -> Result<f64> {
        positive(*require(&self.system.mass, "system.mass")?, "system.mass")
    }

    pub fn charge(&self) -> Result<f64> {
        let e = *require(&self.system.charge, "system.charge")?;
        if e.is_finite() {
            Ok(e)
        } else {
            Err(Error::config("system.charge", "must be finite"))
        }
    }

    pub fn initial(&self) -> Result<&InitialSpec> {
        require(&self.initial, "initial")
    }

    pub fn integrator(&self) -> Result<IntegratorConfig> {
        let spec = require(&self.integrator, "integrator")?;
        let step = positive(spec.step, "integrator.step")?;
        positive(spec.duration, "integrator.duration")?;
        let cfg = match spec.method {
            MethodName::Rk4 => IntegratorConfig::rk4(step),
            MethodName::ImplicitMidpoint => IntegratorConfig::implicit_midpoint(step),
        };
        let mut cfg = cfg.with_record_every(spec.record_every.max(1)).with_projection(spec.project);
        if let Some(tol) = spec.implicit_tol {
            cfg.implicit_tol = positive(tol, "integrator.implicit_tol")?;
        }
        Ok(cfg)
    }

    pub fn grid(&self) -> Result<&GridSpec> {
        let g = require(&self.grid, "grid")?;
        let d = g.n.len();
        if d == 0 || g.min.len() != d || g.max.len() != d {
            return Err(Error::config("grid", "min, max and n need one entry per axis"));
        }
        for (i, ((a, b), n)) in g.min.iter().zip(&g.max).zip(&g.n).enumerate() {
            if !(a < b) || *n < 2 {
                return Err(Error::config(format!("grid[{i}]"), "needs min < max and n >= 2"));
            }
        }
        Ok(g)
    }

    pub fn wave(&self) -> Result<&WaveSpec> {
        let w = require(&self.wave, "wave")?;
        positive(w.width, "wave.width")?;
        let d = self.grid()?.n.len();
        if w.centre.len() != d || !(w.wavenumber.is_empty() || w.wavenumber.len() == d) {
            return Err(Error::config("wave", format!("centre and wavenumber need {d} entries")));
        }
        Ok(w)
    }

    pub fn evolution(&self, scheme: Scheme) -> Result<EvolutionConfig> {
        let spec = require(&self.evolution, "evolution")?;
        let dt = positive(spec.dt, "evolution.dt")?;
        let mut cfg = match scheme {
            Scheme::CrankNicolson => EvolutionConfig::crank_nicolson(dt, spec.steps),
            Scheme::Leapfrog => EvolutionConfig::leapfrog(dt, spec.steps),
        };
        if let Some(x) = spec.cfl_bound {
            cfg.cfl_bound = positive(x, "evolution.cfl_bound")?;
        }
        if let Some(x) = spec.solver_tol {
            cfg.solver_tol = positive(x, "evolution.solver_tol")?;
        }
        if let Some(x) = spec.solver_max_iter {
            cfg.solver_max_iter = x.max(1);
        }
        if let Some(x) = spec.hermiticity_threshold {
            cfg.hermiticity_threshold = positive(x, "evolution.hermiticity_threshold")?;
        }
        Ok(cfg.with_record_every(spec.record_every))
    }
}

impl From<BoundaryName> for Boundary {
    fn from(b: BoundaryName) -> Self {
        match b {
            BoundaryName::Periodic => Boundary::Periodic,
            BoundaryName::DirichletZero => Boundary::DirichletZero,
        }
    }
}
