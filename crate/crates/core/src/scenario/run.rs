use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::Serialize;

use super::config::{FieldSpec, MetricSpec, ScenarioConfig, TimeDerivative};
use super::expr::{coordinate_names, Expression};
use super::report::{Bound, Check, VerificationReport};
use super::verify;
use super::ScenarioId;
use crate::constraints::{
    charged_hamiltonian, dispersion_check, klein_gordon_evolve, schrodinger_evolve, DispersionResult, Evolution,
    Scheme, WaveState,
};
use crate::dynamics::{
    integrate, rel_vector_field, revolution_period, GaugePotential, HamiltonianSystem, TrajectoryRecord,
};
use crate::error::{Error, Result};
use crate::phase_space::{MetricField, PhasePoint, ScalarField, VerticalPhasePoint};
use crate::quantization::{inner_product, io, Axis, Grid, GridGeometry, GridKind};
use crate::Complex64;

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Overrides `output.dir`; the current directory when neither is set.
    pub output_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    /// Overrides the configured scenario.
    pub scenario: Option<ScenarioId>,
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub report: VerificationReport,
    pub output_dir: PathBuf,
}

impl RunOutcome {
    /// `0` when every check passed, `1` otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.report.passed {
            0
        } else {
            1
        }
    }
}

/// Collects output files and stamps each with the scenario and seed.
struct Outputs<'a> {
    dir: &'a Path,
    header: String,
    written: Vec<String>,
}

impl Outputs<'_> {
    fn csv(&mut self, name: &str, write: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<()> {
        let mut buf = format!("# {}\n", self.header).into_bytes();
        write(&mut buf)?;
        self.file(name, &buf)
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let text = serde_json::to_string_pretty(value)? + "\n";
        self.file(name, text.as_bytes())
    }

    fn grid(&mut self, name: &str, grid: &Grid) -> Result<()> {
        let mut buf = Vec::new();
        io::write_binary(grid, &mut buf)?;
        self.file(name, &buf)
    }

    fn file(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        std::fs::write(self.dir.join(name), bytes)?;
        self.written.push(name.to_string());
        Ok(())
    }
}

/// Validates `config`, runs the scenario, writes its outputs and
/// `report.json`. Errors are reserved for invalid configuration and I/O;
/// numerical failures become failed checks.
pub fn run_scenario(config: &ScenarioConfig, options: &RunOptions) -> Result<RunOutcome> {
    let mut config = config.clone();
    if let Some(s) = options.scenario {
        config.scenario = s;
    }
    if let Some(seed) = options.seed {
        config.seed = Some(seed);
    }
    let seed = config.seed();
    let dir = options.output_dir.clone().or_else(|| config.output.dir.clone()).unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir)?;
    let mut out =
        Outputs { dir: &dir, header: format!("scenario={} seed={seed}", config.scenario), written: Vec::new() };

    let checks = match config.scenario {
        ScenarioId::ClassicalFree
        | ScenarioId::ClassicalCharged
        | ScenarioId::ClassicalCurved
        | ScenarioId::ClassicalNonrel => classical(&config, &mut out)?,
        ScenarioId::KinematicsSuite => verify::criterion_kinematics(seed).parts,
        ScenarioId::QuantizeVerify => verify::run_concurrently(
            &[
                verify::criterion_prequantization,
                verify::criterion_schrodinger_representation,
                verify::criterion_half_densities,
            ],
            seed,
        ),
        ScenarioId::SchrodingerRun => schrodinger(&config, &mut out)?,
        ScenarioId::KleinGordonRun => klein_gordon(&config, &mut out)?,
        ScenarioId::FullVerify => verify::full_verify(seed),
    };
    let mut outputs = out.written;
    outputs.push("report.json".into());
    let report = VerificationReport::new(config.scenario.name(), seed, checks, outputs);
    report.save_json(dir.join("report.json"))?;
    Ok(RunOutcome { report, output_dir: dir })
}

fn check_len(values: &[f64], n: usize, path: &str) -> Result<()> {
    if values.len() == n {
        Ok(())
    } else {
        Err(Error::config(path, format!("expected {n} entries, got {}", values.len())))
    }
}

fn gauge_potential(spec: &FieldSpec) -> Result<GaugePotential> {
    Ok(match spec {
        FieldSpec::UniformMagnetic { strength } => GaugePotential::uniform_magnetic(4, *strength),
        FieldSpec::UniformElectric { strength } => GaugePotential::uniform_electric(4, *strength),
        FieldSpec::Expression { components } => {
            if components.len() != 4 {
                return Err(Error::config("system.field.components", "expected 4 components A_0..A_3"));
            }
            let names = coordinate_names(4, 0);
            let exprs = components.iter().map(|c| Expression::parse(c, &names)).collect::<Result<Vec<_>>>()?;
            GaugePotential::new(4, move |q| exprs.iter().map(|e| e.eval(q)).collect())
        }
    })
}

fn metric_field(spec: &MetricSpec) -> Result<MetricField> {
    Ok(match spec {
        MetricSpec::Minkowski => MetricField::minkowski(4),
        MetricSpec::WeakField { kappa, softening } => MetricField::weak_field(4, *kappa, *softening),
        MetricSpec::Diagonal { inverse } => {
            if inverse.len() != 4 {
                return Err(Error::config("system.metric.inverse", "expected 4 diagonal entries g^00..g^33"));
            }
            let names = coordinate_names(4, 0);
            let exprs = inverse.iter().map(|c| Expression::parse(c, &names)).collect::<Result<Vec<_>>>()?;
            MetricField::new(4, move |q| DMatrix::from_fn(4, 4, |u, v| if u == v { exprs[u].eval(q) } else { 0.0 }))
        }
    })
}

/// Momentum on the relativistic constraint for a diagonal metric, with spatial
/// kinetic momenta `pi` and potential `A`: `p = pi + eA`.
fn on_shell(metric: &MetricField, mass: f64, q: &[f64], pi: &[f64], shift: &[f64]) -> Result<PhasePoint> {
    let g = metric.inverse_at(q);
    metric.validate_at(q).map_err(|e| Error::config("initial.q", e.to_string()))?;
    let spatial: f64 = (0..3).map(|i| g[(i + 1, i + 1)] * pi[i] * pi[i]).sum();
    let disc = (mass * mass - spatial) / g[(0, 0)];
    if !(disc > 0.0) {
        return Err(Error::config("initial.momentum", "no future-pointing momentum on the mass shell"));
    }
    let kinetic = [-disc.sqrt(), pi[0], pi[1], pi[2]];
    PhasePoint::new(q.to_vec(), kinetic.iter().zip(shift).map(|(k, a)| k + a).collect())
}

fn classical(config: &ScenarioConfig, out: &mut Outputs<'_>) -> Result<Vec<Check>> {
    let cfg = config.integrator()?;
    let duration = config.integrator.as_ref().map(|i| i.duration).unwrap_or_default();
    let init = config.initial()?;
    let tol = &config.checks;
    let mut period_oracle = None;

    let (sys, z0) = if config.scenario == ScenarioId::ClassicalNonrel {
        let omega = *config.system.omega.as_ref().ok_or_else(|| Error::config("system.omega", "missing"))?;
        let d = init.momentum.len();
        check_len(&init.q, d + 1, "initial.q")?;
        let sys = HamiltonianSystem::nonrel_oscillator(d, omega)?;
        let s = VerticalPhasePoint::new(init.q[0], init.q[1..].to_vec(), init.momentum.clone())?;
        let z0 = sys.lift_on_shell(&s)?;
        (sys, z0)
    } else {
        let mass = config.mass()?;
        check_len(&init.q, 4, "initial.q")?;
        check_len(&init.momentum, 3, "initial.momentum")?;
        match config.scenario {
            ScenarioId::ClassicalFree => {
                let sys = HamiltonianSystem::free_special(4, mass)?;
                let z0 = on_shell(&MetricField::minkowski(4), mass, &init.q, &init.momentum, &[0.0; 4])?;
                (sys, z0)
            }
            ScenarioId::ClassicalCharged => {
                let charge = config.charge()?;
                let spec = config.system.field.as_ref().ok_or_else(|| Error::config("system.field", "missing"))?;
                let pot = gauge_potential(spec)?;
                let shift: Vec<f64> = pot.value(&init.q).iter().map(|a| charge * a).collect();
                let z0 = on_shell(&MetricField::minkowski(4), mass, &init.q, &init.momentum, &shift)?;
                if let FieldSpec::UniformMagnetic { strength } = spec {
                    let energy = (mass * mass + init.momentum.iter().map(|x| x * x).sum::<f64>()).sqrt();
                    period_oracle = Some(2.0 * PI * energy / (charge * strength).abs());
                }
                (HamiltonianSystem::charged_em(mass, charge, pot)?, z0)
            }
            _ => {
                let spec = config.system.metric.as_ref().ok_or_else(|| Error::config("system.metric", "missing"))?;
                let metric = metric_field(spec)?;
                let z0 = on_shell(&metric, mass, &init.q, &init.momentum, &[0.0; 4])?;
                (HamiltonianSystem::curved_metric(mass, metric)?, z0)
            }
        }
    };

    let topic = "constrained classical flow";
    let rec = match integrate(&sys, &z0, &cfg, duration) {
        Ok(r) => r,
        Err(e) => return Ok(vec![Check::failed("integration", topic, e.to_string())]),
    };
    out.csv("trajectory.csv", |w| rec.write_csv(w))?;
    out.json("trajectory.json", &Stamped { seed: config.seed(), record: &rec })?;

    let mut checks = vec![Check::new(
        "max |constraint residual|",
        topic,
        rec.max_abs_residual(),
        Bound::below(tol.constraint_drift),
    )];
    match config.scenario {
        ScenarioId::ClassicalNonrel => {
            let e = &rec.conserved["hamiltonian"];
            let drift = e.iter().map(|x| (x - e[0]).abs()).fold(0.0, f64::max);
            checks.push(Check::new("energy drift", topic, drift, Bound::below(tol.conserved_drift)));
        }
        ScenarioId::ClassicalFree => {
            let dp =
                rec.states.iter().flat_map(|z| z.p.iter().zip(&z0.p).map(|(a, b)| (a - b).abs())).fold(0.0, f64::max);
            checks.push(Check::new("momentum change", topic, dp, Bound::below(tol.conserved_drift)));
            let energy = -z0.p[0];
            let v = three_velocity_error(&sys, &rec, &z0.p[1..], energy)?;
            checks.push(Check::new("three-velocity error", topic, v, Bound::below(tol.conserved_drift)));
        }
        ScenarioId::ClassicalCharged => {
            if let Some(oracle) = period_oracle {
                let c = match revolution_period(&sys, &rec, (1, 2)) {
                    Ok(t) => Check::new(
                        "cyclotron period relative error",
                        topic,
                        ((t - oracle) / oracle).abs(),
                        Bound::below(tol.period),
                    ),
                    Err(e) => Check::failed("cyclotron period relative error", topic, e.to_string()),
                };
                checks.push(c);
            }
        }
        _ => {}
    }
    Ok(checks)
}

#[derive(Serialize)]
struct Stamped<'a> {
    seed: u64,
    #[serde(flatten)]
    record: &'a TrajectoryRecord,
}

fn three_velocity_error(sys: &HamiltonianSystem, rec: &TrajectoryRecord, p: &[f64], energy: f64) -> Result<f64> {
    let mut err = 0.0f64;
    for z in &rec.states {
        let f = rel_vector_field(sys, z)?;
        for i in 0..3 {
            err = err.max((f.dq[i + 1] / f.dq[0] - p[i] / energy).abs());
        }
    }
    Ok(err)
}

/// Spatial grid with axes labelled `q1..qd`.
fn spatial_grid(config: &ScenarioConfig) -> Result<GridGeometry> {
    let spec = config.grid()?;
    let axes =
        (0..spec.n.len()).map(|i| Axis::new(format!("q{}", i + 1), spec.min[i], spec.max[i], spec.n[i])).collect();
    GridGeometry::new(axes, spec.boundary.into())
}

/// Normalized Gaussian packet from the `wave` table.
fn initial_packet(config: &ScenarioConfig, g: &GridGeometry) -> Result<Grid> {
    let w = config.wave()?.clone();
    let k = if w.wavenumber.is_empty() { vec![0.0; g.dims()] } else { w.wavenumber.clone() };
    let psi = Grid::half_density(g.clone(), move |x| {
        let r2: f64 = x.iter().zip(&w.centre).map(|(a, b)| (a - b).powi(2)).sum();
        let phase: f64 = x.iter().zip(&k).map(|(a, b)| a * b).sum();
        Complex64::from_polar((-r2 / (4.0 * w.width * w.width)).exp(), phase)
    });
    let n = inner_product(&psi, &psi)?.re.sqrt();
    if !(n > 0.0) {
        return Err(Error::config("wave", "packet vanishes on the grid"));
    }
    Ok(psi.scaled(Complex64::new(1.0 / n, 0.0)))
}

#[derive(Serialize)]
struct EvolutionSummary<'a> {
    scenario: &'static str,
    seed: u64,
    scheme: Scheme,
    grid: &'a GridGeometry,
    dt: f64,
    steps: usize,
    times: &'a [f64],
    conserved: &'a std::collections::BTreeMap<String, Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    dispersion: Option<&'a [DispersionResult]>,
}

fn write_evolution(
    config: &ScenarioConfig,
    out: &mut Outputs<'_>,
    evo: &Evolution,
    grid: &GridGeometry,
    steps: usize,
    dispersion: Option<&[DispersionResult]>,
) -> Result<()> {
    out.csv("evolution.csv", |w| evo.write_csv(w))?;
    out.json(
        "evolution.json",
        &EvolutionSummary {
            scenario: config.scenario.name(),
            seed: config.seed(),
            scheme: evo.scheme,
            grid,
            dt: evo.dt,
            steps,
            times: &evo.times,
            conserved: &evo.conserved,
            dispersion,
        },
    )?;
    if config.output.grid_dumps {
        out.grid("final-state.ctg", &evo.final_state.psi)?;
    }
    Ok(())
}

fn spatial_potential(config: &ScenarioConfig, d: usize) -> Result<(Vec<ScalarField>, f64)> {
    let names = coordinate_names(d, 1);
    let charge = config.system.charge.unwrap_or(0.0);
    let a = match &config.system.field {
        None => vec![ScalarField::zero(d); d],
        Some(FieldSpec::UniformMagnetic { strength }) if d == 2 => {
            let b = *strength;
            vec![
                ScalarField::with_gradient(2, move |x| -b * x[1] / 2.0, move |_| vec![0.0, -b / 2.0]),
                ScalarField::with_gradient(2, move |x| b * x[0] / 2.0, move |_| vec![b / 2.0, 0.0]),
            ]
        }
        Some(FieldSpec::Expression { components }) if components.len() == d => components
            .iter()
            .map(|c| Expression::parse(c, &names).map(Expression::into_field))
            .collect::<Result<Vec<_>>>()?,
        Some(_) => {
            return Err(Error::config(
                "system.field",
                format!("Schrödinger runs take {d} spatial expression components, or a uniform magnetic field in 2D"),
            ))
        }
    };
    Ok((a, charge))
}

fn schrodinger(config: &ScenarioConfig, out: &mut Outputs<'_>) -> Result<Vec<Check>> {
    let mass = config.mass()?;
    let g = spatial_grid(config)?;
    let psi0 = initial_packet(config, &g)?;
    let cfg = config.evolution(Scheme::CrankNicolson)?;
    let (a, charge) = spatial_potential(config, g.dims())?;
    let potential = match &config.system.potential {
        Some(src) => Expression::parse(src, &coordinate_names(g.dims(), 1))?.into_field(),
        None => ScalarField::zero(g.dims()),
    };
    // `potential` is the energy V; the Hamiltonian adds it as e * (V / e)
    let h = if charge == 0.0 {
        charged_hamiltonian(mass, 1.0, vec![ScalarField::zero(g.dims()); g.dims()], potential)?
    } else {
        let phi = ScalarField::function(g.dims(), move |x| potential.value(x) / charge);
        charged_hamiltonian(mass, charge, a, phi)?
    };

    let topic = "Schrödinger equation";
    let evo = match schrodinger_evolve(&h, &psi0, &cfg) {
        Ok(evo) => evo,
        Err(err) => return Ok(vec![Check::failed("Crank–Nicolson run", topic, err.to_string())]),
    };
    write_evolution(config, out, &evo, &g, cfg.steps, None)?;
    let drift = evo.max_drift("norm_sq").unwrap_or(f64::NAN);
    let max_iter = evo.solver_iterations.iter().copied().max().unwrap_or(0);
    Ok(vec![Check::new("norm drift", topic, drift, Bound::below(config.checks.norm_drift))
        .with_note(format!("at most {max_iter} solver iterations per step"))])
}

fn klein_gordon(config: &ScenarioConfig, out: &mut Outputs<'_>) -> Result<Vec<Check>> {
    let mass = config.mass()?;
    let g = spatial_grid(config)?;
    let psi = initial_packet(config, &g)?;
    let cfg = config.evolution(Scheme::Leapfrog)?;
    let w = config.wave()?;
    let psi_t = match w.time_derivative {
        TimeDerivative::Zero => Grid::zeros(g.clone(), GridKind::HalfDensity)?,
        TimeDerivative::PositiveFrequency => {
            let k2: f64 = w.wavenumber.iter().map(|k| k * k).sum();
            psi.scaled(Complex64::new(0.0, -(mass * mass + k2).sqrt()))
        }
    };
    let modes = config.dispersion.as_ref().map(|d| d.modes.clone()).unwrap_or_default();
    if !modes.is_empty() && (g.dims() != 1 || g.boundary() != crate::quantization::Boundary::Periodic) {
        return Err(Error::config("dispersion", "dispersion modes need a 1D periodic grid"));
    }

    let topic = "Klein–Gordon equation";
    let h_min = (0..g.dims()).map(|a| g.spacing(a)).fold(f64::INFINITY, f64::min);
    let cfl = Check::new("CFL ratio dt/h", topic, cfg.dt / h_min, Bound::below(cfg.cfl_bound));
    if !cfl.passed {
        return Ok(vec![cfl.with_note("CflViolation: run not started")]);
    }
    let evo = match klein_gordon_evolve(&WaveState::with_velocity(psi, psi_t)?, mass, &cfg) {
        Ok(evo) => evo,
        Err(err) => return Ok(vec![cfl, Check::failed("leapfrog run", topic, err.to_string())]),
    };
    let e = evo.series("energy").unwrap_or(&[]);
    let scale = e.first().map(|x| x.abs()).filter(|x| *x > 0.0).unwrap_or(1.0);
    let drift = evo.max_drift("energy").unwrap_or(f64::NAN) / scale;
    let mut checks =
        vec![cfl, Check::new("relative energy drift", topic, drift, Bound::below(config.checks.energy_drift))];

    let mut table = Vec::new();
    for &mode in &modes {
        match dispersion_check(mode, mass, &g, &cfg) {
            Ok(d) => {
                checks.push(Check::new(
                    format!("dispersion mode {mode}: relative error"),
                    topic,
                    d.relative_error,
                    Bound::below(config.checks.dispersion),
                ));
                table.push(d);
            }
            Err(err) => checks.push(Check::failed(format!("dispersion mode {mode}"), topic, err.to_string())),
        }
    }
    write_evolution(config, out, &evo, &g, cfg.steps, (!modes.is_empty()).then_some(table.as_slice()))?;
    if !table.is_empty() {
        out.csv("dispersion.csv", |w| {
            let mut csv = csv::Writer::from_writer(w);
            for d in &table {
                csv.serialize(d)?;
            }
            csv.flush()?;
            Ok(())
        })?;
    }
    Ok(checks)
}
