use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantization::Grid;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    CrankNicolson,
    Leapfrog,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvolutionConfig {
    pub dt: f64,
    pub steps: usize,
    pub scheme: Scheme,
    /// Relative residual at which the implicit solve stops.
    pub solver_tol: f64,
    pub solver_max_iter: usize,
    /// Largest admissible `dt / h` for leapfrog.
    pub cfl_bound: f64,
    /// Largest admissible Hermiticity defect of the Hamiltonian.
    pub hermiticity_threshold: f64,
    /// Cadence of the conserved-quantity series.
    pub record_every: usize,
    /// Cadence of stored snapshots; `None` keeps only the final state.
    pub snapshot_every: Option<usize>,
}

impl EvolutionConfig {
    pub fn crank_nicolson(dt: f64, steps: usize) -> Self {
        EvolutionConfig {
            dt,
            steps,
            scheme: Scheme::CrankNicolson,
            solver_tol: 1e-12,
            solver_max_iter: 500,
            cfl_bound: 1.0,
            hermiticity_threshold: 1e-6,
            record_every: 1,
            snapshot_every: None,
        }
    }

    pub fn leapfrog(dt: f64, steps: usize) -> Self {
        EvolutionConfig { scheme: Scheme::Leapfrog, ..Self::crank_nicolson(dt, steps) }
    }

    pub fn with_record_every(mut self, n: usize) -> Self {
        self.record_every = n.max(1);
        self
    }

    pub fn with_snapshots(mut self, every: usize) -> Self {
        self.snapshot_every = Some(every.max(1));
        self
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::config("dt", "must be positive and finite"));
        }
        if !(self.solver_tol > 0.0) || self.solver_max_iter == 0 {
            return Err(Error::config("solver", "tolerance and iteration budget must be positive"));
        }
        Ok(())
    }
}

/// Field value and, for second-order equations, its time derivative.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WaveState {
    pub psi: Grid,
    pub psi_t: Option<Grid>,
}

impl WaveState {
    pub fn new(psi: Grid) -> Self {
        WaveState { psi, psi_t: None }
    }

    pub fn with_velocity(psi: Grid, psi_t: Grid) -> Result<Self> {
        psi.check_compatible(&psi_t)?;
        Ok(WaveState { psi, psi_t: Some(psi_t) })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Evolution {
    pub scheme: Scheme,
    pub dt: f64,
    /// Times of the conserved-quantity samples.
    pub times: Vec<f64>,
    /// `"norm"` for Schrödinger runs, `"energy"` for Klein–Gordon runs.
    pub conserved: BTreeMap<String, Vec<f64>>,
    pub snapshots: Vec<(f64, WaveState)>,
    pub final_state: WaveState,
    /// Iterations of each implicit solve.
    pub solver_iterations: Vec<usize>,
}

impl Evolution {
    pub(crate) fn new(scheme: Scheme, dt: f64, initial: WaveState) -> Self {
        Evolution {
            scheme,
            dt,
            times: Vec::new(),
            conserved: BTreeMap::new(),
            snapshots: Vec::new(),
            final_state: initial,
            solver_iterations: Vec::new(),
        }
    }

    pub(crate) fn record(&mut self, t: f64, values: &[(&str, f64)]) {
        self.times.push(t);
        for (k, v) in values {
            self.conserved.entry((*k).to_string()).or_default().push(*v);
        }
    }

    pub fn series(&self, key: &str) -> Option<&[f64]> {
        self.conserved.get(key).map(Vec::as_slice)
    }

    /// `max_n |x_n - x_0|` of a conserved series.
    pub fn max_drift(&self, key: &str) -> Option<f64> {
        let s = self.series(key)?;
        let x0 = *s.first()?;
        Some(s.iter().map(|x| (x - x0).abs()).fold(0.0, f64::max))
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let keys: Vec<&String> = self.conserved.keys().collect();
        let mut header = vec!["t".to_string()];
        header.extend(keys.iter().map(|k| k.to_string()));
        out.write_record(&header)?;
        for (i, t) in self.times.iter().enumerate() {
            let mut row = vec![format!("{t:e}")];
            row.extend(keys.iter().map(|k| format!("{:e}", self.conserved[*k][i])));
            out.write_record(&row)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }
}
