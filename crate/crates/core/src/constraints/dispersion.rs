use std::f64::consts::PI;

use serde::Serialize;

use super::evolution::{EvolutionConfig, WaveState};
use super::klein_gordon::klein_gordon_evolve;
use crate::error::{Error, Result};
use crate::quantization::{Boundary, Grid, GridGeometry};
use crate::Complex64;

/// `(1/n) sum_j psi_j exp(-2 pi i mode (x_j - min) / L)` on a 1D periodic grid.
pub fn fourier_amplitude(psi: &Grid, mode: i64) -> Complex64 {
    let g = &psi.geometry;
    let axis = &g.axes()[0];
    let n = axis.n as f64;
    psi.values
        .iter()
        .enumerate()
        .map(|(j, v)| v * Complex64::from_polar(1.0, -2.0 * PI * mode as f64 * j as f64 / n))
        .sum::<Complex64>()
        / n
}

/// Least-squares slope of `log|y|` against `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = x.iter().zip(y).map(|(a, b)| (a.ln(), b.abs().ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

fn fit_slope(t: &[f64], y: &[f64]) -> f64 {
    let n = t.len() as f64;
    let mt = t.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let stt: f64 = t.iter().map(|a| (a - mt).powi(2)).sum();
    let sty: f64 = t.iter().zip(y).map(|(a, b)| (a - mt) * (b - my)).sum();
    sty / stt
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DispersionResult {
    pub mode: i64,
    /// Physical wavenumber `2 pi mode / L`.
    pub k: f64,
    pub mass: f64,
    pub omega_measured: f64,
    /// `sqrt(k^2 + m^2)`.
    pub omega_analytic: f64,
    /// Frequency the leapfrog scheme propagates exactly.
    pub omega_discrete: f64,
    pub relative_error: f64,
    pub samples: usize,
}

const MIN_SAMPLES: usize = 8;
/// Phase advance allowed between samples so the unwrap stays unambiguous.
const MAX_PHASE_STEP: f64 = 0.5;

/// Evolves the positive-frequency mode `exp(i k x)` and fits its angular
/// frequency from the unwrapped phase of the matching Fourier amplitude.
pub fn dispersion_check(
    mode: i64,
    mass: f64,
    geometry: &GridGeometry,
    cfg: &EvolutionConfig,
) -> Result<DispersionResult> {
    if geometry.dims() != 1 || geometry.boundary() != Boundary::Periodic {
        return Err(Error::GridMismatch("dispersion checks run on a 1D periodic grid".into()));
    }
    let axis = &geometry.axes()[0];
    let length = axis.max - axis.min;
    let h = geometry.spacing(0);
    let k = 2.0 * PI * mode as f64 / length;
    let omega = (k * k + mass * mass).sqrt();
    let duration = cfg.dt * cfg.steps as f64;
    if omega > 0.0 && duration < 2.0 * PI / omega {
        return Err(Error::InsufficientRunLength(format!(
            "run covers {duration} time units, one period of mode {mode} is {}",
            2.0 * PI / omega
        )));
    }
    let every = ((MAX_PHASE_STEP / (omega.max(1e-300) * cfg.dt)).floor() as usize).clamp(1, cfg.steps.max(1));
    if cfg.steps / every + 1 < MIN_SAMPLES {
        return Err(Error::InsufficientRunLength(format!(
            "{} samples of the phase, need {MIN_SAMPLES}",
            cfg.steps / every + 1
        )));
    }

    let x0 = axis.min;
    let psi = Grid::half_density(geometry.clone(), |x| Complex64::from_polar(1.0, k * (x[0] - x0)));
    let psi_t = psi.scaled(Complex64::new(0.0, -omega));
    let state = WaveState::with_velocity(psi, psi_t)?;
    let run_cfg = EvolutionConfig { record_every: cfg.steps.max(1), snapshot_every: Some(every), ..cfg.clone() };
    let evo = klein_gordon_evolve(&state, mass, &run_cfg)?;

    let mut times = Vec::with_capacity(evo.snapshots.len());
    let mut phases = Vec::with_capacity(evo.snapshots.len());
    let mut last: Option<f64> = None;
    for (t, s) in &evo.snapshots {
        let raw = fourier_amplitude(&s.psi, mode).arg();
        let unwrapped = match last {
            None => raw,
            Some(prev) => prev + (raw - prev + PI).rem_euclid(2.0 * PI) - PI,
        };
        last = Some(unwrapped);
        times.push(*t);
        phases.push(unwrapped);
    }
    let omega_measured = -fit_slope(&times, &phases);

    let spatial = (4.0 / (h * h)) * (k * h / 2.0).sin().powi(2) + mass * mass;
    let omega_discrete = (2.0 / cfg.dt) * (cfg.dt / 2.0 * spatial.sqrt()).min(1.0).asin();
    let relative_error = if omega > 0.0 { (omega_measured - omega).abs() / omega } else { omega_measured.abs() };
    Ok(DispersionResult {
        mode,
        k,
        mass,
        omega_measured,
        omega_analytic: omega,
        omega_discrete,
        relative_error,
        samples: times.len(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NonrelLimitRow {
    pub k: f64,
    pub omega_measured: f64,
    pub omega_analytic: f64,
    /// `m + k^2 / 2m`.
    pub omega_nonrel: f64,
    /// `|omega_measured - (m + k^2/2m)|`.
    pub deviation_measured: f64,
    /// `|sqrt(k^2 + m^2) - m - k^2/2m|`.
    pub deviation_analytic: f64,
    /// `k^4 / 8m^3`.
    pub leading_order: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NonrelLimitReport {
    pub mass: f64,
    pub rows: Vec<NonrelLimitRow>,
    /// Log-log slope of the measured deviation against `k`.
    pub slope_measured: f64,
    pub slope_analytic: f64,
}

/// Measures `omega(k)` for each mode and compares it with the
/// non-relativistic dispersion `m + k^2 / 2m`.
pub fn nonrel_limit_compare(
    modes: &[i64],
    mass: f64,
    geometry: &GridGeometry,
    cfg: &EvolutionConfig,
) -> Result<NonrelLimitReport> {
    let mut rows = Vec::with_capacity(modes.len());
    for &mode in modes {
        let d = dispersion_check(mode, mass, geometry, cfg)?;
        let k = d.k;
        let omega_nonrel = mass + k * k / (2.0 * mass);
        rows.push(NonrelLimitRow {
            k,
            omega_measured: d.omega_measured,
            omega_analytic: d.omega_analytic,
            omega_nonrel,
            deviation_measured: (d.omega_measured - omega_nonrel).abs(),
            deviation_analytic: (d.omega_analytic - omega_nonrel).abs(),
            leading_order: k.powi(4) / (8.0 * mass.powi(3)),
        });
    }
    let usable: Vec<&NonrelLimitRow> = rows.iter().filter(|r| r.k > 0.0).collect();
    let (slope_measured, slope_analytic) = if usable.len() >= 2 {
        let ks: Vec<f64> = usable.iter().map(|r| r.k).collect();
        let dm: Vec<f64> = usable.iter().map(|r| r.deviation_measured).collect();
        let da: Vec<f64> = usable.iter().map(|r| r.deviation_analytic).collect();
        (loglog_slope(&ks, &dm), loglog_slope(&ks, &da))
    } else {
        (f64::NAN, f64::NAN)
    };
    Ok(NonrelLimitReport { mass, rows, slope_measured, slope_analytic })
}
