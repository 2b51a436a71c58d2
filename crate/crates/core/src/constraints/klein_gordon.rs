use super::evolution::{Evolution, EvolutionConfig, Scheme, WaveState};
use crate::error::{Error, Result};
use crate::quantization::{laplacian, Grid, GridGeometry, GridKind};
use crate::Complex64;

fn pairing(g: &GridGeometry, a: &[Complex64], b: &[Complex64]) -> f64 {
    g.cell_volume() * a.iter().zip(b).map(|(x, y)| (x.conj() * y).re).sum::<f64>()
}

/// `(1/2) int |psi_t|^2 + |grad psi|^2 + m^2 |psi|^2` with the gradient term
/// written as `-<psi, Laplacian psi>`.
pub fn klein_gordon_energy(state: &WaveState, mass: f64) -> Result<f64> {
    let psi_t =
        state.psi_t.as_ref().ok_or_else(|| Error::config("psi_t", "Klein–Gordon energy needs the time derivative"))?;
    let g = &state.psi.geometry;
    let v = &state.psi.values;
    let lap = laplacian(g, v);
    Ok(0.5 * (pairing(g, &psi_t.values, &psi_t.values) - pairing(g, v, &lap) + mass * mass * pairing(g, v, v)))
}

/// Leapfrog for `psi_tt = Laplacian psi - m^2 psi` on a spatial grid.
///
/// The recorded `"energy"` is the staggered quantity
/// `(1/2)|(psi_{n+1} - psi_n)/dt|^2 - (1/2)<psi_{n+1}, (Laplacian - m^2) psi_n>`,
/// which the scheme conserves up to roundoff.
pub fn klein_gordon_evolve(initial: &WaveState, mass: f64, cfg: &EvolutionConfig) -> Result<Evolution> {
    cfg.validate()?;
    if cfg.scheme != Scheme::Leapfrog {
        return Err(Error::config("scheme", "Klein–Gordon evolution uses leapfrog"));
    }
    let psi_t = initial
        .psi_t
        .as_ref()
        .ok_or_else(|| Error::config("psi_t", "Klein–Gordon evolution needs the initial time derivative"))?;
    initial.psi.check_compatible(psi_t)?;
    if initial.psi.kind != GridKind::HalfDensity {
        return Err(Error::GridMismatch("Klein–Gordon evolution acts on spatial grids".into()));
    }
    let g = initial.psi.geometry.clone();
    let h_min = (0..g.dims()).map(|a| g.spacing(a)).fold(f64::INFINITY, f64::min);
    let ratio = cfg.dt / h_min;
    if ratio > cfg.cfl_bound {
        return Err(Error::CflViolation { ratio, bound: cfg.cfl_bound });
    }

    let dt = cfg.dt;
    let m2 = mass * mass;
    let accel =
        |v: &[Complex64]| -> Vec<Complex64> { laplacian(&g, v).into_iter().zip(v).map(|(l, x)| l - m2 * x).collect() };
    let energy = |prev: &[Complex64], next: &[Complex64], acc_prev: &[Complex64]| -> f64 {
        let vel: Vec<Complex64> = next.iter().zip(prev).map(|(a, b)| (a - b) / dt).collect();
        0.5 * pairing(&g, &vel, &vel) - 0.5 * pairing(&g, next, acc_prev)
    };

    let mut prev = initial.psi.values.clone();
    let mut acc = accel(&prev);
    let mut curr: Vec<Complex64> =
        prev.iter().zip(&psi_t.values).zip(&acc).map(|((x, v), a)| x + dt * v + 0.5 * dt * dt * a).collect();

    let mut evo = Evolution::new(Scheme::Leapfrog, dt, initial.clone());
    evo.record(0.5 * dt, &[("energy", energy(&prev, &curr, &acc))]);
    if cfg.snapshot_every.is_some() {
        evo.snapshots.push((0.0, initial.clone()));
    }

    for step in 1..cfg.steps {
        acc = accel(&curr);
        let next: Vec<Complex64> =
            curr.iter().zip(&prev).zip(&acc).map(|((c, p), a)| 2.0 * c - p + dt * dt * a).collect();
        if next.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFiniteState { step });
        }
        prev = std::mem::replace(&mut curr, next);
        let level = step + 1;
        let t = level as f64 * dt;
        if level % cfg.record_every == 0 || level == cfg.steps {
            evo.record(t - 0.5 * dt, &[("energy", energy(&prev, &curr, &acc))]);
        }
        if cfg.snapshot_every.is_some_and(|n| level % n == 0) {
            evo.snapshots.push((t, state_at(&initial.psi, &prev, &curr, dt, &accel(&curr))));
        }
    }
    evo.final_state =
        if cfg.steps == 0 { initial.clone() } else { state_at(&initial.psi, &prev, &curr, dt, &accel(&curr)) };
    Ok(evo)
}

/// State at the later of two consecutive levels. The velocity is the backward
/// difference corrected by `dt/2` times the acceleration there.
fn state_at(template: &Grid, prev: &[Complex64], curr: &[Complex64], dt: f64, acc: &[Complex64]) -> WaveState {
    let vel = curr.iter().zip(prev).zip(acc).map(|((a, b), f)| (a - b) / dt + 0.5 * dt * f).collect();
    WaveState { psi: template.with_values(curr.to_vec()), psi_t: Some(template.with_values(vel)) }
}
