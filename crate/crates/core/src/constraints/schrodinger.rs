use nalgebra::DMatrix;

use super::evolution::{Evolution, EvolutionConfig, Scheme, WaveState};
use super::solver::bicgstab;
use crate::error::{Error, Result};
use crate::phase_space::ScalarField;
use crate::quantization::{hermiticity_residual, inner_product, quadratic_operator, Grid, GridKind, QuantumOperator};
use crate::Complex64;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// `p^2 / 2m` on `dim` spatial coordinates, i.e. `-Laplacian / 2m`.
pub fn free_hamiltonian(dim: usize, mass: f64) -> Result<QuantumOperator> {
    quadratic_operator(
        move |_| DMatrix::identity(dim, dim) / (2.0 * mass),
        vec![ScalarField::zero(dim); dim],
        ScalarField::zero(dim),
    )
}

/// `(p - eA)^2 / 2m + e phi` with spatial vector potential `A` and scalar potential `phi`.
pub fn charged_hamiltonian(
    mass: f64,
    charge: f64,
    vector_potential: Vec<ScalarField>,
    scalar_potential: ScalarField,
) -> Result<QuantumOperator> {
    let dim = scalar_potential.nvars();
    if vector_potential.len() != dim {
        return Err(Error::dims(format!("{dim} spatial coordinates need {dim} potential components")));
    }
    let b = vector_potential
        .iter()
        .map(|a| {
            let a = a.clone();
            ScalarField::function(dim, move |x| -charge / mass * a.value(x))
        })
        .collect();
    let c = ScalarField::function(dim, move |x| {
        let a2: f64 = vector_potential.iter().map(|a| a.value(x).powi(2)).sum();
        charge * charge * a2 / (2.0 * mass) + charge * scalar_potential.value(x)
    });
    quadratic_operator(move |_| DMatrix::identity(dim, dim) / (2.0 * mass), b, c)
}

/// Crank–Nicolson for `i d_t psi = H psi`:
/// `(1 + i dt H / 2) psi_{n+1} = (1 - i dt H / 2) psi_n`.
pub fn schrodinger_evolve(hamiltonian: &QuantumOperator, psi0: &Grid, cfg: &EvolutionConfig) -> Result<Evolution> {
    cfg.validate()?;
    if cfg.scheme != Scheme::CrankNicolson {
        return Err(Error::config("scheme", "Schrödinger evolution uses crank-nicolson"));
    }
    if psi0.kind != GridKind::HalfDensity {
        return Err(Error::GridMismatch("Schrödinger evolution acts on half-densities".into()));
    }
    let op = hamiltonian.prepare(&psi0.geometry)?;

    let h_psi = op.apply(psi0)?;
    let mut probes = vec![psi0.clone()];
    if h_psi.max_abs() > 0.0 {
        probes.push(h_psi);
    }
    let defect = hermiticity_residual(hamiltonian, &probes)?;
    if defect > cfg.hermiticity_threshold {
        return Err(Error::NonSymmetricHamiltonian { residual: defect, threshold: cfg.hermiticity_threshold });
    }

    let half = I * (cfg.dt / 2.0);
    let lhs = |v: &[Complex64]| -> Result<Vec<Complex64>> {
        let hv = op.apply_values(v)?;
        Ok(v.iter().zip(hv).map(|(x, y)| x + half * y).collect())
    };

    let norm_sq = |g: &Grid| inner_product(g, g).map(|c| c.re);
    let mut evo = Evolution::new(Scheme::CrankNicolson, cfg.dt, WaveState::new(psi0.clone()));
    evo.record(0.0, &[("norm_sq", norm_sq(psi0)?)]);
    if cfg.snapshot_every.is_some() {
        evo.snapshots.push((0.0, WaveState::new(psi0.clone())));
    }

    let mut psi = psi0.values.clone();
    for step in 1..=cfg.steps {
        let hv = op.apply_values(&psi)?;
        let rhs: Vec<Complex64> = psi.iter().zip(hv).map(|(x, y)| x - half * y).collect();
        let mut next = rhs.clone();
        let stats = bicgstab(lhs, &rhs, &mut next, cfg.solver_tol, cfg.solver_max_iter)?;
        evo.solver_iterations.push(stats.iterations);
        if next.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFiniteState { step });
        }
        psi = next;
        let t = step as f64 * cfg.dt;
        let recorded = step % cfg.record_every == 0 || step == cfg.steps;
        let snapshot = cfg.snapshot_every.is_some_and(|n| step % n == 0);
        if recorded || snapshot {
            let g = psi0.with_values(psi.clone());
            if recorded {
                evo.record(t, &[("norm_sq", norm_sq(&g)?)]);
            }
            if snapshot {
                evo.snapshots.push((t, WaveState::new(g)));
            }
        }
    }
    evo.final_state = WaveState::new(psi0.with_values(psi));
    Ok(evo)
}
