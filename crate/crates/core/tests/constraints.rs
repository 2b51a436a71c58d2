use std::f64::consts::PI;

use cotangent::constraints::*;
use cotangent::phase_space::{Observable, ScalarField};
use cotangent::poly::Polynomial;
use cotangent::quantization::*;
use cotangent::{Complex64, Error};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn gaussian(geometry: &GridGeometry, centre: f64, sigma: f64, k: f64) -> Grid {
    Grid::half_density(geometry.clone(), move |x| {
        Complex64::from_polar((-(x[0] - centre).powi(2) / (4.0 * sigma * sigma)).exp(), k * x[0])
    })
}

/// Standard deviation of `|psi|^2` on a 1D grid.
fn width(psi: &Grid) -> f64 {
    let g = &psi.geometry;
    let w: Vec<f64> = psi.values.iter().map(|v| v.norm_sqr()).collect();
    let total: f64 = w.iter().sum();
    let x: Vec<f64> = (0..g.len()).map(|j| g.coordinate(0, j)).collect();
    let mean = x.iter().zip(&w).map(|(x, w)| x * w).sum::<f64>() / total;
    (x.iter().zip(&w).map(|(x, w)| (x - mean).powi(2) * w).sum::<f64>() / total).sqrt()
}

fn periodic(min: f64, max: f64, n: usize) -> GridGeometry {
    GridGeometry::uniform(&[(min, max)], &[n], Boundary::Periodic).unwrap()
}

fn zero_hamiltonian(dim: usize) -> QuantumOperator {
    quadratic_operator(move |_| DMatrix::zeros(dim, dim), vec![ScalarField::zero(dim); dim], ScalarField::zero(dim))
        .unwrap()
}

#[test]
fn bicgstab_solves_a_complex_diagonal_system() {
    let d: Vec<Complex64> = (1..=20).map(|j| Complex64::new(j as f64, 0.5)).collect();
    let b: Vec<Complex64> = (0..20).map(|j| Complex64::new(1.0, j as f64)).collect();
    let mut x = vec![Complex64::new(0.0, 0.0); 20];
    let stats = bicgstab(|v| Ok(v.iter().zip(&d).map(|(a, b)| a * b).collect()), &b, &mut x, 1e-13, 100).unwrap();
    assert!(stats.relative_residual <= 1e-13);
    for ((x, b), d) in x.iter().zip(&b).zip(&d) {
        assert!((x - b / d).norm() < 1e-11);
    }
}

#[test]
fn bicgstab_reports_an_exhausted_budget() {
    let b = vec![Complex64::new(1.0, 0.0); 50];
    let mut x = vec![Complex64::new(0.0, 0.0); 50];
    let scale: Vec<f64> = (0..50).map(|j| 10f64.powi(j % 7)).collect();
    let r = bicgstab(|v| Ok(v.iter().zip(&scale).map(|(a, s)| a * *s).collect()), &b, &mut x, 1e-15, 1);
    assert!(matches!(r, Err(Error::LinearSolveDiverged { .. })));
}

#[test]
fn zero_hamiltonian_leaves_the_state_unchanged() {
    let g = periodic(-10.0, 10.0, 128);
    let psi0 = gaussian(&g, 0.5, 1.0, 1.3);
    let evo = schrodinger_evolve(&zero_hamiltonian(1), &psi0, &EvolutionConfig::crank_nicolson(0.1, 50)).unwrap();
    assert_eq!(evo.final_state.psi.values, psi0.values);
}

#[test]
fn free_gaussian_spreads_at_the_analytic_rate() {
    let g = GridGeometry::uniform(&[(-40.0, 40.0)], &[1599], Boundary::DirichletZero).unwrap();
    let (m, sigma0) = (1.0, 1.0);
    let psi0 = gaussian(&g, 0.0, sigma0, 0.0);
    assert!((width(&psi0) - sigma0).abs() < 1e-10);
    let evo = schrodinger_evolve(&free_hamiltonian(1, m).unwrap(), &psi0, &EvolutionConfig::crank_nicolson(0.01, 500))
        .unwrap();
    let t = 5.0;
    let expected = sigma0 * (1.0 + (t / (2.0 * m * sigma0 * sigma0)).powi(2)).sqrt();
    let measured = width(&evo.final_state.psi);
    assert!((measured - expected).abs() / expected < 5e-3, "{measured} vs {expected}");
}

#[test]
fn plane_wave_rotates_at_the_free_frequency() {
    let n = 512;
    let g = periodic(0.0, 2.0 * PI, n);
    let (mode, m) = (3.0, 1.0);
    let psi0 = Grid::half_density(g.clone(), move |x| Complex64::from_polar(1.0, mode * x[0]));
    let (dt, steps) = (1e-3, 500);
    let evo = schrodinger_evolve(&free_hamiltonian(1, m).unwrap(), &psi0, &EvolutionConfig::crank_nicolson(dt, steps))
        .unwrap();
    let ratio = fourier_amplitude(&evo.final_state.psi, 3) / fourier_amplitude(&psi0, 3);
    let omega = -ratio.arg() / (dt * steps as f64);
    let expected = mode * mode / (2.0 * m);
    assert!((omega - expected).abs() / expected < 1e-3, "{omega}");
    assert!((ratio.norm() - 1.0).abs() < 1e-10);
}

#[test]
fn norm_is_conserved_in_a_harmonic_trap() {
    let g = GridGeometry::uniform(&[(-15.0, 15.0)], &[600], Boundary::DirichletZero).unwrap();
    let trap = ScalarField::function(1, |x| 0.5 * x[0] * x[0]);
    let h = charged_hamiltonian(1.0, 1.0, vec![ScalarField::zero(1)], trap).unwrap();
    let psi0 = gaussian(&g, 2.0, 0.7, 0.5);
    let evo = schrodinger_evolve(&h, &psi0, &EvolutionConfig::crank_nicolson(0.01, 1000)).unwrap();
    let drift = evo.max_drift("norm_sq").unwrap();
    assert!(drift < 1e-8, "{drift}");
    assert_eq!(evo.series("norm_sq").unwrap().len(), 1001);
}

#[test]
fn norm_is_conserved_in_a_magnetic_field() {
    let g = GridGeometry::uniform(&[(-8.0, 8.0), (-8.0, 8.0)], &[64, 64], Boundary::DirichletZero).unwrap();
    let b = 0.5;
    let a = vec![
        ScalarField::with_gradient(2, move |x| -b * x[1] / 2.0, move |_| vec![0.0, -b / 2.0]),
        ScalarField::with_gradient(2, move |x| b * x[0] / 2.0, move |_| vec![b / 2.0, 0.0]),
    ];
    let h = charged_hamiltonian(1.0, 1.0, a, ScalarField::zero(2)).unwrap();
    let psi0 = Grid::half_density(g.clone(), |x| {
        Complex64::from_polar((-((x[0] - 1.0).powi(2) + x[1] * x[1]) / 2.0).exp(), 0.8 * x[1])
    });
    let evo = schrodinger_evolve(&h, &psi0, &EvolutionConfig::crank_nicolson(0.02, 200)).unwrap();
    let drift = evo.max_drift("norm_sq").unwrap();
    assert!(drift < 1e-8, "{drift}");
}

#[test]
fn charged_hamiltonian_without_fields_matches_the_free_one() {
    let g = periodic(-12.0, 12.0, 256);
    let psi0 = gaussian(&g, -1.0, 1.2, 0.7);
    let cfg = EvolutionConfig::crank_nicolson(0.01, 200);
    let free = schrodinger_evolve(&free_hamiltonian(1, 2.0).unwrap(), &psi0, &cfg).unwrap();
    let charged = charged_hamiltonian(2.0, 0.7, vec![ScalarField::zero(1)], ScalarField::zero(1)).unwrap();
    let charged = schrodinger_evolve(&charged, &psi0, &cfg).unwrap();
    let diff = free.final_state.psi.sub(&charged.final_state.psi).unwrap().max_abs();
    assert!(diff < 1e-10, "{diff}");
}

#[test]
fn asymmetric_hamiltonian_is_rejected() {
    let g = GridGeometry::uniform(&[(-8.0, 8.0)], &[128], Boundary::DirichletZero).unwrap();
    let xp = Observable::polynomial(1, 1, Polynomial::monomial(1.0, vec![1, 1])).unwrap();
    let h = schrodinger_operator_uncorrected(&xp).unwrap();
    let psi0 = gaussian(&g, 0.3, 1.0, 0.0);
    let r = schrodinger_evolve(&h, &psi0, &EvolutionConfig::crank_nicolson(0.01, 10));
    assert!(matches!(r, Err(Error::NonSymmetricHamiltonian { .. })), "{r:?}");
}

#[test]
fn schrodinger_records_snapshots_and_csv() {
    let g = periodic(-10.0, 10.0, 64);
    let psi0 = gaussian(&g, 0.0, 1.0, 0.0);
    let cfg = EvolutionConfig::crank_nicolson(0.05, 10).with_snapshots(5).with_record_every(2);
    let evo = schrodinger_evolve(&free_hamiltonian(1, 1.0).unwrap(), &psi0, &cfg).unwrap();
    let times: Vec<f64> = evo.snapshots.iter().map(|s| s.0).collect();
    assert_eq!(times.len(), 3);
    assert!((times[2] - 0.5).abs() < 1e-12);
    assert_eq!(evo.times.len(), 6);
    let mut buf = Vec::new();
    evo.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("t,norm_sq\n"));
    assert_eq!(text.lines().count(), 7);
}

fn kg_state(
    g: &GridGeometry,
    f: impl Fn(f64) -> f64 + Send + Sync + Clone + 'static,
    df: impl Fn(f64) -> f64 + Send + Sync + 'static,
) -> WaveState {
    let psi = Grid::half_density(g.clone(), move |x| Complex64::new(f(x[0]), 0.0));
    let psi_t = Grid::half_density(g.clone(), move |x| Complex64::new(-df(x[0]), 0.0));
    WaveState::with_velocity(psi, psi_t).unwrap()
}

/// Max error of a right-moving massless Gaussian after time 20.
fn pulse_error(n: usize, courant: f64) -> f64 {
    let g = periodic(-50.0, 50.0, n);
    let state = kg_state(&g, |x| (-x * x / 2.0).exp(), |x| -x * (-x * x / 2.0).exp());
    let dt = courant * g.spacing(0);
    let steps = (20.0 / dt).round() as usize;
    let evo = klein_gordon_evolve(&state, 0.0, &EvolutionConfig::leapfrog(dt, steps)).unwrap();
    let t = dt * steps as f64;
    (0..n)
        .map(|j| (evo.final_state.psi.values[j].re - (-(g.coordinate(0, j) - t).powi(2) / 2.0).exp()).abs())
        .fold(0.0, f64::max)
}

#[test]
fn massless_pulse_translates_at_unit_speed() {
    let coarse = pulse_error(2048, 0.5);
    let fine = pulse_error(4096, 0.5);
    assert!(fine < 1e-3, "{fine}");
    assert!((coarse / fine).log2() > 1.9, "{coarse} {fine}");
}

#[test]
fn zero_data_stays_zero() {
    let g = periodic(0.0, 10.0, 100);
    let state = kg_state(&g, |_| 0.0, |_| 0.0);
    let evo = klein_gordon_evolve(&state, 1.5, &EvolutionConfig::leapfrog(0.05, 200)).unwrap();
    assert_eq!(evo.final_state.psi.max_abs(), 0.0);
    assert_eq!(evo.final_state.psi_t.unwrap().max_abs(), 0.0);
}

#[test]
fn cfl_violation_is_rejected() {
    let g = periodic(0.0, 10.0, 100);
    let state = kg_state(&g, |x| x.sin(), |_| 0.0);
    let r = klein_gordon_evolve(&state, 1.0, &EvolutionConfig::leapfrog(0.2, 10));
    assert!(matches!(r, Err(Error::CflViolation { ratio, bound }) if (ratio - 2.0).abs() < 1e-12 && bound == 1.0));
}

#[test]
fn missing_velocity_is_a_config_error() {
    let g = periodic(0.0, 10.0, 100);
    let state = WaveState::new(Grid::half_density(g, |_| Complex64::new(1.0, 0.0)));
    assert!(matches!(
        klein_gordon_evolve(&state, 1.0, &EvolutionConfig::leapfrog(0.05, 10)),
        Err(Error::ConfigInvalid { .. })
    ));
}

#[test]
fn leapfrog_energy_has_no_secular_drift() {
    let g = periodic(-20.0, 20.0, 400);
    let dt = 0.5 * g.spacing(0);
    let state = kg_state(&g, |x| (-x * x).exp() * (3.0 * x).cos(), |x| 0.3 * (-x * x).exp());
    let evo = klein_gordon_evolve(&state, 1.0, &EvolutionConfig::leapfrog(dt, 10_000)).unwrap();
    let e = evo.series("energy").unwrap();
    let drift = evo.max_drift("energy").unwrap() / e[0];
    assert!(drift < 1e-10, "{drift}");
    let cont = klein_gordon_energy(&evo.final_state, 1.0).unwrap();
    assert!((cont - e[0]).abs() / e[0] < 1e-2, "{cont} vs {}", e[0]);
}

#[test]
fn dispersion_matches_modes_one_to_eight() {
    let g = periodic(0.0, 20.0 * PI, 256);
    let dt = 0.5 * g.spacing(0);
    let cfg = EvolutionConfig::leapfrog(dt, (20.0 / dt) as usize);
    for mode in 1..=8 {
        let d = dispersion_check(mode, 1.0, &g, &cfg).unwrap();
        assert!(d.relative_error < 1e-2, "mode {mode}: {d:?}");
        assert!((d.omega_measured - d.omega_discrete).abs() / d.omega_discrete < 1e-4, "mode {mode}: {d:?}");
    }
}

#[test]
fn zero_mode_oscillates_at_the_mass() {
    let g = periodic(0.0, 10.0, 64);
    let m = 2.0;
    let mut last = f64::INFINITY;
    for dt in [0.02, 0.01, 0.005] {
        let d = dispersion_check(0, m, &g, &EvolutionConfig::leapfrog(dt, (10.0 / dt) as usize)).unwrap();
        let err = (d.omega_measured - m).abs();
        assert!(err < last / 3.0);
        last = err;
    }
    assert!(last < 1e-4 * m);
}

#[test]
fn short_runs_are_rejected() {
    let g = periodic(0.0, 10.0, 64);
    let r = dispersion_check(1, 1.0, &g, &EvolutionConfig::leapfrog(0.01, 100));
    assert!(matches!(r, Err(Error::InsufficientRunLength(_))));
}

#[test]
fn nonrelativistic_deviation_scales_as_k_to_the_fourth() {
    let g = periodic(0.0, 20.0 * PI, 256);
    let report = nonrel_limit_compare(&[1, 2, 3, 4], 1.0, &g, &EvolutionConfig::leapfrog(1e-3, 50_000)).unwrap();
    let first = &report.rows[0];
    assert!((first.k - 0.1).abs() < 1e-12);
    let ratio = first.deviation_measured / first.leading_order;
    assert!((1.0 / 1.2..=1.2).contains(&ratio), "{ratio}");
    assert!((report.slope_measured - 4.0).abs() < 0.3, "{}", report.slope_measured);
    assert!((report.slope_analytic - 4.0).abs() < 0.3);
}

#[test]
fn nonrelativistic_deviation_vanishes_at_rest() {
    let g = periodic(0.0, 10.0, 32);
    let report = nonrel_limit_compare(&[0], 1.0, &g, &EvolutionConfig::leapfrog(0.01, 1000)).unwrap();
    assert_eq!(report.rows[0].deviation_analytic, 0.0);
    assert_eq!(report.rows[0].leading_order, 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn crank_nicolson_preserves_the_norm(centre in -2.0..2.0f64, sigma in 0.6..1.5f64, k in -2.0..2.0f64) {
        let g = GridGeometry::uniform(&[(-16.0, 16.0)], &[255], Boundary::DirichletZero).unwrap();
        let psi0 = gaussian(&g, centre, sigma, k);
        let cfg = EvolutionConfig::crank_nicolson(0.02, 100);
        let evo = schrodinger_evolve(&free_hamiltonian(1, 1.0).unwrap(), &psi0, &cfg).unwrap();
        let n0 = evo.series("norm_sq").unwrap()[0];
        prop_assert!(evo.max_drift("norm_sq").unwrap() / n0 < cfg.steps as f64 * cfg.solver_tol);
    }

    #[test]
    fn leapfrog_is_linear(a in -2.0..2.0f64, b in -2.0..2.0f64) {
        let g = periodic(0.0, 10.0, 64);
        let cfg = EvolutionConfig::leapfrog(0.05, 40);
        let s1 = kg_state(&g, |x| (x * 0.6).sin(), |x| 0.2 * x.cos());
        let s2 = kg_state(&g, |x| (-(x - 5.0).powi(2)).exp(), |_| 0.0);
        let combo = WaveState::with_velocity(
            s1.psi.scaled(a.into()).add(&s2.psi.scaled(b.into())).unwrap(),
            s1.psi_t.as_ref().unwrap().scaled(a.into()).add(&s2.psi_t.as_ref().unwrap().scaled(b.into())).unwrap(),
        ).unwrap();
        let e1 = klein_gordon_evolve(&s1, 0.8, &cfg).unwrap().final_state.psi;
        let e2 = klein_gordon_evolve(&s2, 0.8, &cfg).unwrap().final_state.psi;
        let ec = klein_gordon_evolve(&combo, 0.8, &cfg).unwrap().final_state.psi;
        let expect = e1.scaled(a.into()).add(&e2.scaled(b.into())).unwrap();
        prop_assert!(ec.sub(&expect).unwrap().max_abs() < 1e-12);
    }
}
