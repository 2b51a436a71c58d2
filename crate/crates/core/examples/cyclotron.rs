//! Charged particle in a uniform magnetic field; the measured revolution
//! period is compared with 2 pi m gamma / (e B).

use std::f64::consts::PI;

use cotangent::dynamics::{integrate, revolution_period, GaugePotential, HamiltonianSystem, IntegratorConfig};
use cotangent::phase_space::PhasePoint;

fn main() -> cotangent::Result<()> {
    let (m, e, b) = (1.0, 1.0, 2.0);
    let pi = 0.5;
    let sys = HamiltonianSystem::charged_em(m, e, GaugePotential::uniform_magnetic(4, b))?;
    let energy = (m * m + pi * pi).sqrt();
    // the potential vanishes at the origin, so canonical and kinetic momenta agree there
    let z0 = PhasePoint::new(vec![0.0; 4], vec![-energy, pi, 0.0, 0.0])?;

    let expected = 2.0 * PI * energy / (e * b);
    let cfg = IntegratorConfig::implicit_midpoint(expected / 2e4).with_record_every(10);
    let rec = integrate(&sys, &z0, &cfg, 1.2 * expected)?;
    let period = revolution_period(&sys, &rec, (1, 2))?;
    println!(
        "period {period:.10}, expected {expected:.10}, relative error {:.2e}",
        (period - expected).abs() / expected
    );
    println!("max |constraint residual| = {:.2e}", rec.max_abs_residual());
    Ok(())
}
