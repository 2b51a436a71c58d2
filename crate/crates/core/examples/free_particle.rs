//! A free relativistic particle integrated on the mass shell: momenta stay
//! constant and the three-velocity is p / E.

use cotangent::dynamics::{integrate, HamiltonianSystem, IntegratorConfig};
use cotangent::phase_space::PhasePoint;

fn main() -> cotangent::Result<()> {
    let m = 1.0;
    let p = [0.6, -0.2, 0.4];
    let energy = (m * m + p.iter().map(|x| x * x).sum::<f64>()).sqrt();
    let sys = HamiltonianSystem::free_special(4, m)?;
    let z0 = PhasePoint::new(vec![0.0; 4], vec![-energy, p[0], p[1], p[2]])?;

    let rec = integrate(&sys, &z0, &IntegratorConfig::implicit_midpoint(0.05).with_record_every(20), 10.0)?;
    let last = rec.last().expect("non-empty trajectory");
    let t = last.q[0];
    println!("coordinate time reached: {t:.4}");
    for i in 0..3 {
        println!("v^{} = {:.12} (p/E = {:.12})", i + 1, last.q[i + 1] / t, p[i] / energy);
    }
    println!("max |constraint residual| = {:.2e}", rec.max_abs_residual());
    Ok(())
}
