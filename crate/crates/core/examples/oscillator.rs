//! Non-relativistic harmonic oscillator as the constraint p_0 + H = 0 on T*Q;
//! the lifted flow conserves H and reproduces the analytic solution.

use cotangent::dynamics::{integrate, HamiltonianSystem, IntegratorConfig};
use cotangent::phase_space::VerticalPhasePoint;

fn main() -> cotangent::Result<()> {
    let omega = 2.0;
    let sys = HamiltonianSystem::nonrel_oscillator(1, omega)?;
    let z0 = sys.lift_on_shell(&VerticalPhasePoint::new(0.0, vec![1.0], vec![0.0])?)?;
    let rec = integrate(&sys, &z0, &IntegratorConfig::implicit_midpoint(1e-3).with_record_every(1000), 5.0)?;
    for z in &rec.states {
        let t = z.q[0];
        println!("t = {t:.1}: q = {:+.6}, analytic {:+.6}", z.q[1], (omega * t).cos());
    }
    let h = &rec.conserved["hamiltonian"];
    let drift = h.iter().map(|x| (x - h[0]).abs()).fold(0.0, f64::max);
    println!("energy drift {drift:.2e}, max |constraint residual| {:.2e}", rec.max_abs_residual());
    Ok(())
}
