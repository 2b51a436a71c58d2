//! A free Gaussian packet under Crank–Nicolson: the norm is conserved and the
//! width follows sigma(t) = sigma0 sqrt(1 + (t / 2 m sigma0^2)^2).

use cotangent::constraints::{free_hamiltonian, schrodinger_evolve, EvolutionConfig};
use cotangent::quantization::{Boundary, Grid, GridGeometry};
use cotangent::scenario::verify::packet_width;
use cotangent::Complex64;

fn main() -> cotangent::Result<()> {
    let (m, sigma0) = (1.0, 1.0);
    let g = GridGeometry::uniform(&[(-40.0, 40.0)], &[1599], Boundary::DirichletZero)?;
    let psi0 = Grid::half_density(g, move |x| Complex64::new((-x[0] * x[0] / (4.0 * sigma0 * sigma0)).exp(), 0.0));
    let cfg = EvolutionConfig::crank_nicolson(0.01, 200).with_snapshots(100);
    let h = free_hamiltonian(1, m)?;

    let mut psi = psi0;
    let mut t = 0.0;
    for _ in 0..5 {
        let evo = schrodinger_evolve(&h, &psi, &cfg)?;
        for (ts, state) in evo.snapshots.iter().filter(|(ts, _)| *ts > 0.0 || t == 0.0) {
            let time = t + ts;
            let expected = sigma0 * (1.0 + (time / (2.0 * m * sigma0 * sigma0)).powi(2)).sqrt();
            println!("t = {time:4.1}: width {:.5}, expected {expected:.5}", packet_width(&state.psi));
        }
        println!("  norm drift over this leg: {:.2e}", evo.max_drift("norm_sq").unwrap_or(f64::NAN));
        t += cfg.dt * cfg.steps as f64;
        psi = evo.final_state.psi;
    }
    Ok(())
}
