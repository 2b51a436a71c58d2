//! Klein–Gordon plane waves on a periodic ring: measured frequencies against
//! sqrt(k^2 + m^2), and the k^4 / 8 m^3 departure from the non-relativistic
//! dispersion m + k^2 / 2m.

use std::f64::consts::PI;

use cotangent::constraints::{dispersion_check, nonrel_limit_compare, EvolutionConfig};
use cotangent::quantization::{Boundary, GridGeometry};

fn main() -> cotangent::Result<()> {
    let m = 1.0;
    let ring = GridGeometry::uniform(&[(0.0, 20.0 * PI)], &[256], Boundary::Periodic)?;
    let dt = 0.5 * ring.spacing(0);
    let cfg = EvolutionConfig::leapfrog(dt, (20.0 / dt) as usize);
    println!("mode        k   omega measured   sqrt(k^2+m^2)   rel. error");
    for mode in 1..=8 {
        let r = dispersion_check(mode, m, &ring, &cfg)?;
        println!(
            "{mode:>4} {:>8.4} {:>16.8} {:>15.8} {:>12.2e}",
            r.k, r.omega_measured, r.omega_analytic, r.relative_error
        );
    }

    let report = nonrel_limit_compare(&[1, 2, 3, 4], m, &ring, &EvolutionConfig::leapfrog(1e-3, 50_000))?;
    for row in &report.rows {
        println!(
            "k = {:.3}: |omega - (m + k^2/2m)| = {:.3e}, k^4/8m^3 = {:.3e}",
            row.k, row.deviation_measured, row.leading_order
        );
    }
    println!("log-log slope {:.3} (analytic {:.3})", report.slope_measured, report.slope_analytic);
    Ok(())
}
