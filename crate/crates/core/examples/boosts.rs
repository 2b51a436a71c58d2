//! Three-velocities under Lorentz boosts: the chart-transition rule, the
//! closed form, four-velocities on the unit hyperboloid and the free-mass
//! Legendre map onto the mass shell.

use cotangent::kinematics::{
    boost_tangent, four_velocity, hyperboloid_residual, jet_transition, legendre_free_mass, lorentz_boost_velocity,
    mass_shell_residual, JetVelocity,
};
use cotangent::phase_space::{Chart, MetricField, Transition};

fn main() -> cotangent::Result<()> {
    let v = JetVelocity::new(0.0, vec![1.0, 0.0, 0.0], vec![0.6, 0.3, 0.0])?;
    let alpha = 0.8;

    let chart = Chart::standard(4)?.with_transition(Transition::lorentz_boost(4, alpha))?;
    let via_chart = jet_transition(&v, &chart)?;
    let closed = lorentz_boost_velocity(&v, alpha)?;
    println!("boosted velocity (chart):       {:?}", via_chart.v);
    println!("boosted velocity (closed form): {:?}", closed.v);

    let minkowski = MetricField::minkowski(4);
    let u = four_velocity(&v)?;
    println!("four-velocity {:?}", u.qdot);
    println!(
        "hyperboloid residual before/after boost: {:.2e} / {:.2e}",
        hyperboloid_residual(&u, &minkowski)?,
        hyperboloid_residual(&boost_tangent(&u, alpha), &minkowski)?
    );

    let m = 2.0;
    let p = legendre_free_mass(&v, m)?;
    println!("momentum {p:?}, mass-shell residual {:.2e}", mass_shell_residual(&p, m));
    Ok(())
}
