use cotangent::kinematics::{
    boost_covector, boost_tangent, four_velocity, hyperboloid_residual, jet_transition, lambda_lift,
    legendre_free_mass, lorentz_boost_velocity, mass_shell_residual, on_future_hyperboloid, rho_project, JetVelocity,
};
use cotangent::phase_space::{Chart, MetricField, Transition};
use cotangent::Error;
use proptest::prelude::*;

/// Three-velocities strictly inside the light cone.
fn subluminal() -> impl Strategy<Value = Vec<f64>> {
    (0.0..0.95f64, 0.0..std::f64::consts::PI, 0.0..std::f64::consts::TAU)
        .prop_map(|(s, th, ph)| vec![s * th.cos(), s * th.sin() * ph.cos(), s * th.sin() * ph.sin()])
}

fn jet() -> impl Strategy<Value = JetVelocity> {
    (-2.0..2.0f64, prop::collection::vec(-2.0..2.0f64, 3), subluminal())
        .prop_map(|(t, q, v)| JetVelocity::new(t, q, v).unwrap())
}

/// Relativistic velocity addition for a frame moving with speed `tanh(alpha)` along axis 1.
fn velocity_addition(v: &[f64], alpha: f64) -> Vec<f64> {
    let beta = alpha.tanh();
    let gamma = alpha.cosh();
    let d = 1.0 - beta * v[0];
    vec![(v[0] - beta) / d, v[1] / (gamma * d), v[2] / (gamma * d)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn projection_inverts_lift(v in jet(), scale in 0.1..10.0f64) {
        let back = rho_project(&lambda_lift(&v, scale).unwrap()).unwrap();
        for (a, b) in back.v.iter().zip(&v.v) {
            prop_assert!((a - b).abs() < 1e-15);
        }
        prop_assert_eq!(back.position(), v.position());
    }

    #[test]
    fn four_velocity_is_on_future_hyperboloid(v in jet(), alpha in -2.0..2.0f64) {
        let g = MetricField::minkowski(4);
        let w = four_velocity(&v).unwrap();
        prop_assert!(on_future_hyperboloid(&w, &g, 1e-12).unwrap());
        let boosted = boost_tangent(&w, alpha);
        prop_assert!(hyperboloid_residual(&boosted, &g).unwrap().abs() < 1e-12);
        prop_assert!(boosted.qdot[0] > 0.0);
    }

    #[test]
    fn chart_transition_equals_closed_form_boost(v in jet(), alpha in -2.0..2.0f64) {
        let chart = Chart::standard(4).unwrap().with_transition(Transition::lorentz_boost(4, alpha)).unwrap();
        let via_chart = jet_transition(&v, &chart).unwrap();
        let closed = lorentz_boost_velocity(&v, alpha).unwrap();
        let oracle = velocity_addition(&v.v, alpha);
        for k in 0..3 {
            prop_assert!((via_chart.v[k] - closed.v[k]).abs() < 1e-12);
            prop_assert!((closed.v[k] - oracle[k]).abs() < 1e-12);
        }
        for (a, b) in via_chart.position().iter().zip(closed.position()) {
            prop_assert!((a - b).abs() < 1e-12 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn boosts_compose_additively(v in jet(), a in -1.0..1.0f64, b in -1.0..1.0f64) {
        let twice = lorentz_boost_velocity(&lorentz_boost_velocity(&v, a).unwrap(), b).unwrap();
        let once = lorentz_boost_velocity(&v, a + b).unwrap();
        for k in 0..3 {
            prop_assert!((twice.v[k] - once.v[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn legendre_image_is_on_mass_shell(v in jet(), mass in 0.1..10.0f64) {
        let p = legendre_free_mass(&v, mass).unwrap();
        prop_assert!(mass_shell_residual(&p, mass).abs() < 1e-12 * mass * mass);
        prop_assert!(p[0] < 0.0);
    }

    #[test]
    fn covector_pairing_is_boost_invariant(v in jet(), alpha in -2.0..2.0f64, mass in 0.5..2.0f64) {
        let w = four_velocity(&v).unwrap();
        let p = legendre_free_mass(&v, mass).unwrap();
        let pair = |p: &[f64], u: &[f64]| p.iter().zip(u).map(|(a, b)| a * b).sum::<f64>();
        let before = pair(&p, &w.qdot);
        let after = pair(&boost_covector(&p, alpha), &boost_tangent(&w, alpha).qdot);
        prop_assert!((before - after).abs() < 1e-10 * before.abs());
        prop_assert!((before + mass).abs() < 1e-12 * mass);
    }
}

#[test]
fn rest_frame_has_zero_velocity() {
    let alpha = 0.7f64;
    let moving = JetVelocity::at_origin(vec![alpha.tanh(), 0.0, 0.0]);
    let rest = lorentz_boost_velocity(&moving, alpha).unwrap();
    assert!(rest.v.iter().all(|x| x.abs() < 1e-15));
}

#[test]
fn superluminal_input_is_rejected() {
    let v = JetVelocity::at_origin(vec![0.8, 0.7, 0.0]);
    assert!(matches!(four_velocity(&v), Err(Error::SuperluminalInput { .. })));
    assert!(matches!(legendre_free_mass(&v, 1.0), Err(Error::SuperluminalInput { .. })));
}

#[test]
fn null_time_component_is_a_chart_singularity() {
    let w = lambda_lift(&JetVelocity::at_origin(vec![0.1, 0.0, 0.0]), 1.0).unwrap();
    let mut w = w;
    w.qdot[0] = 0.0;
    assert!(matches!(rho_project(&w), Err(Error::ChartSingularity { .. })));
}
