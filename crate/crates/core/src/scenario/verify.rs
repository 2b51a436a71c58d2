//! Named verification checks. Each `criterion_*` function measures one group
//! of properties and returns it as a single [`Check`] with one part per
//! measurement; [`full_verify`] runs all of them.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::report::{Bound, Check};
use crate::constraints::{
    dispersion_check, free_hamiltonian, nonrel_limit_compare, schrodinger_evolve, EvolutionConfig,
};
use crate::dynamics::{
    integrate, rel_vector_field, revolution_period, rq10_residual, GaugePotential, HamiltonianSystem, IntegratorConfig,
};
use crate::error::Result;
use crate::kinematics::{
    boost_tangent, four_velocity, hyperboloid_residual, jet_transition, lambda_lift, legendre_free_mass,
    lorentz_boost_velocity, mass_shell_residual, rho_project, JetVelocity,
};
use crate::phase_space::{
    affine_bracket, bracket_observable, jacobi_residual, poisson_bracket_t, poisson_bracket_v, pullback_zeta, Chart,
    MetricField, Observable, PhasePoint, ScalarField, Transition,
};
use crate::poly::Polynomial;
use crate::quantization::{
    commutator_residual, half_density_transform, hermiticity_residual, norm, prequantum_commutator_residual,
    prequantum_operator, schrodinger_operator, schrodinger_operator_uncorrected, Boundary, Grid, GridGeometry, Stencil,
};
use crate::Complex64;

/// Number of random samples per property.
pub const SAMPLES: usize = 100;

fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

fn uniform(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(lo..hi)).collect()
}

fn worst<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    xs.into_iter().fold(0.0, |m, x| if x.is_nan() || m.is_nan() { f64::NAN } else { m.max(x) })
}

fn fit_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// Slope of `log y` against `log x`.
fn loglog(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    fit_slope(&lx, &ly)
}

fn part(name: &str, topic: &str, f: impl FnOnce() -> Result<Check>) -> Check {
    Check::from_result(name, topic, f())
}

fn random_polynomial_observable(rng: &mut ChaCha8Rng, nq: usize, np: usize, degree: u32) -> Result<Observable> {
    Observable::polynomial(nq, np, Polynomial::random(rng, nq + np, degree, 0.5))
}

fn random_affine(rng: &mut ChaCha8Rng, n: usize, degree: u32) -> Result<Observable> {
    let a = (0..n).map(|_| ScalarField::Polynomial(Polynomial::random(rng, n, degree, 0.7))).collect();
    Observable::affine(a, ScalarField::Polynomial(Polynomial::random(rng, n, degree, 0.7)))
}

fn random_point(rng: &mut ChaCha8Rng, nq: usize, np: usize) -> Result<PhasePoint> {
    PhasePoint::new(uniform(rng, nq, -1.0, 1.0), uniform(rng, np, -1.0, 1.0))
}

const POISSON: &str = "canonical Poisson bracket on T*Q and V*Q";

/// Antisymmetry, Leibniz rule and Jacobi identity on random polynomial
/// triples, and the pull-back along `T*Q -> V*Q` as a bracket morphism.
pub fn criterion_poisson_algebra(seed: u64) -> Check {
    let mut r = rng(seed, 1);
    let algebra = (|| -> Result<(f64, f64, f64)> {
        let (mut anti, mut leib, mut jac) = (0.0f64, 0.0f64, 0.0f64);
        for _ in 0..SAMPLES {
            let f = random_polynomial_observable(&mut r, 2, 2, 3)?;
            let g = random_polynomial_observable(&mut r, 2, 2, 3)?;
            let h = random_polynomial_observable(&mut r, 2, 2, 3)?;
            let z = random_point(&mut r, 2, 2)?;
            anti = anti.max((poisson_bracket_t(&f, &g, &z)? + poisson_bracket_t(&g, &f, &z)?).abs());
            let gh = g.product(&h)?;
            let lhs = poisson_bracket_t(&f, &gh, &z)?;
            let rhs = poisson_bracket_t(&f, &g, &z)? * h.at(&z)? + g.at(&z)? * poisson_bracket_t(&f, &h, &z)?;
            leib = leib.max((lhs - rhs).abs());
            jac = jac.max(jacobi_residual(&f, &g, &h, &z)?);
        }
        Ok((anti, leib, jac))
    })();
    let mut parts = match algebra {
        Ok((a, l, j)) => vec![
            Check::new("antisymmetry residual", POISSON, a, Bound::below(1e-10)),
            Check::new("Leibniz residual", POISSON, l, Bound::below(1e-10)),
            Check::new("Jacobi residual", POISSON, j, Bound::below(1e-10)),
        ],
        Err(e) => vec![Check::failed("bracket identities", POISSON, e.to_string())],
    };
    parts.push(part("pull-back morphism residual", "T*Q -> V*Q pull-back", || {
        let mut m = 0.0f64;
        for _ in 0..SAMPLES {
            let f = random_polynomial_observable(&mut r, 3, 2, 3)?;
            let g = random_polynomial_observable(&mut r, 3, 2, 3)?;
            let z = random_point(&mut r, 3, 3)?;
            let on_t = poisson_bracket_t(&pullback_zeta(&f)?, &pullback_zeta(&g)?, &z)?;
            let on_v = poisson_bracket_v(&f, &g, &z.zeta())?;
            let pulled = pullback_zeta(&bracket_observable(&f, &g)?)?.at(&z)?;
            m = m.max((on_t - on_v).abs()).max((pulled - on_v).abs());
        }
        Ok(Check::new("pull-back morphism residual", "T*Q -> V*Q pull-back", m, Bound::below(1e-12)))
    }));
    Check::group("poisson-algebra", POISSON, parts)
}

const AFFINE: &str = "affine-in-momenta observables";

/// Closed-form affine brackets against the general bracket, and the
/// canonical relations.
pub fn criterion_affine_closure(seed: u64) -> Check {
    let mut r = rng(seed, 2);
    let closure = part("affine bracket vs general bracket", AFFINE, || {
        let mut m = 0.0f64;
        for _ in 0..SAMPLES {
            let f = random_affine(&mut r, 3, 2)?;
            let g = random_affine(&mut r, 3, 2)?;
            let z = random_point(&mut r, 3, 3)?;
            m = m.max((affine_bracket(&f, &g)?.at(&z)? - poisson_bracket_t(&f, &g, &z)?).abs());
        }
        Ok(Check::new("affine bracket vs general bracket", AFFINE, m, Bound::below(1e-12)))
    });
    let canonical = part("canonical relations {p_k, q^j} - delta", AFFINE, || {
        let n = 4;
        let z = random_point(&mut r, n, n)?;
        let mut m = 0.0f64;
        for k in 0..n {
            for j in 0..n {
                let b = poisson_bracket_t(&Observable::momentum(n, n, k)?, &Observable::coordinate(n, n, j)?, &z)?;
                m = m.max((b - if j == k { 1.0 } else { 0.0 }).abs());
            }
        }
        Ok(Check::new("canonical relations {p_k, q^j} - delta", AFFINE, m, Bound::below(0.0)))
    });
    Check::group("affine-closure", AFFINE, vec![closure, canonical])
}

const KINEMATICS: &str = "relativistic velocities and boosts";

fn random_velocity(r: &mut ChaCha8Rng) -> Result<JetVelocity> {
    // direction uniform on the cube, speed below 0.95
    let dir = uniform(r, 3, -1.0, 1.0);
    let len = dir.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-3);
    let speed = r.random_range(0.0..0.95);
    JetVelocity::new(r.random_range(-2.0..2.0), uniform(r, 3, -2.0, 2.0), dir.iter().map(|x| speed * x / len).collect())
}

fn jet_distance(a: &JetVelocity, b: &JetVelocity) -> f64 {
    let pos = a.position().iter().zip(b.position()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let vel = a.v.iter().zip(&b.v).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    pos.max(vel)
}

/// Lift/projection, boosts on the hyperboloid, chart transition against the
/// closed-form boost, and the free-mass Legendre map.
pub fn criterion_kinematics(seed: u64) -> Check {
    let mut r = rng(seed, 3);
    let eta = MetricField::minkowski(4);
    let measured = (|| -> Result<[f64; 4]> {
        let mut m = [0.0f64; 4];
        for _ in 0..SAMPLES {
            let v = random_velocity(&mut r)?;
            let scale = r.random_range(0.1..5.0);
            m[0] = m[0].max(jet_distance(&rho_project(&lambda_lift(&v, scale)?)?, &v));

            let alpha = r.random_range(-1.5..1.5);
            let w = boost_tangent(&four_velocity(&v)?, alpha);
            m[1] = m[1].max(hyperboloid_residual(&w, &eta)?.abs());

            let chart = Chart::standard(4)?.with_transition(Transition::lorentz_boost(4, alpha))?;
            m[2] = m[2].max(jet_distance(&jet_transition(&v, &chart)?, &lorentz_boost_velocity(&v, alpha)?));

            let mass: f64 = r.random_range(0.1..10.0);
            m[3] = m[3].max(mass_shell_residual(&legendre_free_mass(&v, mass)?, mass).abs() / (mass * mass));
        }
        Ok(m)
    })();
    let parts = match measured {
        Ok(m) => vec![
            Check::new("projection after lift minus identity", KINEMATICS, m[0], Bound::below(1e-12)),
            Check::new("boosted hyperboloid residual", KINEMATICS, m[1], Bound::below(1e-12)),
            Check::new("chart transition vs closed-form boost", KINEMATICS, m[2], Bound::below(1e-12)),
            Check::new("Legendre image mass-shell residual / m^2", KINEMATICS, m[3], Bound::below(1e-12)),
        ],
        Err(e) => vec![Check::failed("kinematics samples", KINEMATICS, e.to_string())],
    };
    Check::group("kinematics", KINEMATICS, parts)
}

const DYNAMICS: &str = "constrained classical flows";

fn free_state(m: f64, q: [f64; 4], p: [f64; 3]) -> Result<PhasePoint> {
    let p0 = -(m * m + p.iter().map(|x| x * x).sum::<f64>()).sqrt();
    PhasePoint::new(q.to_vec(), vec![p0, p[0], p[1], p[2]])
}

/// The weak-field system used by the curved checks.
pub fn weak_field_system() -> Result<HamiltonianSystem> {
    HamiltonianSystem::curved_metric(1.3, MetricField::weak_field(4, 0.05, 1.0))
}

/// On-shell state of a diagonal-metric system for given spatial momenta.
pub fn diagonal_metric_state(sys: &HamiltonianSystem, m: f64, q: [f64; 4], p: [f64; 3]) -> Result<PhasePoint> {
    let HamiltonianSystem::Relativistic { metric, .. } = sys else {
        return Err(crate::Error::dims("expected a relativistic system"));
    };
    let g = metric.inverse_at(&q);
    let spatial: f64 = (0..3).map(|i| g[(i + 1, i + 1)] * p[i] * p[i]).sum();
    let p0 = -((m * m - spatial) / g[(0, 0)]).sqrt();
    PhasePoint::new(q.to_vec(), vec![p0, p[0], p[1], p[2]])
}

/// Constant momenta and three-velocity of the free mass, cyclotron period,
/// mass-shell drift of implicit midpoint, RK4 convergence order.
pub fn criterion_classical_dynamics(_seed: u64) -> Check {
    let free = part("free momentum change and three-velocity error", DYNAMICS, || {
        let m = 1.4;
        let sys = HamiltonianSystem::free_special(4, m)?;
        let p = [0.6, -0.3, 0.9];
        let z0 = free_state(m, [0.0, 1.0, 2.0, 3.0], p)?;
        let rec = integrate(&sys, &z0, &IntegratorConfig::implicit_midpoint(1e-2), 5.0)?;
        let energy = (m * m + p.iter().map(|x| x * x).sum::<f64>()).sqrt();
        let mut err = 0.0f64;
        for z in &rec.states {
            err = err.max(worst(z.p.iter().zip(&z0.p).map(|(a, b)| (a - b).abs())));
            let f = rel_vector_field(&sys, z)?;
            for i in 0..3 {
                err = err.max((f.dq[i + 1] / f.dq[0] - p[i] / energy).abs());
            }
            if z.q[0] != z0.q[0] {
                for i in 0..3 {
                    err = err.max(((z.q[i + 1] - z0.q[i + 1]) / (z.q[0] - z0.q[0]) - p[i] / energy).abs());
                }
            }
        }
        Ok(Check::new("free momentum change and three-velocity error", DYNAMICS, err, Bound::below(1e-12)))
    });
    let cyclotron = part("cyclotron period relative error", DYNAMICS, || {
        let (m, e, b) = (1.0, 1.0, 2.0);
        let pi = [0.5, 0.0, 0.0];
        let sys = HamiltonianSystem::charged_em(m, e, GaugePotential::uniform_magnetic(4, b))?;
        let z0 = free_state(m, [0.0; 4], pi)?;
        let gamma = (1.0 + (pi[0] / m).powi(2)).sqrt();
        let oracle = 2.0 * PI * m * gamma / (e * b);
        let proper = 2.0 * PI * m / (e * b);
        let rec = integrate(&sys, &z0, &IntegratorConfig::implicit_midpoint(proper / 2e4), 1.1 * proper)?;
        let period = revolution_period(&sys, &rec, (1, 2))?;
        Ok(Check::new(
            "cyclotron period relative error",
            DYNAMICS,
            ((period - oracle) / oracle).abs(),
            Bound::below(1e-6),
        ))
    });
    let drift = part("implicit midpoint mass-shell drift", DYNAMICS, || {
        let cfg = IntegratorConfig::implicit_midpoint(1e-3).with_record_every(100);
        let free = HamiltonianSystem::free_special(4, 1.0)?;
        let charged = HamiltonianSystem::charged_em(1.0, 1.0, GaugePotential::uniform_magnetic(4, 1.5))?;
        let curved = weak_field_system()?;
        let zc = diagonal_metric_state(&curved, 1.3, [0.0, 2.0, 0.0, 0.0], [0.0, 0.3, 0.05])?;
        let cases = [
            ("free", free, free_state(1.0, [0.0; 4], [0.3, 0.3, 0.3])?),
            ("charged", charged, free_state(1.0, [0.0; 4], [0.4, 0.2, 0.1])?),
            ("curved", curved, zc),
        ];
        let mut parts = Vec::new();
        for (name, sys, z0) in cases {
            let rec = integrate(&sys, &z0, &cfg, 10.0)?;
            parts.push(Check::new(
                format!("{name}: max |residual| over 1e4 steps"),
                DYNAMICS,
                rec.max_abs_residual(),
                Bound::below(1e-8),
            ));
        }
        Ok(Check::group("implicit midpoint mass-shell drift", DYNAMICS, parts))
    });
    let order = part("RK4 residual convergence order", DYNAMICS, || {
        let curved = weak_field_system()?;
        let z0 = diagonal_metric_state(&curved, 1.3, [0.0, 1.5, 0.0, 0.0], [0.0, 0.4, 0.1])?;
        let steps = [0.4, 0.2, 0.1, 0.05];
        let errs = steps
            .iter()
            .map(|&h| {
                let rec = integrate(&curved, &z0, &IntegratorConfig::rk4(h), 8.0)?;
                Ok(rec.constraint_residuals.last().copied().unwrap_or(f64::NAN).abs())
            })
            .collect::<Result<Vec<f64>>>()?;
        let slope = loglog(&steps, &errs);
        Ok(Check::new("RK4 residual convergence order", DYNAMICS, slope, Bound::within(4.0, 0.2))
            .with_note(format!("residuals {:?}", errs.iter().map(|e| format!("{e:.3e}")).collect::<Vec<_>>())))
    });
    Check::group("classical-dynamics", DYNAMICS, vec![free, cyclotron, drift, order])
}

const RQ10: &str = "preservation of the relativistic constraint";

/// `{H, g dH dH}` at random on-shell points of every built-in relativistic system.
pub fn criterion_constraint_preservation(seed: u64) -> Check {
    let mut r = rng(seed, 5);
    let flat =
        |name: &str, sys: HamiltonianSystem, m: f64, e: f64, potential: Option<GaugePotential>, r: &mut ChaCha8Rng| {
            part(name, RQ10, || {
                let mut worst_res = 0.0f64;
                for _ in 0..SAMPLES {
                    let q = uniform(r, 4, -2.0, 2.0);
                    let pi = uniform(r, 3, -2.0, 2.0);
                    let pi0 = -(m * m + pi.iter().map(|x| x * x).sum::<f64>()).sqrt();
                    let a = potential.as_ref().map(|g| g.value(&q)).unwrap_or_else(|| vec![0.0; 4]);
                    let p: Vec<f64> = [pi0, pi[0], pi[1], pi[2]].iter().zip(&a).map(|(k, a)| k + e * a).collect();
                    worst_res = worst_res.max(rq10_residual(&sys, &PhasePoint::new(q, p)?)?.abs());
                }
                Ok(Check::new(name, RQ10, worst_res, Bound::below(1e-10)))
            })
        };
    let mut parts = Vec::new();
    let (m, e) = (1.3, 0.7);
    parts.push(match HamiltonianSystem::free_special(4, m) {
        Ok(s) => flat("free mass", s, m, 0.0, None, &mut r),
        Err(err) => Check::failed("free mass", RQ10, err.to_string()),
    });
    for (name, pot) in [
        ("uniform magnetic field", GaugePotential::uniform_magnetic(4, 1.5)),
        ("uniform electric field", GaugePotential::uniform_electric(4, 0.8)),
    ] {
        parts.push(match HamiltonianSystem::charged_em(m, e, pot.clone()) {
            Ok(s) => flat(name, s, m, e, Some(pot), &mut r),
            Err(err) => Check::failed(name, RQ10, err.to_string()),
        });
    }
    parts.push(part("weak-field metric (finite differences)", RQ10, || {
        let sys = weak_field_system()?;
        let mut m = 0.0f64;
        for _ in 0..SAMPLES {
            let q = uniform(&mut r, 4, -2.0, 2.0);
            let p = uniform(&mut r, 3, -2.0, 2.0);
            let z = diagonal_metric_state(&sys, 1.3, [q[0], q[1], q[2], q[3]], [p[0], p[1], p[2]])?;
            m = m.max(rq10_residual(&sys, &z)?.abs());
        }
        Ok(Check::new("weak-field metric (finite differences)", RQ10, m, Bound::below(1e-6)))
    }));
    Check::group("constraint-preservation", RQ10, parts)
}

const PREQUANTUM: &str = "prequantization";

fn max_masked(a: &[Complex64], b: &[Complex64], mask: &[bool]) -> f64 {
    a.iter().zip(b).zip(mask).filter(|(_, &m)| m).map(|((x, y), _)| (x - y).norm()).fold(0.0, f64::max)
}

/// The `p`, `q`, `1` table on a quadratic probe and the Dirac condition for
/// the canonical pair.
pub fn criterion_prequantization(_seed: u64) -> Check {
    let table = part("p, q, 1 operator table", PREQUANTUM, || {
        let i = Complex64::new(0.0, 1.0);
        let c = Complex64::new;
        let g = GridGeometry::uniform(&[(-2.0, 2.0), (-3.0, 3.0)], &[21, 31], Boundary::DirichletZero)?;
        let s = Grid::phase_section(g.clone(), 1, 1, |z| c(z[0] * z[0] + 2.0 * z[0] * z[1], z[1] * z[1] - z[0]))?;
        let interior = g.interior_mask(1);
        let p_hat = prequantum_operator(&Observable::momentum(1, 1, 0)?)?.apply(&s)?;
        let p_exp: Vec<Complex64> = g.points().map(|z| -i * c(2.0 * z[0] + 2.0 * z[1], -1.0)).collect();
        let q_hat = prequantum_operator(&Observable::coordinate(1, 1, 0)?)?.apply(&s)?;
        let q_exp: Vec<Complex64> =
            g.points().zip(&s.values).map(|(z, sv)| i * c(2.0 * z[0], 2.0 * z[1]) + z[0] * sv).collect();
        let one = prequantum_operator(&Observable::constant(1, 1, 1.0)?)?.apply(&s)?;
        let err = max_masked(&p_hat.values, &p_exp, &interior)
            .max(max_masked(&q_hat.values, &q_exp, &interior))
            .max(max_masked(&one.values, &s.values, &interior));
        Ok(Check::new("p, q, 1 operator table", PREQUANTUM, err, Bound::below(1e-12)))
    });
    let dirac = part("Dirac residual for (q, p)", PREQUANTUM, || {
        let g = GridGeometry::uniform(&[(-12.0, 12.0), (-12.0, 12.0)], &[96, 96], Boundary::Periodic)?;
        let probes = [(0.0, 0.0, 1.0), (0.5, -1.0, 1.3)]
            .iter()
            .map(|&(a, b, w)| {
                Grid::phase_section(g.clone(), 1, 1, move |z| {
                    Complex64::from_polar(
                        (-((z[0] - a).powi(2) + (z[1] - b).powi(2)) / (2.0 * w * w)).exp(),
                        z[0] - 0.5 * z[1],
                    )
                })
            })
            .collect::<Result<Vec<Grid>>>()?;
        let q = Observable::coordinate(1, 1, 0)?;
        let p = Observable::momentum(1, 1, 0)?;
        let res = prequantum_commutator_residual(&q, &p, &probes, Stencil::Spectral)?
            .max(prequantum_commutator_residual(&p, &q, &probes, Stencil::Spectral)?);
        Ok(Check::new("Dirac residual for (q, p)", PREQUANTUM, res, Bound::below(1e-10)))
    });
    Check::group("prequantization", PREQUANTUM, vec![table, dirac])
}

const SCHRODINGER: &str = "Schrödinger representation on half-densities";

fn packet(g: &GridGeometry, centre: &[f64], sigma: f64, k: &[f64]) -> Grid {
    let (centre, k) = (centre.to_vec(), k.to_vec());
    Grid::half_density(g.clone(), move |x| {
        let r2: f64 = x.iter().zip(&centre).map(|(a, b)| (a - b).powi(2)).sum();
        let phase: f64 = x.iter().zip(&k).map(|(a, b)| a * b).sum();
        Complex64::from_polar((-r2 / (2.0 * sigma * sigma)).exp(), phase)
    })
}

fn x_times_p() -> Result<Observable> {
    Observable::affine(vec![ScalarField::coordinate(1, 0)], ScalarField::zero(1))
}

/// Convergence of `[f^, g^] + i {f,g}^` for random affine pairs, exactness for
/// constant coefficients, symmetry of corrected operators and the
/// uncorrected negative control.
pub fn criterion_schrodinger_representation(seed: u64) -> Check {
    let mut r = rng(seed, 7);
    let pairs = part("random affine pairs: slowest convergence order", SCHRODINGER, || {
        let sizes = [32usize, 64, 128];
        let hs: Vec<f64> = sizes.iter().map(|&n| 10.0 / (n + 1) as f64).collect();
        let geos = sizes
            .iter()
            .map(|&n| GridGeometry::uniform(&[(-5.0, 5.0), (-5.0, 5.0)], &[n, n], Boundary::DirichletZero))
            .collect::<Result<Vec<_>>>()?;
        let mut slowest = f64::INFINITY;
        let mut monotone = true;
        for _ in 0..20 {
            let (f, g) = (random_affine(&mut r, 2, 2)?, random_affine(&mut r, 2, 2)?);
            let res = geos
                .iter()
                .map(|geo| {
                    commutator_residual(&f, &g, &[packet(geo, &[0.2, -0.3], 0.8, &[0.5, 0.0])], Stencil::Central)
                })
                .collect::<Result<Vec<f64>>>()?;
            monotone &= res[0] > res[1] && res[1] > res[2];
            slowest = slowest.min(loglog(&hs, &res));
        }
        let c =
            Check::new("random affine pairs: slowest convergence order", SCHRODINGER, slowest, Bound::at_least(1.9));
        Ok(if monotone { c } else { Check { passed: false, ..c }.with_note("residual did not decrease") })
    });
    let constant = part("constant-coefficient pair residual", SCHRODINGER, || {
        let g = GridGeometry::uniform(&[(-6.0, 6.0), (-6.0, 6.0)], &[40, 48], Boundary::DirichletZero)?;
        let probes = [packet(&g, &[0.0, 0.5], 1.0, &[0.3, -0.2])];
        let c = |v: f64| ScalarField::constant(2, v);
        let f = Observable::affine(vec![c(0.7), c(-1.2)], c(0.4))?;
        let h = Observable::affine(vec![c(2.0), c(0.3)], c(-3.0))?;
        let res = commutator_residual(&f, &h, &probes, Stencil::Central)?;
        Ok(Check::new("constant-coefficient pair residual", SCHRODINGER, res, Bound::below(1e-10)))
    });
    let dirichlet = |n: usize| GridGeometry::uniform(&[(-8.0, 8.0)], &[n], Boundary::DirichletZero);
    let probes = |g: &GridGeometry| {
        vec![packet(g, &[0.0], 0.9, &[1.0]), packet(g, &[0.7], 1.2, &[-0.4]), packet(g, &[-1.0], 0.7, &[0.0])]
    };
    let symmetry = part("hermiticity defect convergence order", SCHRODINGER, || {
        let wavy = Observable::affine(
            vec![ScalarField::with_gradient(1, |x| 1.0 + 0.5 * x[0].sin(), |x| vec![0.5 * x[0].cos()])],
            ScalarField::coordinate(1, 0),
        )?;
        let op = schrodinger_operator(&wavy)?;
        let sizes = [64usize, 128, 256, 512];
        let res =
            sizes.iter().map(|&n| hermiticity_residual(&op, &probes(&dirichlet(n)?))).collect::<Result<Vec<f64>>>()?;
        let hs: Vec<f64> = sizes.iter().map(|&n| 16.0 / (n + 1) as f64).collect();
        Ok(Check::new("hermiticity defect convergence order", SCHRODINGER, loglog(&hs, &res), Bound::at_least(1.8)))
    });
    let control = part("uncorrected x p hermiticity defect", SCHRODINGER, || {
        let g = dirichlet(256)?;
        let bad = hermiticity_residual(&schrodinger_operator_uncorrected(&x_times_p()?)?, &probes(&g))?;
        Ok(Check::new("uncorrected x p hermiticity defect", SCHRODINGER, bad, Bound::at_least(1e-3)))
    });
    Check::group("schrodinger-representation", SCHRODINGER, vec![pairs, constant, symmetry, control])
}

const HALF_DENSITY: &str = "half-densities under coordinate changes";

/// Norm invariance of half-densities under a dilation and a cubic map.
pub fn criterion_half_densities(_seed: u64) -> Check {
    let measured = (|| -> Result<(f64, f64)> {
        let g = GridGeometry::uniform(&[(-6.0, 6.0)], &[1024], Boundary::DirichletZero)?;
        let rho = packet(&g, &[0.4], 0.9, &[1.5]);
        let n0 = norm(&rho);
        let dilation = Transition::affine(DMatrix::from_element(1, 1, 2.0), vec![0.0])?;
        let wide = GridGeometry::uniform(&[(-12.0, 12.0)], &[1024], Boundary::DirichletZero)?;
        let d = (norm(&half_density_transform(&rho, &dilation, &wide)?) - n0).abs() / n0;
        let cubic = Transition::new(
            1,
            |q: &[f64]| vec![q[0] + 0.1 * q[0].powi(3)],
            |q: &[f64]| DMatrix::from_element(1, 1, 1.0 + 0.3 * q[0] * q[0]),
        );
        let image = GridGeometry::uniform(&[(-27.6, 27.6)], &[1024], Boundary::DirichletZero)?;
        let c = (norm(&half_density_transform(&rho, &cubic, &image)?) - n0).abs() / n0;
        Ok((d, c))
    })();
    let parts = match measured {
        Ok((d, c)) => vec![
            Check::new("relative norm change under dilation", HALF_DENSITY, d, Bound::below(1e-6)),
            Check::new("relative norm change under cubic map", HALF_DENSITY, c, Bound::below(1e-4)),
        ],
        Err(e) => vec![Check::failed("half-density transforms", HALF_DENSITY, e.to_string())],
    };
    Check::group("half-densities", HALF_DENSITY, parts)
}

const QUANTUM: &str = "Schrödinger and Klein–Gordon quantum constraints";

/// Standard deviation of `|psi|^2` on a 1D grid.
pub fn packet_width(psi: &Grid) -> f64 {
    let g = &psi.geometry;
    let w: Vec<f64> = psi.values.iter().map(|v| v.norm_sqr()).collect();
    let total: f64 = w.iter().sum();
    let x: Vec<f64> = (0..g.len()).map(|j| g.coordinate(0, j)).collect();
    let mean = x.iter().zip(&w).map(|(x, w)| x * w).sum::<f64>() / total;
    (x.iter().zip(&w).map(|(x, w)| (x - mean).powi(2) * w).sum::<f64>() / total).sqrt()
}

/// Norm drift and spreading of Crank–Nicolson, Klein–Gordon dispersion and
/// the non-relativistic limit of the dispersion relation.
pub fn criterion_quantum_constraints(_seed: u64) -> Check {
    let spreading = (|| -> Result<(f64, f64)> {
        let g = GridGeometry::uniform(&[(-40.0, 40.0)], &[1599], Boundary::DirichletZero)?;
        let (m, sigma0) = (1.0, 1.0);
        let psi0 = Grid::half_density(g, move |x| Complex64::new((-x[0] * x[0] / (4.0 * sigma0 * sigma0)).exp(), 0.0));
        let evo = schrodinger_evolve(&free_hamiltonian(1, m)?, &psi0, &EvolutionConfig::crank_nicolson(0.01, 1000))?;
        let drift = evo.max_drift("norm_sq").unwrap_or(f64::NAN);
        let t = 10.0;
        let expected = sigma0 * (1.0 + (t / (2.0 * m * sigma0 * sigma0)).powi(2)).sqrt();
        Ok((drift, (packet_width(&evo.final_state.psi) - expected).abs() / expected))
    })();
    let mut parts = match spreading {
        Ok((drift, width)) => vec![
            Check::new("Crank–Nicolson norm drift over 1e3 steps", QUANTUM, drift, Bound::below(1e-8)),
            Check::new("free Gaussian width relative error", QUANTUM, width, Bound::below(5e-3)),
        ],
        Err(e) => vec![Check::failed("Crank–Nicolson run", QUANTUM, e.to_string())],
    };
    let ring = || GridGeometry::uniform(&[(0.0, 20.0 * PI)], &[256], Boundary::Periodic);
    parts.push(part("Klein–Gordon dispersion, modes 1-8", QUANTUM, || {
        let g = ring()?;
        let dt = 0.5 * g.spacing(0);
        let cfg = EvolutionConfig::leapfrog(dt, (20.0 / dt) as usize);
        let mut m = 0.0f64;
        for mode in 1..=8 {
            m = m.max(dispersion_check(mode, 1.0, &g, &cfg)?.relative_error);
        }
        Ok(Check::new("Klein–Gordon dispersion, modes 1-8", QUANTUM, m, Bound::below(1e-2)))
    }));
    parts.push(part("non-relativistic deviation slope", QUANTUM, || {
        let g = ring()?;
        let report = nonrel_limit_compare(&[1, 2, 3, 4], 1.0, &g, &EvolutionConfig::leapfrog(1e-3, 50_000))?;
        let ratio = report.rows[0].deviation_measured / report.rows[0].leading_order;
        Ok(Check::new("non-relativistic deviation slope", QUANTUM, report.slope_measured, Bound::within(4.0, 0.3))
            .with_note(format!("deviation / (k^4/8m^3) at k/m = 0.1: {ratio:.4}")))
    }));
    Check::group("quantum-constraints", QUANTUM, parts)
}

type Criterion = fn(u64) -> Check;

/// Criteria one to nine, in report order.
pub const CRITERIA: [Criterion; 9] = [
    criterion_poisson_algebra,
    criterion_affine_closure,
    criterion_kinematics,
    criterion_classical_dynamics,
    criterion_constraint_preservation,
    criterion_prequantization,
    criterion_schrodinger_representation,
    criterion_half_densities,
    criterion_quantum_constraints,
];

/// Runs `criteria` concurrently; the result keeps the input order.
pub fn run_concurrently(criteria: &[Criterion], seed: u64) -> Vec<Check> {
    std::thread::scope(|s| {
        let handles: Vec<_> = criteria.iter().map(|c| s.spawn(move || c(seed))).collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| Check::failed("criterion", "verification", "check panicked")))
            .collect()
    })
}

/// Every criterion, followed by a determinism check that reruns the others
/// and compares the serialized results byte for byte.
pub fn full_verify(seed: u64) -> Vec<Check> {
    let first = run_concurrently(&CRITERIA, seed);
    let second = run_concurrently(&CRITERIA, seed);
    let bytes = |c: &[Check]| serde_json::to_vec(c).unwrap_or_default();
    let differing = first.iter().zip(&second).filter(|(a, b)| bytes(&[(*a).clone()]) != bytes(&[(*b).clone()])).count();
    let mut out = first;
    out.push(
        Check::new("determinism", "reproducible reports", differing as f64, Bound::below(0.0))
            .with_note("checks whose serialized form changed when rerun with the same seed"),
    );
    out
}
