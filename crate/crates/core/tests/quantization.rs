use std::f64::consts::PI;

use cotangent::phase_space::{pullback_zeta, Observable, ScalarField, Transition};
use cotangent::poly::Polynomial;
use cotangent::quantization::*;
use cotangent::{Complex64, Error};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Gaussian wave packet centred at `centre` with width `sigma` and momentum `k`.
fn packet(geometry: &GridGeometry, centre: &[f64], sigma: f64, k: &[f64]) -> Grid {
    let (centre, k) = (centre.to_vec(), k.to_vec());
    Grid::half_density(geometry.clone(), move |x| {
        let r2: f64 = x.iter().zip(&centre).map(|(a, b)| (a - b).powi(2)).sum();
        let phase: f64 = x.iter().zip(&k).map(|(a, b)| a * b).sum();
        Complex64::from_polar((-r2 / (2.0 * sigma * sigma)).exp(), phase)
    })
}

fn dirichlet_1d(n: usize) -> GridGeometry {
    GridGeometry::uniform(&[(-8.0, 8.0)], &[n], Boundary::DirichletZero).unwrap()
}

fn max_diff(a: &[Complex64], b: &[Complex64], mask: &[bool]) -> f64 {
    a.iter().zip(b).zip(mask).filter(|(_, &m)| m).map(|((x, y), _)| (x - y).norm()).fold(0.0, f64::max)
}

fn fit_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// `p_j` as an affine observable on `T*Q` with `n` coordinates.
fn momentum(n: usize, j: usize) -> Observable {
    let a = (0..n).map(|i| ScalarField::constant(n, if i == j { 1.0 } else { 0.0 })).collect();
    Observable::affine(a, ScalarField::zero(n)).unwrap()
}

fn x_times_p() -> Observable {
    Observable::affine(vec![ScalarField::coordinate(1, 0)], ScalarField::zero(1)).unwrap()
}

#[test]
fn momentum_on_plane_wave() {
    let k = 3.0;
    let mut errs = Vec::new();
    for n in [64, 128] {
        let g = GridGeometry::uniform(&[(0.0, 2.0 * PI)], &[n], Boundary::Periodic).unwrap();
        let wave = Grid::half_density(g, |x| Complex64::from_polar(1.0, k * x[0]));
        let out = schrodinger_operator(&momentum(1, 0)).unwrap().apply(&wave).unwrap();
        let err = out.values.iter().zip(&wave.values).map(|(o, w)| (o - k * w).norm()).fold(0.0, f64::max);
        // central differences scale k by sin(kh)/(kh)
        let h = 2.0 * PI / n as f64;
        assert!((err - k * (1.0 - (k * h).sin() / (k * h))).abs() < 1e-10);
        errs.push(err);
    }
    assert!((errs[0] / errs[1] - 4.0).abs() < 0.05);
    let spectral = GridGeometry::uniform(&[(0.0, 2.0 * PI)], &[64], Boundary::Periodic).unwrap();
    let wave = Grid::half_density(spectral, |x| Complex64::from_polar(1.0, k * x[0]));
    let out = schrodinger_operator(&momentum(1, 0)).unwrap().with_stencil(Stencil::Spectral).apply(&wave).unwrap();
    assert!(out.values.iter().zip(&wave.values).all(|(o, w)| (o - k * w).norm() < 1e-12));
}

#[test]
fn x_p_carries_the_half_shift() {
    let g = dirichlet_1d(200);
    let rho = packet(&g, &[0.5], 1.0, &[1.0]);
    let op = schrodinger_operator(&x_times_p()).unwrap();
    let out = op.apply(&rho).unwrap();
    let d = derivative(&g, &rho.values, 0, Stencil::Central).unwrap();
    let i = c(0.0, 1.0);
    let expect: Vec<Complex64> =
        g.points().zip(&d).zip(&rho.values).map(|((x, d), r)| -i * x[0] * d - 0.5 * i * r).collect();
    assert!(max_diff(&out.values, &expect, &vec![true; g.len()]) < 1e-14);
}

#[test]
fn multiplication_is_exact() {
    let g = dirichlet_1d(100);
    let rho = packet(&g, &[0.0], 1.5, &[0.7]);
    let b = ScalarField::function(1, |x| (x[0]).cos() + x[0] * x[0]);
    let op = schrodinger_operator(&Observable::affine(vec![ScalarField::zero(1)], b).unwrap()).unwrap();
    let out = op.apply(&rho).unwrap();
    for (x, (o, r)) in g.points().zip(out.values.iter().zip(&rho.values)) {
        assert_eq!(*o, r * (x[0].cos() + x[0] * x[0]));
    }
}

#[test]
fn polynomial_observables_are_accepted() {
    // x p written as a polynomial in (x, p)
    let mut poly = Polynomial::zero(2);
    poly.add_term(vec![1, 1], 1.0);
    let f = Observable::polynomial(1, 1, poly).unwrap();
    let g = dirichlet_1d(64);
    let rho = packet(&g, &[0.0], 1.0, &[0.0]);
    let a = schrodinger_operator(&f).unwrap().apply(&rho).unwrap();
    let b = schrodinger_operator(&x_times_p()).unwrap().apply(&rho).unwrap();
    assert_eq!(a.values, b.values);

    let mut quad = Polynomial::zero(2);
    quad.add_term(vec![0, 2], 1.0);
    let err = schrodinger_operator(&Observable::polynomial(1, 1, quad).unwrap()).unwrap_err();
    assert!(matches!(err, Error::QuadraticRequired));
}

#[test]
fn inner_product_properties() {
    let g = dirichlet_1d(400);
    let sigma: f64 = 0.8;
    // |rho|^2 integrates to one
    let amp = (PI * sigma * sigma).powf(-0.25);
    let rho = packet(&g, &[0.3], sigma, &[2.0]).scaled(c(amp, 0.0));
    let n = inner_product(&rho, &rho).unwrap();
    assert!((n.re - 1.0).abs() < 1e-10 && n.im == 0.0);
    let other = packet(&g, &[-0.5], 1.3, &[-1.0]);
    let (ab, ba) = (inner_product(&rho, &other).unwrap(), inner_product(&other, &rho).unwrap());
    assert!((ab - ba.conj()).norm() < 1e-15);
    let zero = Grid::zeros(g, GridKind::HalfDensity).unwrap();
    assert_eq!(inner_product(&zero, &zero).unwrap(), c(0.0, 0.0));
}

#[test]
fn prequantum_table() {
    // (q, p) box, quadratic probe: central differences are exact on it
    let g = GridGeometry::uniform(&[(-2.0, 2.0), (-3.0, 3.0)], &[21, 31], Boundary::DirichletZero).unwrap();
    let s = Grid::phase_section(g.clone(), 1, 1, |z| c(z[0] * z[0] + 2.0 * z[0] * z[1], z[1] * z[1] - z[0])).unwrap();
    let interior = g.interior_mask(1);
    let i = c(0.0, 1.0);

    let p_hat = prequantum_operator(&Observable::momentum(1, 1, 0).unwrap()).unwrap().apply(&s).unwrap();
    let expect: Vec<Complex64> = g.points().map(|z| -i * c(2.0 * z[0] + 2.0 * z[1], -1.0)).collect();
    assert!(max_diff(&p_hat.values, &expect, &interior) < 1e-12);

    let q_hat = prequantum_operator(&Observable::coordinate(1, 1, 0).unwrap()).unwrap().apply(&s).unwrap();
    let expect: Vec<Complex64> =
        g.points().zip(&s.values).map(|(z, sv)| i * c(2.0 * z[0], 2.0 * z[1]) + z[0] * sv).collect();
    assert!(max_diff(&q_hat.values, &expect, &interior) < 1e-12);

    let one = prequantum_operator(&Observable::constant(1, 1, 1.0).unwrap()).unwrap().apply(&s).unwrap();
    assert_eq!(one.values, s.values);
}

#[test]
fn prequantum_dirac_condition_for_canonical_pair() {
    // probes must vanish to roundoff at the box edge
    let g = GridGeometry::uniform(&[(-12.0, 12.0), (-12.0, 12.0)], &[96, 96], Boundary::Periodic).unwrap();
    let probes: Vec<Grid> = [(0.0, 0.0, 1.0), (0.5, -1.0, 1.3)]
        .iter()
        .map(|&(a, b, w)| {
            Grid::phase_section(g.clone(), 1, 1, move |z| {
                Complex64::from_polar(
                    (-((z[0] - a).powi(2) + (z[1] - b).powi(2)) / (2.0 * w * w)).exp(),
                    z[0] - 0.5 * z[1],
                )
            })
            .unwrap()
        })
        .collect();
    let q = Observable::coordinate(1, 1, 0).unwrap();
    let p = Observable::momentum(1, 1, 0).unwrap();
    let r = prequantum_commutator_residual(&q, &p, &probes, Stencil::Spectral).unwrap();
    assert!(r < 1e-10, "{r}");
    let central = prequantum_commutator_residual(&q, &p, &probes, Stencil::Central).unwrap();
    assert!(central > 1e-4, "central stencils are only second order: {central}");
    assert_eq!(prequantum_commutator_residual(&q, &q, &probes, Stencil::Central).unwrap(), 0.0);
}

#[test]
fn vertical_prequantization_matches_pullback() {
    // f = t q p + q^2 on V*Q over (t, q); its pull-back ignores p_0
    let mut poly = Polynomial::zero(3);
    poly.add_term(vec![1, 1, 1], 1.0);
    poly.add_term(vec![0, 2, 0], 1.0);
    let f = Observable::polynomial(2, 1, poly).unwrap();
    let pulled = pullback_zeta(&f).unwrap();
    let n = 16;
    let gv = GridGeometry::uniform(&[(-1.0, 1.0), (-2.0, 2.0), (-2.0, 2.0)], &[n, n, n], Boundary::Periodic).unwrap();
    let gt =
        GridGeometry::uniform(&[(-1.0, 1.0), (-2.0, 2.0), (-3.0, 3.0), (-2.0, 2.0)], &[n, n, 8, n], Boundary::Periodic)
            .unwrap();
    let section = |z: &[f64]| Complex64::from_polar((z[1] * z[1] + z[2] * z[2]).cos(), (PI * z[0]).sin() + z[2]);
    let sv = Grid::phase_section(gv.clone(), 2, 1, |z| section(z)).unwrap();
    let st = Grid::phase_section(gt.clone(), 2, 2, |z| section(&[z[0], z[1], z[3]])).unwrap();
    let out_v = prequantum_operator_v(&f).unwrap().apply(&sv).unwrap();
    let out_t = prequantum_operator(&pulled).unwrap().apply(&st).unwrap();
    let mut worst: f64 = 0.0;
    for k in 0..gt.len() {
        let idx = gt.multi_index(k);
        let kv = (idx[0] * n + idx[1]) * n + idx[3];
        worst = worst.max((out_t.values[k] - out_v.values[kv]).norm());
    }
    assert!(worst < 1e-10, "{worst}");

    // f = p_k acts as -i d_k
    let pk = Observable::momentum(2, 1, 0).unwrap();
    let out = prequantum_operator_v(&pk).unwrap().apply(&sv).unwrap();
    let d = derivative(&gv, &sv.values, 1, Stencil::Central).unwrap();
    assert!(out.values.iter().zip(&d).all(|(o, d)| (o + c(0.0, 1.0) * d).norm() < 1e-14));
}

#[test]
fn canonical_pair_commutator_is_exact_spectrally() {
    let g = GridGeometry::uniform(&[(-16.0, 16.0)], &[256], Boundary::Periodic).unwrap();
    let probes = vec![packet(&g, &[0.0], 1.0, &[0.5]), packet(&g, &[1.0], 1.5, &[-1.0])];
    let q = Observable::affine(vec![ScalarField::zero(1)], ScalarField::coordinate(1, 0)).unwrap();
    let p = momentum(1, 0);
    assert!(commutator_residual(&q, &p, &probes, Stencil::Spectral).unwrap() < 1e-10);
    assert!(commutator_residual(&p, &q, &probes, Stencil::Spectral).unwrap() < 1e-10);
    assert_eq!(commutator_residual(&q, &q, &probes, Stencil::Central).unwrap(), 0.0);
}

#[test]
fn constant_coefficient_pairs_commute_exactly() {
    let g = GridGeometry::uniform(&[(-6.0, 6.0), (-6.0, 6.0)], &[40, 48], Boundary::DirichletZero).unwrap();
    let probes = vec![packet(&g, &[0.0, 0.5], 1.0, &[0.3, -0.2])];
    let f = Observable::affine(
        vec![ScalarField::constant(2, 0.7), ScalarField::constant(2, -1.2)],
        ScalarField::constant(2, 0.4),
    )
    .unwrap();
    let h = Observable::affine(
        vec![ScalarField::constant(2, 2.0), ScalarField::constant(2, 0.3)],
        ScalarField::constant(2, -3.0),
    )
    .unwrap();
    assert!(commutator_residual(&f, &h, &probes, Stencil::Central).unwrap() < 1e-10);
}

fn random_affine(rng: &mut ChaCha8Rng, n: usize) -> Observable {
    let a = (0..n).map(|_| ScalarField::Polynomial(Polynomial::random(rng, n, 2, 0.7))).collect();
    Observable::affine(a, ScalarField::Polynomial(Polynomial::random(rng, n, 2, 0.7))).unwrap()
}

#[test]
fn random_affine_pairs_converge_at_second_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let sizes = [32, 64, 128];
    for _ in 0..20 {
        let (f, g) = (random_affine(&mut rng, 2), random_affine(&mut rng, 2));
        let res: Vec<f64> = sizes
            .iter()
            .map(|&n| {
                let geo = GridGeometry::uniform(&[(-5.0, 5.0), (-5.0, 5.0)], &[n, n], Boundary::DirichletZero).unwrap();
                commutator_residual(&f, &g, &[packet(&geo, &[0.2, -0.3], 0.8, &[0.5, 0.0])], Stencil::Central).unwrap()
            })
            .collect();
        let hs: Vec<f64> = sizes.iter().map(|&n| (10.0 / (n + 1) as f64).ln()).collect();
        let slope = fit_slope(&hs, &res.iter().map(|r| r.ln()).collect::<Vec<_>>());
        assert!(res[0] > res[1] && res[1] > res[2], "{res:?}");
        assert!(slope >= 1.9, "slope {slope}, residuals {res:?}");
    }
}

fn probes_1d(g: &GridGeometry) -> Vec<Grid> {
    vec![packet(g, &[0.0], 0.9, &[1.0]), packet(g, &[0.7], 1.2, &[-0.4]), packet(g, &[-1.0], 0.7, &[0.0])]
}

#[test]
fn real_multiplication_is_symmetric() {
    let g = dirichlet_1d(128);
    let b = ScalarField::function(1, |x| 1.0 + x[0].sin());
    let op = schrodinger_operator(&Observable::affine(vec![ScalarField::zero(1)], b).unwrap()).unwrap();
    assert!(hermiticity_residual(&op, &probes_1d(&g)).unwrap() < 1e-14);
}

#[test]
fn corrected_operators_are_symmetric_to_second_order() {
    let wavy = Observable::affine(
        vec![ScalarField::with_gradient(1, |x| 1.0 + 0.5 * x[0].sin(), |x| vec![0.5 * x[0].cos()])],
        ScalarField::coordinate(1, 0),
    )
    .unwrap();
    let op = schrodinger_operator(&wavy).unwrap();
    let sizes = [64, 128, 256, 512];
    let res: Vec<f64> =
        sizes.iter().map(|&n| hermiticity_residual(&op, &probes_1d(&dirichlet_1d(n))).unwrap()).collect();
    let hs: Vec<f64> = sizes.iter().map(|&n| (16.0 / (n + 1) as f64).ln()).collect();
    let slope = fit_slope(&hs, &res.iter().map(|r| r.ln()).collect::<Vec<_>>());
    assert!(slope >= 1.8, "slope {slope} from {res:?}");

    // constant coefficients give an exactly antisymmetric stencil
    let p = schrodinger_operator(&momentum(1, 0)).unwrap();
    assert!(hermiticity_residual(&p, &probes_1d(&dirichlet_1d(100))).unwrap() < 1e-14);
}

#[test]
fn missing_correction_breaks_symmetry() {
    let g = dirichlet_1d(256);
    let bad = hermiticity_residual(&schrodinger_operator_uncorrected(&x_times_p()).unwrap(), &probes_1d(&g)).unwrap();
    let good = hermiticity_residual(&schrodinger_operator(&x_times_p()).unwrap(), &probes_1d(&g)).unwrap();
    assert!(bad >= 1e-3);
    assert!(good < 1e-2 * bad, "{good} vs {bad}");
}

#[test]
fn free_quadratic_is_the_laplacian() {
    let m = 1.7;
    let g = GridGeometry::uniform(&[(-6.0, 6.0), (-6.0, 6.0)], &[40, 50], Boundary::DirichletZero).unwrap();
    let rho = packet(&g, &[0.0, 0.3], 1.0, &[0.5, 0.0]);
    let op = quadratic_operator(
        move |_| DMatrix::identity(2, 2) / (2.0 * m),
        vec![ScalarField::zero(2), ScalarField::zero(2)],
        ScalarField::zero(2),
    )
    .unwrap();
    assert!(matches!(op.descriptor(), OperatorDescriptor::Quadratic { chart_local: true }));
    let out = op.apply(&rho).unwrap();
    // five-point Laplacian with zero ghosts
    let shape = g.shape();
    let at = |i: isize, j: isize| -> Complex64 {
        if i < 0 || j < 0 || i >= shape[0] as isize || j >= shape[1] as isize {
            c(0.0, 0.0)
        } else {
            rho.values[i as usize * shape[1] + j as usize]
        }
    };
    let (hx, hy) = (g.spacing(0), g.spacing(1));
    for i in 0..shape[0] as isize {
        for j in 0..shape[1] as isize {
            let lap = (at(i + 1, j) - 2.0 * at(i, j) + at(i - 1, j)) / (hx * hx)
                + (at(i, j + 1) - 2.0 * at(i, j) + at(i, j - 1)) / (hy * hy);
            let k = i as usize * shape[1] + j as usize;
            assert!((out.values[k] + lap / (2.0 * m)).norm() < 1e-12);
        }
    }
}

#[test]
fn quadratic_operator_is_symmetric() {
    let a = |x: &[f64]| {
        DMatrix::from_row_slice(2, 2, &[1.0 + 0.2 * x[0].sin(), 0.1 * x[1], 0.1 * x[1], 0.8 + 0.1 * x[0] * x[0]])
    };
    let op =
        quadratic_operator(a, vec![ScalarField::coordinate(2, 1), ScalarField::zero(2)], ScalarField::coordinate(2, 0))
            .unwrap();
    let g = GridGeometry::uniform(&[(-6.0, 6.0), (-6.0, 6.0)], &[48, 48], Boundary::DirichletZero).unwrap();
    let probes = vec![packet(&g, &[0.0, 0.0], 1.0, &[0.4, 0.1]), packet(&g, &[0.5, -0.5], 0.8, &[0.0, -0.6])];
    let r = hermiticity_residual(&op, &probes).unwrap();
    assert!(r < 1e-3, "{r}");

    let skew = quadratic_operator(
        |_| DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]),
        vec![ScalarField::zero(2), ScalarField::zero(2)],
        ScalarField::zero(2),
    )
    .unwrap();
    assert!(matches!(skew.apply(&probes[0]), Err(Error::AsymmetricCoefficients { .. })));
}

#[test]
fn zero_quadratic_part_reduces_to_affine() {
    let g = GridGeometry::uniform(&[(-6.0, 6.0), (-6.0, 6.0)], &[30, 30], Boundary::DirichletZero).unwrap();
    let rho = packet(&g, &[0.0, 0.0], 1.0, &[0.2, 0.3]);
    let b = vec![ScalarField::coordinate(2, 1), ScalarField::constant(2, 0.5)];
    let cterm = ScalarField::coordinate(2, 0);
    let quad = quadratic_operator(|_| DMatrix::zeros(2, 2), b.clone(), cterm.clone()).unwrap();
    let aff = schrodinger_operator(&Observable::affine(b, cterm).unwrap()).unwrap();
    assert_eq!(quad.apply(&rho).unwrap().values, aff.apply(&rho).unwrap().values);
}

#[test]
fn gauge_coupled_expansion_matches_covariant_form() {
    // (1/2m) eta^{uv} (d_u - ieA_u)(d_v - ieA_v) on rho = exp(-|x|^2/2) in 1+1
    // dimensions, with linear A_u = M[u][w] x^w, written out by hand
    let (m, e) = (1.3, 0.8);
    let mm = [[0.0, 0.3], [0.25, 0.0]];
    let eta = [1.0, -1.0];
    let pot = move |x: &[f64], u: usize| mm[u][0] * x[0] + mm[u][1] * x[1];
    let oracle = move |x: &[f64]| -> Complex64 {
        let rho = (-(x[0] * x[0] + x[1] * x[1]) / 2.0).exp();
        let i = c(0.0, 1.0);
        let mut s = c(0.0, 0.0);
        for u in 0..2 {
            let (au, delta) = (pot(x, u), 1.0);
            s += eta[u] * ((x[u] * x[u] - delta) - i * e * mm[u][u] + 2.0 * i * e * x[u] * au - e * e * au * au);
        }
        s * rho / (2.0 * m)
    };
    let g = GridGeometry::uniform(&[(-10.0, 10.0), (-10.0, 10.0)], &[64, 64], Boundary::Periodic).unwrap();
    let rho = packet(&g, &[0.0, 0.0], 1.0, &[0.0, 0.0]);
    let b: Vec<ScalarField> = (0..2)
        .map(|u| {
            let mut p = Polynomial::zero(2);
            for w in 0..2 {
                p.add_term(if w == 0 { vec![1, 0] } else { vec![0, 1] }, e / m * eta[u] * mm[u][w]);
            }
            ScalarField::Polynomial(p)
        })
        .collect();
    let cfield = ScalarField::function(2, move |x| {
        -(e * e / (2.0 * m)) * (0..2).map(|u| eta[u] * pot(x, u).powi(2)).sum::<f64>()
    });
    let op = quadratic_operator(
        move |_| DMatrix::from_diagonal(&nalgebra::dvector![-eta[0], -eta[1]]) / (2.0 * m),
        b,
        cfield,
    )
    .unwrap()
    .with_stencil(Stencil::Spectral);
    let out = op.apply(&rho).unwrap();
    let expect: Vec<Complex64> = g.points().map(|x| oracle(&x)).collect();
    let scale = expect.iter().fold(0.0f64, |a, v| a.max(v.norm()));
    let err = max_diff(&out.values, &expect, &vec![true; g.len()]);
    assert!(err / scale < 1e-8, "{err}");
}

#[test]
fn spectral_needs_periodic_grid() {
    let g = dirichlet_1d(32);
    let op = schrodinger_operator(&momentum(1, 0)).unwrap().with_stencil(Stencil::Spectral);
    assert!(matches!(op.apply(&packet(&g, &[0.0], 1.0, &[0.0])), Err(Error::GridMismatch(_))));
}

#[test]
fn half_density_transforms_preserve_norm() {
    let g = GridGeometry::uniform(&[(-6.0, 6.0)], &[1024], Boundary::DirichletZero).unwrap();
    let rho = packet(&g, &[0.4], 0.9, &[1.5]);
    let n0 = norm(&rho);

    let same = half_density_transform(&rho, &Transition::identity(1), &g).unwrap();
    assert!(max_diff(&same.values, &rho.values, &vec![true; g.len()]) < 1e-12);

    let dilation = Transition::affine(DMatrix::from_element(1, 1, 2.0), vec![0.0]).unwrap();
    let wide = GridGeometry::uniform(&[(-12.0, 12.0)], &[1024], Boundary::DirichletZero).unwrap();
    let out = half_density_transform(&rho, &dilation, &wide).unwrap();
    assert!((norm(&out) - n0).abs() < 1e-6 * n0);
    let y = 1.0;
    let expect = interpolate(&rho, &[y / 2.0]) / 2f64.sqrt();
    assert!((interpolate(&out, &[y]) - expect).norm() < 1e-6);

    let cubic = Transition::new(
        1,
        |q: &[f64]| vec![q[0] + 0.1 * q[0].powi(3)],
        |q: &[f64]| DMatrix::from_element(1, 1, 1.0 + 0.3 * q[0] * q[0]),
    );
    let image = GridGeometry::uniform(&[(-27.6, 27.6)], &[1024], Boundary::DirichletZero).unwrap();
    let out = half_density_transform(&rho, &cubic, &image).unwrap();
    assert!((norm(&out) - n0).abs() < 1e-4 * n0, "{} vs {n0}", norm(&out));
}

#[test]
fn folding_map_is_rejected() {
    let g = dirichlet_1d(64);
    let rho = packet(&g, &[0.0], 1.0, &[0.0]);
    let fold = Transition::new(
        1,
        |q: &[f64]| vec![q[0] * q[0] * q[0]],
        |q: &[f64]| DMatrix::from_element(1, 1, 3.0 * q[0] * q[0]),
    )
    .with_inverse(|y: &[f64]| vec![y[0].cbrt()]);
    // nodes -1, -0.5, 0, 0.5: the fold sits at 0
    let target = GridGeometry::uniform(&[(-1.0, 1.0)], &[4], Boundary::Periodic).unwrap();
    let err = half_density_transform(&rho, &fold, &target).unwrap_err();
    assert!(matches!(err, Error::NonInvertibleJacobian(_)));
}

#[test]
fn grid_files_round_trip() {
    let g =
        GridGeometry::new(vec![Axis::new("t", 0.0, 1.0, 4), Axis::new("x", -1.0, 1.0, 5)], Boundary::Periodic).unwrap();
    let rho = packet(&g, &[0.5, 0.0], 0.5, &[1.0, 2.0]);
    let mut buf = Vec::new();
    io::write_binary(&rho, &mut buf).unwrap();
    assert_eq!(buf.len(), 8 + 4 + 4 + 8 + 2 * (8 + 8 + 8 + 4 + 1) + 20 * 16);
    assert_eq!(io::read_binary(&buf[..]).unwrap(), rho);
    assert_eq!(io::from_json(&io::to_json(&rho).unwrap()).unwrap(), rho);
    assert!(io::read_binary(&b"nonsense"[..]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn operators_are_linear(
        alpha in (-2.0f64..2.0, -2.0f64..2.0),
        beta in (-2.0f64..2.0, -2.0f64..2.0),
        k1 in -2.0f64..2.0,
        k2 in -2.0f64..2.0,
        seed in 0u64..1000,
    ) {
        let g = GridGeometry::uniform(&[(-5.0, 5.0), (-5.0, 5.0)], &[16, 20], Boundary::DirichletZero).unwrap();
        let (r1, r2) = (packet(&g, &[0.0, 0.0], 1.0, &[k1, 0.0]), packet(&g, &[0.5, 0.5], 1.2, &[0.0, k2]));
        let (a, b) = (c(alpha.0, alpha.1), c(beta.0, beta.1));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let op = schrodinger_operator(&random_affine(&mut rng, 2)).unwrap();
        let lhs = op.apply(&r1.scaled(a).add(&r2.scaled(b)).unwrap()).unwrap();
        let rhs = op.apply(&r1).unwrap().scaled(a).add(&op.apply(&r2).unwrap().scaled(b)).unwrap();
        let scale = lhs.max_abs().max(1.0);
        prop_assert!(lhs.sub(&rhs).unwrap().max_abs() < 1e-12 * scale);
    }

    #[test]
    fn pairing_is_conjugate_symmetric(k1 in -3.0f64..3.0, k2 in -3.0f64..3.0, x in -2.0f64..2.0) {
        let g = dirichlet_1d(128);
        let (r1, r2) = (packet(&g, &[x], 1.0, &[k1]), packet(&g, &[0.0], 0.7, &[k2]));
        let d = inner_product(&r1, &r2).unwrap() - inner_product(&r2, &r1).unwrap().conj();
        prop_assert!(d.norm() < 1e-14);
        prop_assert!(inner_product(&r1, &r1).unwrap().re > 0.0);
    }
}
