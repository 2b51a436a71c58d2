//! Schrödinger quantization of affine observables on half-densities. The
//! commutator defect of a variable-coefficient pair falls as h^2, and the
//! metaplectic correction is what makes x p symmetric.

use cotangent::phase_space::{Observable, ScalarField};
use cotangent::quantization::{
    commutator_residual, hermiticity_residual, schrodinger_operator, schrodinger_operator_uncorrected, Boundary, Grid,
    GridGeometry, Stencil,
};
use cotangent::Complex64;

fn packet(g: &GridGeometry) -> Grid {
    Grid::half_density(g.clone(), |x| Complex64::from_polar((-x[0] * x[0] / 1.6).exp(), 0.7 * x[0]))
}

fn main() -> cotangent::Result<()> {
    // f = (1 + x^2 / 4) p, g = sin(x) p + x
    let f = Observable::affine(
        vec![ScalarField::with_gradient(1, |x| 1.0 + x[0] * x[0] / 4.0, |x| vec![x[0] / 2.0])],
        ScalarField::zero(1),
    )?;
    let g = Observable::affine(
        vec![ScalarField::with_gradient(1, |x| x[0].sin(), |x| vec![x[0].cos()])],
        ScalarField::coordinate(1, 0),
    )?;
    for n in [64, 128, 256, 512] {
        let geo = GridGeometry::uniform(&[(-8.0, 8.0)], &[n], Boundary::DirichletZero)?;
        let res = commutator_residual(&f, &g, &[packet(&geo)], Stencil::Central)?;
        println!("n = {n:>3}: |[f^, g^] + i {{f, g}}^| = {res:.3e}");
    }

    let geo = GridGeometry::uniform(&[(-8.0, 8.0)], &[256], Boundary::DirichletZero)?;
    let xp = Observable::affine(vec![ScalarField::coordinate(1, 0)], ScalarField::zero(1))?;
    let probes = [packet(&geo)];
    println!("x p symmetry defect, corrected:   {:.3e}", hermiticity_residual(&schrodinger_operator(&xp)?, &probes)?);
    println!(
        "x p symmetry defect, uncorrected: {:.3e}",
        hermiticity_residual(&schrodinger_operator_uncorrected(&xp)?, &probes)?
    );
    Ok(())
}
