//! Poisson brackets on T*Q: canonical pairs, the closed-form bracket of affine
//! observables and the Jacobi identity for polynomial observables.

use cotangent::phase_space::{affine_bracket, jacobi_residual, poisson_bracket_t, Observable, PhasePoint, ScalarField};
use cotangent::poly::Polynomial;

fn main() -> cotangent::Result<()> {
    let z = PhasePoint::new(vec![0.5, -1.0], vec![0.3, 2.0])?;

    for k in 0..2 {
        for j in 0..2 {
            let b = poisson_bracket_t(&Observable::momentum(2, 2, k)?, &Observable::coordinate(2, 2, j)?, &z)?;
            println!("{{p_{k}, q^{j}}} = {}", b + 0.0);
        }
    }

    // f = q1 p0 + q0^2, g = q0 p1
    let q = |i| ScalarField::coordinate(2, i);
    let square = ScalarField::Polynomial(Polynomial::monomial(1.0, vec![2, 0]));
    let f = Observable::affine(vec![q(1), ScalarField::zero(2)], square)?;
    let g = Observable::affine(vec![ScalarField::zero(2), q(0)], ScalarField::zero(2))?;
    let fg = affine_bracket(&f, &g)?;
    println!("affine {{f, g}} at z: {:.6} (general bracket {:.6})", fg.at(&z)?, poisson_bracket_t(&f, &g, &z)?);

    // x0^2 y1 + x1 y0^3 and friends, as polynomials in (q0, q1, p0, p1)
    let h1 = Observable::polynomial(
        2,
        2,
        Polynomial::monomial(1.0, vec![2, 0, 0, 1]).add(&Polynomial::monomial(1.0, vec![0, 1, 3, 0])),
    )?;
    let h2 = Observable::polynomial(2, 2, Polynomial::monomial(-0.5, vec![1, 1, 1, 1]))?;
    let h3 = Observable::polynomial(2, 2, Polynomial::monomial(2.0, vec![0, 2, 0, 2]))?;
    println!("Jacobi residual: {:.3e}", jacobi_residual(&h1, &h2, &h3, &z)?);
    Ok(())
}
