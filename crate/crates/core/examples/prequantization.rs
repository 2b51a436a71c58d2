//! Prequantum operators on sections over phase space: the operator table for
//! p, q and 1, and the Dirac condition [q^, p^] = -i {q, p}^.

use cotangent::phase_space::Observable;
use cotangent::quantization::{
    prequantum_commutator_residual, prequantum_operator, Boundary, Grid, GridGeometry, Stencil,
};
use cotangent::Complex64;

fn main() -> cotangent::Result<()> {
    let g = GridGeometry::uniform(&[(-12.0, 12.0), (-12.0, 12.0)], &[96, 96], Boundary::Periodic)?;
    let section = Grid::phase_section(g.clone(), 1, 1, |z| {
        Complex64::from_polar((-(z[0] * z[0] + z[1] * z[1]) / 2.0).exp(), z[0] - 0.5 * z[1])
    })?;
    let q = Observable::coordinate(1, 1, 0)?;
    let p = Observable::momentum(1, 1, 0)?;
    let one = Observable::constant(1, 1, 1.0)?;

    let centre = g.len() / 2 + g.shape()[1] / 2;
    for (name, f) in [("q", &q), ("p", &p), ("1", &one)] {
        let image = prequantum_operator(f)?.apply(&section)?;
        println!("{name}^ s at {:?}: {:.6}", g.point(centre), image.values[centre]);
    }
    let res = prequantum_commutator_residual(&q, &p, &[section], Stencil::Spectral)?;
    println!("Dirac residual for (q, p): {res:.2e}");
    Ok(())
}
