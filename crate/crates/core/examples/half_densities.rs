//! Half-densities keep their norm under coordinate changes: a dilation and a
//! cubic map, with the result written as a binary grid dump.

use cotangent::phase_space::Transition;
use cotangent::quantization::{half_density_transform, io, norm, Boundary, Grid, GridGeometry};
use cotangent::Complex64;
use nalgebra::DMatrix;

fn main() -> cotangent::Result<()> {
    let g = GridGeometry::uniform(&[(-6.0, 6.0)], &[1024], Boundary::DirichletZero)?;
    let rho = Grid::half_density(g, |x| Complex64::from_polar((-(x[0] - 0.4).powi(2) / 1.62).exp(), 1.5 * x[0]));
    let n0 = norm(&rho);

    let dilation = Transition::affine(DMatrix::from_element(1, 1, 2.0), vec![0.0])?;
    let wide = GridGeometry::uniform(&[(-12.0, 12.0)], &[1024], Boundary::DirichletZero)?;
    let dilated = half_density_transform(&rho, &dilation, &wide)?;

    let cubic = Transition::new(
        1,
        |q: &[f64]| vec![q[0] + 0.1 * q[0].powi(3)],
        |q: &[f64]| DMatrix::from_element(1, 1, 1.0 + 0.3 * q[0] * q[0]),
    );
    let image = GridGeometry::uniform(&[(-27.6, 27.6)], &[1024], Boundary::DirichletZero)?;
    let bent = half_density_transform(&rho, &cubic, &image)?;

    println!("norm: original {n0:.12}");
    println!("      dilated  {:.12}", norm(&dilated));
    println!("      cubic    {:.12}", norm(&bent));

    let path = std::env::temp_dir().join("cubic-image.ctg");
    io::save_binary(&bent, &path)?;
    let back = io::load_binary(&path)?;
    println!(
        "wrote {} ({} values, round trip exact: {})",
        path.display(),
        back.values.len(),
        back.values == bent.values
    );
    Ok(())
}
