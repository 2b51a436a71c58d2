//! Quantum layer: prequantum operators on phase-space sections, the
//! Schrödinger representation on half-densities over `Q` with the metaplectic
//! correction, quadratic Hamiltonians, the Hermitian pairing and the checks of
//! the Dirac condition and of symmetry.
//!
//! Units have `hbar = 1`.

mod checks;
mod grid;
pub mod io;
mod operator;
mod stencil;
mod transform;

pub use checks::{
    commutator_residual, dirac_residual, hermiticity_residual, inner_product, norm, prequantum_commutator_residual,
    INTERIOR_MARGIN,
};
pub use grid::{Axis, Boundary, Grid, GridGeometry, GridKind};
pub use operator::{
    prequantum_operator, prequantum_operator_v, quadratic_operator, schrodinger_operator,
    schrodinger_operator_uncorrected, to_affine, MatrixFieldFn, OperatorDescriptor, PreparedOperator, QuantumOperator,
};
pub use stencil::{derivative, laplacian, Stencil};
pub use transform::{half_density_transform, interpolate};
