//! Phase-space layer: points of `T*Q` and `V*Q`, observables, canonical
//! brackets, Hamiltonian vector fields and the pull-back along `T*Q -> V*Q`.

mod bracket;
mod chart;
mod field;
mod metric;
mod observable;
mod point;

pub use bracket::{
    affine_bracket, bracket_observable, hamiltonian_vector_field, jacobi_residual, poisson_bracket_t,
    poisson_bracket_v, pullback_zeta, TangentComponents,
};
pub use chart::{Chart, JacobianFn, MapFn, Transition};
pub use field::{GradientFn, GradientMode, HessianFn, ScalarField, ScalarFn, DEFAULT_FD_STEP};
pub use metric::{minkowski_matrix, MetricDerivativeFn, MetricField, MetricFn, Signature};
pub use observable::{
    AffineObservable, GeneralObservable, Observable, ObservableKind, PhaseFn, PhaseGradientFn, PhaseHessianFn,
    PhaseSpace,
};
pub use point::{PhasePoint, VerticalPhasePoint};
