//! Classical flows: the Hamiltonian connection of a time-dependent
//! Hamiltonian on `V*Q` and the relativistic flow on `T*Q`, with constraint
//! residual monitoring.

mod analysis;
mod flow;
mod integrate;
mod system;

pub use analysis::revolution_period;
pub use flow::{
    constraint_residual, constraint_residual_nonrel, constraint_residual_rel, contract_two_form,
    contraction_residual_nonrel, nonrel_vector_field, rel_vector_field, rq10_residual, CotangentTangent,
    VerticalTangent,
};
pub use integrate::{integrate, IntegratorConfig, Method, TrajectoryRecord};
pub use system::{GaugePotential, HamiltonianSystem, PotentialFn, PotentialJacobianFn};
