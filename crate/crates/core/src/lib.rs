//! Classical and quantum mechanics as constraint systems on the cotangent bundle.
//!
//! Non-relativistic and relativistic systems on a configuration space `Q` are
//! described by constraints on the same phase space `T*Q`:
//!
//! * non-relativistic: `p_0 + H(t, q, p) = 0`,
//! * relativistic: `g_{uv} dH/dp_u dH/dp_v - 1 = 0`.
//!
//! The crate integrates the constrained flows ([`dynamics`]), quantizes the
//! affine-in-momenta observables on half-densities over `Q` ([`quantization`])
//! and solves the resulting quantum constraints, i.e. the Schrödinger and
//! Klein–Gordon equations ([`constraints`]). [`scenario`] drives everything from
//! a TOML file.

pub mod constraints;
pub mod dynamics;
pub mod error;
pub mod kinematics;
pub mod phase_space;
pub mod poly;
pub mod quantization;
pub mod scenario;

pub use error::{Error, Result};
pub use num_complex::Complex64;
