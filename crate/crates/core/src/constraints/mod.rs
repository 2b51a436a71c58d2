//! Quantum constraints as evolution equations: the Schrödinger equation by
//! Crank–Nicolson and the Klein–Gordon equation by leapfrog, with dispersion
//! and non-relativistic-limit checks for the latter.

mod dispersion;
mod evolution;
mod klein_gordon;
mod schrodinger;
mod solver;

pub use dispersion::{
    dispersion_check, fourier_amplitude, loglog_slope, nonrel_limit_compare, DispersionResult, NonrelLimitReport,
    NonrelLimitRow,
};
pub use evolution::{Evolution, EvolutionConfig, Scheme, WaveState};
pub use klein_gordon::{klein_gordon_energy, klein_gordon_evolve};
pub use schrodinger::{charged_hamiltonian, free_hamiltonian, schrodinger_evolve};
pub use solver::{bicgstab, SolveStats};
