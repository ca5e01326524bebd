//! Continuous configuration-interaction (CCI) solvers for interacting bosons
//! on a one-dimensional ring.
//!
//! The many-body state is a superposition of all rigid translations of a
//! Hartree product, `Ψ = ∫dr₀ Π φ(r_i - r₀)`, which restores the momentum
//! symmetry that a localized orbital breaks. The crate provides
//!
//! - [`grid`]: the periodic Fourier grid, spectral kinetic operator and
//!   circular correlations;
//! - [`cci`]: the CCI energy functional, its gradient, the orbital equation
//!   residual and the minimizer;
//! - [`gp`]: the Gross-Pitaevskii baseline on the same grid;
//! - [`exact`]: exact two-body constructions and small Fock-space
//!   diagonalizations used as oracles.

pub mod cci;
pub mod error;
pub mod exact;
pub mod gp;
pub mod grid;
pub mod optimize;
pub mod params;

pub use cci::{
    cci_gradient, cci_residual, chemical_potential_density, compute_profiles, energy_density,
    energy_per_particle, solve_cci, solve_cci_from, CciResult, Profiles,
};
pub use error::{Error, Result};
pub use gp::{gp_energy, solve_gp, GpResult};
pub use grid::{
    apply_kinetic, crosscorr, inner, make_grid, shift, GridFunction, Profile, RingGrid,
};
pub use optimize::{CciSolveConfig, InitialGuess, Preconditioning, ENERGY_NOISE};
pub use params::ModelParams;

/// Peak-to-trough density difference `max|φ|² - min|φ|²`.
pub fn density_contrast(phi: &GridFunction) -> f64 {
    let d = phi.density();
    let max = d.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = d.iter().copied().fold(f64::INFINITY, f64::min);
    max - min
}
