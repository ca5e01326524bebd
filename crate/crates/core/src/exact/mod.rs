//! Exact few-body oracles: the two-particle relative problem, its orbital
//! decompositions, and small Fock-space diagonalizations.

pub mod decomposition;
pub mod fock;
pub mod interaction;
pub mod relative;

pub use decomposition::{
    build_orbitals, direct_wavefunction, hartree_product, momentum_check, principal_sqrt,
    reconstruct, OrbitalPair, PairForm, TwoBodyWavefunction,
};
pub use fock::{fock_diagonalize, fock_ground_energy, ModeSet};
pub use interaction::InteractionSpec;
pub use relative::{contact_ground_energy, solve_relative, RelativeSolution, Sector, Statistics};
