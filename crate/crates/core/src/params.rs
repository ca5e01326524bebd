use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Particle number and coupling in ring units.
///
/// `gamma = u_tilde·(N-1)/(2π)`; negative values are attractive.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelParams {
    n: usize,
    gamma: f64,
    u_tilde: f64,
    p0: i64,
}

impl ModelParams {
    pub fn new(n: usize, gamma: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::Config(format!(
                "particle number must be >= 2, got {n}"
            )));
        }
        if !gamma.is_finite() {
            return Err(Error::Config(format!("gamma must be finite, got {gamma}")));
        }
        Ok(Self {
            n,
            gamma,
            u_tilde: 2.0 * PI * gamma / (n - 1) as f64,
            p0: 0,
        })
    }

    pub fn from_u_tilde(n: usize, u_tilde: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::Config(format!(
                "particle number must be >= 2, got {n}"
            )));
        }
        if !u_tilde.is_finite() {
            return Err(Error::Config(format!(
                "interaction must be finite, got {u_tilde}"
            )));
        }
        Ok(Self {
            n,
            gamma: u_tilde * (n - 1) as f64 / (2.0 * PI),
            u_tilde,
            p0: 0,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Contact strength `Ũ₀` of `Ũ₀ δ(φ₁ - φ₂)`.
    pub fn u_tilde(&self) -> f64 {
        self.u_tilde
    }

    pub fn p0(&self) -> i64 {
        self.p0
    }

    /// Interaction prefactor `Ũ₀(N-1)/2` of the energy density.
    pub fn pair_prefactor(&self) -> f64 {
        0.5 * self.u_tilde * (self.n - 1) as f64
    }

    /// Prefactor `Ũ₀(N-2)/2` of the `N - 1` particle energy density.
    pub(crate) fn pair_prefactor_minus_one(&self) -> f64 {
        0.5 * self.u_tilde * (self.n - 2) as f64
    }
}
