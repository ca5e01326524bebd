use std::f64::consts::PI;

use crate::error::{Error, Result};

/// A real, even pair interaction `U(θ)` on the ring.
#[derive(Clone, Debug, PartialEq)]
pub enum InteractionSpec {
    /// `Ũ₀ δ(θ)`; every Fourier component equals `Ũ₀/(2π)`.
    Contact { u_tilde: f64 },
    /// `U(θ) = Σ_{m=0}^{m_max} u_m cos(mθ)`.
    Fourier { coefficients: Vec<f64> },
}

impl InteractionSpec {
    pub fn contact(u_tilde: f64) -> Self {
        InteractionSpec::Contact { u_tilde }
    }

    pub fn fourier(coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::Config(
                "interaction coefficients must be finite".into(),
            ));
        }
        Ok(InteractionSpec::Fourier { coefficients })
    }

    /// `û_m` in `U(θ) = Σ_m û_m e^{imθ}`.
    pub fn component(&self, m: i64) -> f64 {
        match self {
            InteractionSpec::Contact { u_tilde } => u_tilde / (2.0 * PI),
            InteractionSpec::Fourier { coefficients } => {
                let m = m.unsigned_abs() as usize;
                match coefficients.get(m) {
                    Some(&u) if m == 0 => u,
                    Some(&u) => 0.5 * u,
                    None => 0.0,
                }
            }
        }
    }
}
