use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("grid mismatch: {left} nodes vs {right} nodes")]
    GridMismatch { left: usize, right: usize },

    #[error("orbital is not normalized: squared norm {norm_sq}")]
    NotNormalized { norm_sq: f64 },

    #[error("degenerate orbital: overlap denominator {0:e}")]
    DegenerateOrbital(f64),

    #[error("energy has a non-negligible imaginary part {0:e}")]
    NonRealEnergy(f64),

    #[error("invalid level {level} for a basis of dimension {dim}")]
    InvalidLevel { level: usize, dim: usize },

    #[error("Fock basis dimension {dim} exceeds the cap {cap}")]
    BasisTooLarge { dim: usize, cap: usize },

    #[error("root bracketing failed: {0}")]
    NoRoot(String),
}
