//! Active Flux finite-volume methods for hyperbolic conservation laws in one
//! and two space dimensions, with point-value updates based on Jacobian or
//! flux vector splitting and bound-preserving limiting of both averages and
//! point values.

pub mod meshstate;
pub mod reconstruct;
pub mod splitting;
pub mod systems;
pub mod bc;
pub mod semidiscrete;
pub mod bpaverage;
pub mod bppoint;
pub mod scheme;
pub mod march;
pub mod solver1d;
pub mod solver2d;
pub mod exact;
pub mod cases;
pub mod runner;
pub mod verify;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid mesh: {0}")]
    Mesh(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("splitting parameter {alpha} is below the spectral radius {radius}")]
    AlphaContract { alpha: f64, radius: f64 },
    #[error("negative state at t = {t}: {detail}")]
    NegativeState { t: f64, detail: String },
    #[error("stage rejected: {0}")]
    StageRejected(String),
    #[error("bound-preserving limiter failed: {0}")]
    BoundViolation(String),
    #[error("time step still rejected after {retries} halvings at t = {t}: {last}")]
    RetriesExhausted { retries: usize, t: f64, last: String },
    #[error("Newton iteration failed to converge: {0}")]
    Newton(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Rejections that can be cured by a smaller time step.
    pub fn is_retryable(&self) -> bool {
        matches!(self, Error::StageRejected(_))
    }
}
