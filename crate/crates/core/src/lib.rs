//! Numerical toolkit for structured unitary matrices: complex Hadamard
//! matrix generation and certification, restricted-defect analysis of
//! quantum measurements, diagnostics of absolutely maximally entangled
//! states, and excess-based Bell-inequality analysis.

pub mod ame;
pub mod bell;
pub mod chm;
pub mod data;
pub mod defect;
pub mod io;
pub mod numerics;

pub use numerics::{CMatrix, ToleranceConfig};

/// Errors shared by all modules.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("singular matrix: {0}")]
    Singular(String),
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    #[error("did not converge: {0}")]
    NonConvergence(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("format error: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
