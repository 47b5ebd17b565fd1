//! Error types shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Geometry with a non-positive Jacobian determinant or a degenerate facet.
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    /// Inconsistent mesh/dofmap construction input.
    #[error("construction error: {0}")]
    Construction(String),

    /// Bad user configuration (generator parameters, study config, ...).
    #[error("configuration error: {0}")]
    Config(String),

    /// Invalid problem data (negative tau, non-positive kappa sample, ...).
    #[error("invalid problem data: {0}")]
    ProblemData(String),

    /// Factorization hit a zero pivot; carries the dof block the pivot lives in.
    #[error("singular system: zero pivot in {block} block (dof {dof})")]
    Singular { block: String, dof: usize },

    /// Solve finished but the residual contract was not met.
    #[error("solver did not reach the residual contract: relative residual {residual:.3e}")]
    ResidualContract { residual: f64 },

    #[error("reference solution rejected: {0}")]
    ReferenceRejected(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
