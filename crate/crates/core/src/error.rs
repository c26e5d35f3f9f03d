use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum QreadError {
    #[error("covariance matrix violates the uncertainty principle: {0}")]
    NonPhysicalCm(String),

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("scalar optimization failed: {0}")]
    Optimization(String),

    #[error("no quantum advantage up to M = {m_max:e} (r0 = {r0}, N_S = {n_s}, N_B = {n_b})")]
    NoAdvantage { r0: f64, n_s: f64, n_b: f64, m_max: f64 },

    #[error("Fock truncation too small: trace deficit {deficit:e} exceeds {tol:e} at dim {dim}; increase the cutoff")]
    Truncation { dim: usize, deficit: f64, tol: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, QreadError>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(QreadError::Domain(msg.into()))
}
