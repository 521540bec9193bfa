use thiserror::Error;

/// Failure modes shared by every evaluation and audit routine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum AuditError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("convergence error: {0}")]
    Convergence(String),
    #[error("no zero of zeta found on the critical line in [{lo}, {hi}] (smallest |zeta| seen: {best_abs:.3e})")]
    NoZeroFound { lo: f64, hi: f64, best_abs: f64 },
    #[error("cap exceeded: {0}")]
    CapExceeded(String),
}

pub type Result<T> = std::result::Result<T, AuditError>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(AuditError::Domain(msg.into()))
}

pub(crate) fn convergence<T>(msg: impl Into<String>) -> Result<T> {
    Err(AuditError::Convergence(msg.into()))
}
