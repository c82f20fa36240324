use thiserror::Error;

use crate::cluster::InversionReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Kernel parameters are invalid or violate the stability condition `rho < 1`.
    #[error("invalid kernel: {0}")]
    InvalidKernel(String),

    /// A combinatorial object failed its defining condition.
    #[error("invariant violated: {0}")]
    Invariant(String),

    /// Enumeration or sampling request beyond the supported size.
    #[error("{what} exceeds the supported limit of {limit}")]
    Capacity { what: &'static str, limit: usize },

    /// The Borel inverse-CDF walk reached its hard cap.
    #[error("Borel sample exceeded the cap of {cap} events")]
    BorelOverflow { cap: u64 },

    /// Rejection sampling used up its attempt budget.
    #[error("rejection sampler gave up after {attempts} attempts")]
    RejectionBudget { attempts: u64 },

    /// Epoch recovery from compensator points did not converge.
    #[error("compensator inversion failed at epoch {index}: residual {residual:e}")]
    Inversion {
        index: usize,
        residual: f64,
        report: Box<InversionReport>,
    },
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
