use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The carriers through a vertex have no common second point.
    #[error("carriers are not concurrent (defect {defect:.3e})")]
    NotConcurrent { defect: f64 },

    /// Broken incidence structure: degree, boundary walk, labels.
    #[error("structural error: {0}")]
    Structural(String),

    /// Pressures disagree across paths; the cluster is not in equilibrium.
    #[error("pressure is path dependent (defect {defect:.3e})")]
    PathInconsistent { defect: f64 },

    /// The solver ran out of iterations. Carries the residual history.
    #[error("no convergence after {} iterations (last residual {:.3e})", history.len(), history.last().copied().unwrap_or(f64::NAN))]
    NonConvergence { history: Vec<f64> },

    /// An edge collapsed or turned past a full semicircle-pair.
    #[error("topology breakdown: {0}")]
    TopologyBreakdown(String),

    /// Malformed cluster or report document.
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
