//! Error taxonomy shared by every module.
//!
//! Errors fall into three families that map onto the CLI exit codes:
//! configuration and validation problems (exit 2), numerical
//! non-convergence (exit 3), and violations of structural invariants that
//! the algorithms are supposed to preserve exactly (exit 4). Library code
//! returns [`Error`]; only the binary turns it into a process exit.

use thiserror::Error;

/// Convenience alias used across the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// All failure modes of the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid configuration, parameters, or input data.
    #[error("config error: {0}")]
    Config(String),

    /// Input grids or dimensions do not match.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// Degenerate input for which the requested quantity is undefined.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// Newton refinement of a critical point did not converge; the root is
    /// bracketed by the reported interval.
    #[error("Newton refinement failed to converge in [{lo}, {hi}] after {iters} iterations")]
    NewtonNoConvergence { lo: f64, hi: f64, iters: usize },

    /// An iterative eigensolver stopped before reaching its tolerance.
    #[error("eigensolver did not converge: residual {residual:.3e} > tol {tol:.3e} after {iters} iterations")]
    EigNoConvergence { residual: f64, tol: f64, iters: usize },

    /// Too few grid-certified eigenvalues survived for a scaling fit.
    #[error("scaling fit needs at least {needed} converged points, only {got} survived grid certification")]
    TooFewConverged { needed: usize, got: usize },

    /// The numerical rank of a null space is ambiguous: the spectrum has no
    /// clear gap at the kernel threshold.
    #[error("ambiguous kernel rank: last kept singular value {kept:.3e} vs first dropped {dropped:.3e} (gap ratio {ratio:.2} < {required:.1}); pass an explicit tolerance to override")]
    AmbiguousRank { kept: f64, dropped: f64, ratio: f64, required: f64 },

    /// A decay fit could not find a log-linear window.
    #[error("decay fit failed: {0}")]
    FitFailure(String),

    /// A quantity the scheme preserves exactly was violated beyond roundoff.
    #[error("invariant violation: {0}")]
    InvariantViolation(String),

    /// Request outside the sizes a backend supports.
    #[error("unsupported size: {0}")]
    UnsupportedSize(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code the CLI reports for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_)
            | Error::GridMismatch(_)
            | Error::Degenerate(_)
            | Error::UnsupportedSize(_)
            | Error::Io(_)
            | Error::Json(_) => 2,
            Error::NewtonNoConvergence { .. }
            | Error::EigNoConvergence { .. }
            | Error::TooFewConverged { .. }
            | Error::AmbiguousRank { .. }
            | Error::FitFailure(_) => 3,
            Error::InvariantViolation(_) => 4,
        }
    }
}
