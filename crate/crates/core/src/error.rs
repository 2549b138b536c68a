use thiserror::Error;

use crate::discretization::Field;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain an operation is defined on.
    #[error("{0}")]
    Domain(String),

    /// A potential or profile could not be built from the given data.
    #[error("{0}")]
    Construction(String),

    /// Two independent routes to the same quantity disagree.
    #[error("{0}")]
    Accuracy(String),

    /// Newton or the outer offset loop failed; carries the last iterate when one exists.
    #[error("{reason}")]
    NonConvergence {
        reason: String,
        last: Option<Box<Field>>,
    },

    /// The iterate left the band |u| <= 1.1.
    #[error("iterate blew up: max |u| = {max_abs}")]
    BlowUp { max_abs: f64 },

    #[error("linear solver stalled after {iterations} iterations (relative residual {relative_residual:e})")]
    LinearSolver {
        iterations: usize,
        relative_residual: f64,
    },

    #[error("field has no sign change")]
    EmptyNodalSet,

    /// Every candidate mode was discarded as a truncation artifact.
    #[error("{0}")]
    Inconclusive(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Short machine-readable category used in CLI diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::Construction(_) => "construction",
            Error::Accuracy(_) => "accuracy",
            Error::NonConvergence { .. } => "nonconvergence",
            Error::BlowUp { .. } => "blowup",
            Error::LinearSolver { .. } => "linear-solver",
            Error::EmptyNodalSet => "empty-nodal-set",
            Error::Inconclusive(_) => "inconclusive",
            Error::Parse { .. } => "parse",
            Error::Io(_) => "io",
        }
    }

    /// True for failures of an iterative method, as opposed to bad input.
    pub fn is_nonconvergence(&self) -> bool {
        matches!(
            self,
            Error::NonConvergence { .. } | Error::BlowUp { .. } | Error::LinearSolver { .. }
        )
    }
}
