use thiserror::Error;

/// Errors raised by the inference toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("degenerate response: {0}")]
    DegenerateResponse(String),

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    /// The SMO solver hit its iteration cap; `alpha` is the best iterate found.
    #[error("QP solver stopped after {iterations} iterations with KKT violation {violation:.3e}")]
    Convergence {
        iterations: usize,
        violation: f64,
        alpha: Vec<f64>,
    },

    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:.3e})")]
    EigenConvergence { sweeps: usize, off_norm: f64 },

    #[error("root finding failed: {0}")]
    Root(String),

    #[error("grid error: {0}")]
    Grid(String),

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("inference failed: {0}")]
    Inference(String),

    #[error("malformed SDR map container: {0}")]
    Format(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// True for errors caused by bad input rather than numerical breakdown.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Dimension(_) | Error::Argument(_) | Error::Format(_) | Error::Io(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
