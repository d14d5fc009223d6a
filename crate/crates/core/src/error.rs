use thiserror::Error;

/// Errors raised by the simulation, metrology and optimization layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("negative rate {rate} for {channel}")]
    NegativeRate { channel: &'static str, rate: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("slice index {index} out of range for {slices} slices")]
    SliceOutOfRange { index: usize, slices: usize },

    /// Propagation or estimation produced a result that violates a physical
    /// invariant beyond tolerance.
    #[error("numerical failure{}: {detail}", time.map(|t| format!(" at T = {t} s")).unwrap_or_default())]
    Numerical { time: Option<f64>, detail: String },

    #[error("optimizer: {0}")]
    Optimizer(String),
}

impl Error {
    pub(crate) fn numerical(detail: impl Into<String>) -> Self {
        Error::Numerical {
            time: None,
            detail: detail.into(),
        }
    }

    /// Attach the encoding time to a numerical failure that does not carry one yet.
    pub fn at_time(self, t: f64) -> Self {
        match self {
            Error::Numerical { time: None, detail } => Error::Numerical {
                time: Some(t),
                detail,
            },
            other => other,
        }
    }

    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Numerical { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
