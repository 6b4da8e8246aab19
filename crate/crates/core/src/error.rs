use thiserror::Error;

/// Errors produced by the solver, the Monte Carlo engine and the experiment drivers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("belief {value} outside the domain {domain}")]
    Domain { value: f64, domain: &'static str },

    #[error(
        "explicit scheme unstable: dt = {dt:e} exceeds the bound {bound:e} (use theta >= 0.5 or a smaller dt_target)"
    )]
    Unstable { dt: f64, bound: f64 },

    #[error("tridiagonal system is singular or ill-conditioned at row {row}")]
    SingularSystem { row: usize },

    #[error("smooth-fit function has no negative-to-positive sign change; refine the grid")]
    NoSignChange,

    #[error("smooth-fit function changes sign {count} times (first at {first}, second at {second})")]
    MultipleSignChanges { count: usize, first: f64, second: f64 },

    #[error("smooth-fit root {root} lies above the single-right boundary {cap}")]
    BoundaryAboveCap { root: f64, cap: f64 },

    #[error("level {level}: {source}")]
    AtLevel {
        level: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True when the failure is a bad input rather than a numerical breakdown.
    pub fn is_input_error(&self) -> bool {
        match self {
            Error::InvalidParameter(_) | Error::Domain { .. } | Error::Config(_) => true,
            Error::AtLevel { source, .. } => source.is_input_error(),
            _ => false,
        }
    }

    pub fn is_numerical_failure(&self) -> bool {
        match self {
            Error::Unstable { .. }
            | Error::SingularSystem { .. }
            | Error::NoSignChange
            | Error::MultipleSignChanges { .. }
            | Error::BoundaryAboveCap { .. } => true,
            Error::AtLevel { source, .. } => source.is_numerical_failure(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
