use thiserror::Error;

/// Every failure the toolkit reports.
///
/// Variants split into two families: precondition/parse failures (bad input,
/// caller must change something) and numeric failures (the computation ran but
/// could not produce a trustworthy answer). [`Error::is_usage`] tells them apart.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("expected {expected} component expressions, found {found}")]
    Arity { expected: usize, found: usize },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },
    #[error("point {point:?} lies outside the field domain")]
    Domain { point: Vec<f64> },
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("unknown gallery id `{0}`")]
    UnknownGalleryId(String),
    #[error("bump function is negative ({value}) at {at:?}")]
    NegativeBump { at: Vec<f64>, value: f64 },
    #[error("duplicate point at index {0}")]
    DuplicatePoint(usize),
    #[error("field attains the center value on the loop at t = {t}")]
    ZeroOnLoop { t: f64 },
    #[error("angle unwrap is ambiguous between samples {index} and {}", index + 1)]
    UnwrapAmbiguity { index: usize },
    #[error("winding did not stabilise before {samples} samples")]
    NoConvergence { samples: usize },
    #[error("index result is not valid")]
    InvalidResult,
    #[error("field comes within {margin:e} of the target on the boundary")]
    BoundaryZero { margin: f64 },
    #[error("preimage {point:?} has near-zero Jacobian determinant {det:e}")]
    SingularPreimage { point: Vec<f64>, det: f64 },
    #[error("seed {0:?} lies outside the grid box")]
    SeedOutsideBox(Vec<f64>),
    #[error("labeling has a single component")]
    SingleComponent,
    #[error("no radius in the list certifies discreteness")]
    NoRadiusFound,
    #[error("grid dimension {0} is not supported (2 or 3 only)")]
    DimensionTooHigh(usize),
    #[error("calibration failed while searching for {0}")]
    CalibrationFailure(String),
    #[error("no solution found")]
    NoSolutionFound,
    #[error("{0} distinct solutions found where one was expected")]
    MultipleSolutions(usize),
    #[error("only {found} samples within delta = {delta}")]
    InsufficientSamples { delta: f64, found: usize },
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// True for errors caused by the caller's input rather than by a numeric breakdown.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::Syntax { .. }
                | Error::Arity { .. }
                | Error::UnknownIdentifier { .. }
                | Error::Domain { .. }
                | Error::Precondition(_)
                | Error::UnknownGalleryId(_)
                | Error::NegativeBump { .. }
                | Error::DuplicatePoint(_)
                | Error::SeedOutsideBox(_)
                | Error::DimensionTooHigh(_)
                | Error::InvalidResult
                | Error::Io(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
