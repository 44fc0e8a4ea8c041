use thiserror::Error;

/// Errors produced by sampling, channel assembly, spectrum analysis and
/// scenario handling.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported geometry: {0}")]
    UnsupportedGeometry(String),

    #[error("unsupported configuration: {0}")]
    UnsupportedConfiguration(String),

    #[error("kernel evaluated at non-positive distance r = {0}")]
    SingularKernel(f64),

    #[error("regions overlap: minimum sample distance {min_distance:e} m is below the guard {guard:e} m")]
    RegionsOverlap { min_distance: f64, guard: f64 },

    #[error("regions are not mutually visible: {0}")]
    NotVisible(String),

    #[error("degenerate spectrum: all eigenvalues are zero")]
    DegenerateSpectrum,

    #[error("insufficient spectrum: {needed} values above the floor are required, got {got}")]
    InsufficientSpectrum { needed: usize, got: usize },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("quadrature did not converge: estimated error {error:e} exceeds tolerance {tolerance:e}")]
    QuadratureNonConvergence { error: f64, tolerance: f64 },

    #[error("region would need {estimated} samples, above the cap of {cap} per side")]
    TooLarge { estimated: usize, cap: usize },

    #[error("config error at {location}: {message}")]
    Config { location: String, message: String },

    #[error("scenario `{scenario}`: {source}")]
    Scenario {
        scenario: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors that stem from the input description rather than
    /// from the numerics.
    pub fn is_config_error(&self) -> bool {
        match self {
            Error::InvalidArgument(_)
            | Error::UnsupportedGeometry(_)
            | Error::UnsupportedConfiguration(_)
            | Error::RegionsOverlap { .. }
            | Error::NotVisible(_)
            | Error::TooLarge { .. }
            | Error::Config { .. } => true,
            Error::Scenario { source, .. } => source.is_config_error(),
            _ => false,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
