use thiserror::Error;

/// Errors produced by the solvers, functionals and configuration layer.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("singular dispersion matrix at mode {mode} (k = {wavenumber}): det = {det:e}")]
    SingularDispersion { mode: usize, wavenumber: f64, det: f64 },

    #[error("degenerate state: {0}")]
    DegenerateState(String),

    #[error("stabilizing factor {name} = {value:e} is negative and exponent {exponent} is not an integer")]
    SignDegenerate {
        name: &'static str,
        value: f64,
        exponent: f64,
    },

    #[error("functional `{0}` requires a potential F, which this nonlinearity does not provide")]
    UnsupportedFunctional(&'static str),

    #[error("nonlinearity does not support {0}")]
    UnsupportedNonlinearity(&'static str),

    #[error("singular Jacobian (condition estimate {condition:e})")]
    SingularJacobian { condition: f64 },

    #[error("theta-scheme denominator vanishes at mode {mode} (k = {wavenumber})")]
    StabilityConfiguration { mode: usize, wavenumber: f64 },

    #[error("non-finite values after step {step}")]
    BlowUp { step: usize },

    #[error("cosine basis requires the initial profile to be centred at l = {half_length}, got a0 = {center}")]
    OffCenterProfile { center: f64, half_length: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// Process exit status: 2 for configuration problems, 3 for numerical
    /// failures.
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::InvalidParameter { .. }
            | Self::InvalidGrid(_)
            | Self::GridMismatch(_)
            | Self::OffCenterProfile { .. }
            | Self::Config(_)
            | Self::Io(_)
            | Self::Json(_) => 2,
            _ => 3,
        }
    }
}
