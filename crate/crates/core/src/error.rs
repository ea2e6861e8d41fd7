use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not Hermitian (max deviation {deviation:e}, tolerance {tolerance:e})")]
    NotHermitian { deviation: f64, tolerance: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("resonant drive: detuning equals the frequency of mode {mode}")]
    ResonantDrive { mode: usize },

    #[error("unsupported argument: {0}")]
    UnsupportedArgument(String),

    #[error("temperature must be positive, got {0} K")]
    NonpositiveTemperature(f64),

    #[error("effective frequency is zero; quantity is undefined")]
    DegenerateOmega,

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("time grid needs at least {required} points, got {found}")]
    GridTooSmall { required: usize, found: usize },

    #[error("no reversal possible: {0}")]
    NoReversalPossible(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("unknown engine `{0}`")]
    UnknownEngine(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl Error {
    /// Process exit code for the CLI: 1 config, 2 engine/precondition.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::UnknownEngine(_) | Error::Io(_) => 1,
            _ => 2,
        }
    }
}
