use thiserror::Error;

/// Errors raised by the solver, diagnostics and experiment layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("shape mismatch: expected {expected} values, got {got}")]
    ShapeMismatch { expected: usize, got: usize },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("negative time {0}")]
    NegativeTime(f64),

    #[error("initial data is not divergence-free (relative divergence {0:e})")]
    NotDivergenceFree(f64),

    #[error("CFL violation: max|u|*dt/dx = {courant:.4} exceeds {limit}")]
    CflViolation { courant: f64, limit: f64 },

    #[error("time {t} outside trajectory range [{start}, {end}]")]
    TimeOutOfRange { t: f64, start: f64, end: f64 },

    #[error("trajectories do not share a common time lattice")]
    TimeLatticeMismatch,

    #[error("Picard iteration undecided after {iterations} iterations (last difference {last_difference:e})")]
    MaxIterations {
        iterations: usize,
        last_difference: f64,
    },

    #[error("ball of radius {radius} does not fit the periodic window (limit {limit})")]
    BallTooLarge { radius: f64, limit: f64 },

    #[error("insufficient temporal resolution: snapshot spacing {spacing} exceeds {limit}")]
    InsufficientTemporalResolution { spacing: f64, limit: f64 },

    #[error("trajectory horizon {horizon} is shorter than the required {needed}")]
    HorizonTooShort { needed: f64, horizon: f64 },

    #[error("too few snapshots: need {needed}, found {found}")]
    TooFewSnapshots { needed: usize, found: usize },

    #[error("invalid bracket: {0}")]
    InvalidBracket(String),

    #[error("every run in the bracket is under-resolved; use a finer grid")]
    AllUnderresolved,

    #[error("perturbation sequence is not weakly null: {0}")]
    NotWeaklyNull(String),

    #[error("snapshot format error at byte offset {offset}: {message}")]
    Snapshot { offset: u64, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
