use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid layout: {0}")]
    InvalidLayout(String),

    #[error("unknown subsystem label `{0}`")]
    UnknownLabel(String),

    #[error("subsystem label `{0}` occurs more than once in the layout")]
    AmbiguousLabel(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("operator is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("operation requires qubit subsystems only, found dimension {0}")]
    NotQubits(usize),

    #[error("projection outcome has probability {0:.3e}, below 1e-12")]
    ImpossibleOutcome(f64),

    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("dense simulation limited to {limit} modes, requested {requested}; use the projected or process-map path")]
    DenseLimitExceeded { limit: usize, requested: usize },

    #[error("histogram would need {requested} bins, above the {limit} bin budget")]
    BinBudget { requested: u128, limit: u128 },

    #[error("POVM completeness deficit {deficit:.3e} exceeds tolerance {tolerance:.1e}")]
    Incomplete { deficit: f64, tolerance: f64 },

    #[error("histogram is empty")]
    EmptyHistogram,

    #[error("matrix is singular: {0}")]
    Singular(String),

    #[error("least-squares system is rank deficient: {0}")]
    RankDeficient(String),

    #[error("no convergence after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
