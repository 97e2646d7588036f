use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("site {site} out of range for {n} qubits")]
    SiteOutOfRange { site: usize, n: usize },

    #[error("invalid qubit count {0}")]
    InvalidQubitCount(usize),

    #[error("gate sites must be distinct")]
    RepeatedSite,

    #[error("sites {0} and {1} are not adjacent")]
    NonAdjacentSites(usize, usize),

    #[error("gate is not unitary (deviation {0:.3e})")]
    NotUnitary(f64),

    #[error("operator is not Hermitian")]
    NonHermitian,

    #[error("MPO bond dimension {attained} at bond {bond} exceeds cap {cap}")]
    MpoBondOverflow { bond: usize, attained: usize, cap: usize },

    #[error("Krylov exponential did not converge: residual {residual:.3e} at dimension {dim}")]
    KrylovNotConverged { residual: f64, dim: usize },

    #[error("{n} qubits exceeds the dense oracle cap of {cap}")]
    OracleTooLarge { n: usize, cap: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
