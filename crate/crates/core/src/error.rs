use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("angle must be finite (theta = {theta}, phi = {phi})")]
    NonFiniteAngle { theta: f64, phi: f64 },

    #[error("polar angle {0} outside [0, pi]")]
    ThetaOutOfRange(f64),

    #[error("party count {0} is below the minimum of 2")]
    TooFewParties(usize),

    #[error("qubit count {n} outside the dense range 1..={cap}")]
    QubitCountOutOfRange { n: usize, cap: usize },

    #[error("qubit index {index} out of range for {n} qubits")]
    QubitIndex { index: usize, n: usize },

    #[error("setting-choice word {word:#b} addresses more than {n} parties")]
    WordOutOfRange { word: u32, n: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("degree of decoherence {0} outside [0, 1]")]
    InvalidProbability(f64),

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("unknown channel '{0}' (expected depolarizing, dephasing or dissipation)")]
    UnknownChannel(String),

    #[error("threshold tolerance {0} is below the supported minimum of 1e-6")]
    ToleranceTooSmall(f64),

    #[error("optimizer did not converge at p = {p}")]
    NotConverged { p: f64 },

    #[error("no violation at p = 0; nothing to bracket")]
    NoViolation,

    #[error("malformed expansion dump line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;
