use thiserror::Error;

/// A single violated invariant found while validating channel data.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Violation {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },
    #[error("trace is {trace}, expected 1")]
    NonUnitTrace { trace: f64 },
    #[error("negative eigenvalue {value:e}")]
    NegativeEigenvalue { value: f64 },
    #[error("V is not unitary (Frobenius deviation {deviation:e})")]
    NotUnitary { deviation: f64 },
    #[error("V^{order} differs from the identity (Frobenius deviation {deviation:e})")]
    OrderViolation { order: usize, deviation: f64 },
    #[error("alphabet size must be at least 1")]
    EmptyAlphabet,
}

impl Violation {
    pub fn code(&self) -> &'static str {
        match self {
            Violation::NotSquare { .. } => "NOT_SQUARE",
            Violation::DimensionMismatch { .. } => "DIMENSION_MISMATCH",
            Violation::NotHermitian { .. } => "NOT_HERMITIAN",
            Violation::NonUnitTrace { .. } => "W1_TRACE",
            Violation::NegativeEigenvalue { .. } => "W1_NOT_PSD",
            Violation::NotUnitary { .. } => "V_NOT_UNITARY",
            Violation::OrderViolation { .. } => "V_ORDER",
            Violation::EmptyAlphabet => "EMPTY_ALPHABET",
        }
    }
}

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("{}", join_violations(.0))]
    Validation(Vec<Violation>),

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("eigenvalue {value:e} is below the PSD tolerance")]
    NegativeEigenvalue { value: f64 },

    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: String,
        value: f64,
        reason: &'static str,
    },

    #[error("unknown preset `{0}` (expected bsc, bec, pure-hadamard or mixed-hadamard)")]
    UnknownPreset(String),

    #[error("input symbol {symbol} outside 1..={alphabet}")]
    SymbolOutOfRange { symbol: usize, alphabet: usize },

    #[error("empty input sequence")]
    EmptySequence,

    #[error("probability vector invalid: {0}")]
    InvalidDistribution(String),

    #[error("rate {rate} outside the valid range ({lo}, {hi})")]
    RateOutOfDomain { rate: f64, lo: f64, hi: f64 },

    #[error("{what} did not converge after {iterations} iterations (best value {best}, residual {residual:e})")]
    NonConvergence {
        what: &'static str,
        iterations: usize,
        best: f64,
        residual: f64,
    },

    #[error("maximizer escaped past s = {cap} at rate {rate}; rate too close to R_inf")]
    Divergence { rate: f64, cap: f64 },

    #[error("support collapse: Tr[W_x^a sigma^(1-a)] = {overlap:e} for symbol {symbol}")]
    SupportCollapse { symbol: usize, overlap: f64 },

    #[error("argument {z} outside the achievable slope range [{lo}, {hi}]")]
    NotBracketable { z: f64, lo: f64, hi: f64 },

    #[error("tilted support is empty")]
    EmptyTiltedSupport,

    #[error("merged support of {size} atoms exceeds cap {cap}; use a Monte Carlo estimate instead")]
    SupportBlowup { size: usize, cap: usize },

    #[error("dimension {dim} exceeds cap {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("check failed: {0}")]
    CheckFailed(String),

    #[error("io error on {path}: {message}")]
    Io { path: String, message: String },

    #[error("malformed channel spec: {0}")]
    Parse(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}

fn join_violations(v: &[Violation]) -> String {
    let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
    format!("invalid channel: {}", parts.join("; "))
}

impl Error {
    /// Stable machine-readable code used by the CLI.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Validation(v) => v.first().map(Violation::code).unwrap_or("INVALID"),
            Error::DimensionMismatch { .. } => "DIMENSION_MISMATCH",
            Error::NegativeEigenvalue { .. } => "NOT_PSD",
            Error::InvalidParameter { .. } => "BAD_PARAMETER",
            Error::UnknownPreset(_) => "UNKNOWN_PRESET",
            Error::SymbolOutOfRange { .. } => "SYMBOL_RANGE",
            Error::EmptySequence => "EMPTY_SEQUENCE",
            Error::InvalidDistribution(_) => "BAD_DISTRIBUTION",
            Error::RateOutOfDomain { .. } => "RATE_DOMAIN",
            Error::NonConvergence { .. } => "NON_CONVERGENCE",
            Error::Divergence { .. } => "DIVERGENCE",
            Error::SupportCollapse { .. } => "SUPPORT_COLLAPSE",
            Error::NotBracketable { .. } => "NOT_BRACKETABLE",
            Error::EmptyTiltedSupport => "EMPTY_TILTED_SUPPORT",
            Error::SupportBlowup { .. } => "SUPPORT_BLOWUP",
            Error::DimensionCap { .. } => "DIMENSION_CAP",
            Error::CheckFailed(_) => "CHECK_FAILED",
            Error::Io { .. } => "IO",
            Error::Parse(_) => "PARSE",
            Error::Config(_) => "CONFIG",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
