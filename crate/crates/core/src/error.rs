use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid pmf: {0}")]
    InvalidPmf(String),
    #[error("invalid envelope: {0}")]
    InvalidEnvelope(String),
    #[error("envelope is not summable")]
    NotSummable,
    #[error("tails cannot be compared: {0}")]
    IncomparableTails(String),
    #[error("entropy series remainder cannot be certified")]
    DivergentEntropy,
    #[error("entropy series diverges: {0}")]
    EntropySeriesDiverges(String),
    #[error("absolute continuity violated on cell {0}")]
    AbsoluteContinuityViolated(usize),
    #[error("block lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("level {0} exceeds the maximum distortion {1}")]
    LevelOutOfRange(String, String),
    #[error("invalid distortion: {0}")]
    InvalidDistortion(String),
    #[error("overflow symbol {0} lies inside the truncation window")]
    InvalidOverflowSymbol(u64),
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
    #[error("malformed stream: {0}")]
    MalformedStream(String),
    #[error("stream has {0} trailing payload bits")]
    TrailingBits(u64),
    #[error("source violates the envelope at symbol {0}")]
    EnvelopeViolation(u64),
    #[error("Kraft sum exceeds one: {0}")]
    KraftViolation(String),
    #[error("symbol {0} has zero probability")]
    ZeroProbabilitySymbol(u64),
    #[error("enumeration budget exceeded: {needed} > {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },
    #[error("solver did not converge after {0} iterations")]
    NonConvergence(usize),
    #[error("window too small: {0}")]
    WindowTooSmall(String),
    #[error("symbol {0} is outside the alphabet")]
    SymbolOutOfAlphabet(u64),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
