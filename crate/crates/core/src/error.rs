use thiserror::Error;

/// Errors raised by the workbench.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("resolution level {0} is out of range (0..={max})", max = crate::lattice::MAX_LEVEL)]
    Resolution(u32),

    #[error("interval (alpha={alpha}, j={j}, k={k}) is not inside [0,1)")]
    OutOfDomain { alpha: &'static str, j: u32, k: i64 },

    #[error("scale exhausted: interval at j={0} has no children at this resolution")]
    ScaleExhausted(u32),

    #[error("no admissible dyadic cover of cells [{start},{end}) inside [0,1)")]
    NoCover { start: usize, end: usize },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("malformed input: {0}")]
    Malformed(String),

    #[error("resolution mismatch: expected L={expected}, found L={found}")]
    ResolutionMismatch { expected: u32, found: u32 },

    #[error("function is not normalized: norm {norm} deviates from 1")]
    Normalization { norm: f64 },

    #[error("sparseness violated at {witness}")]
    Sparsity { witness: String },

    #[error("magic-lemma hypothesis violated at {witness}")]
    Hypothesis { witness: String },

    #[error("weight generation failed after {rounds} rounds")]
    Generation { rounds: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parameter(msg.into()))
}
