use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid code: {0}")]
    InvalidCode(String),

    #[error("code file line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("stabilizer group too large to enumerate: 2^{rank} elements exceeds 2^{cap}")]
    GroupTooLarge { rank: usize, cap: usize },

    #[error("lookup table too large: 2^{rows} syndromes exceeds 2^{cap}")]
    TableTooLarge { rows: usize, cap: usize },

    #[error("dense dimension {dim} exceeds cap {cap}")]
    DenseCapExceeded { dim: usize, cap: usize },

    #[error("error basis entries {first} and {second} share a syndrome")]
    DuplicateSyndrome { first: usize, second: usize },

    #[error("error basis must contain the identity")]
    MissingIdentity,

    #[error("operator is not unitary (residual {residual:e})")]
    NotUnitary { residual: f64 },

    #[error("residual {residual:e} exceeds tolerance {tol:e}")]
    ResidualExceeded { residual: f64, tol: f64 },

    #[error("insufficient samples: {got} < {need}")]
    InsufficientSamples { got: usize, need: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("odd number of defects ({0})")]
    OddDefects(usize),

    #[error("no valid extraction schedule: {0}")]
    Unschedulable(String),

    #[error("unsupported gate: {0}")]
    UnsupportedGate(String),

    #[error("not a Clifford tableau: {0}")]
    NonClifford(String),

    #[error("location {0} is not part of the circuit")]
    ForeignLocation(usize),

    #[error("generator of weight {weight} exceeds ancilla budget {budget}")]
    AncillaBudget { weight: usize, budget: usize },

    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
