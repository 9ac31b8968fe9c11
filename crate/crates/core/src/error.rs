use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("inversion of zero in GF({q})")]
    ZeroInversion { q: u32 },

    #[error("operands from different fields: GF({left}) vs GF({right})")]
    MixedFields { left: u32, right: u32 },

    #[error("ambient dimension mismatch: {left} vs {right}")]
    AmbientMismatch { left: usize, right: usize },

    #[error("{0} is not prime")]
    NotPrime(u32),

    #[error("no bundled modulus for GF({q}); extension fields are supported for q <= 16")]
    UnsupportedField { q: u32 },

    #[error("polynomial is not primitive: {witness}")]
    NotPrimitive { witness: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("row {row} of the decoded matrix is not in reduced row echelon position")]
    NonCanonicalRow { row: usize },

    #[error("malformed grid path: {0}")]
    MalformedPath(String),

    #[error("flag is not nested: U1 is not a subspace of U2")]
    NotNested,

    #[error("join precondition violated: {0}")]
    JoinPrecondition(String),

    #[error("partition check failed: {0}")]
    PartitionCheck(String),

    #[error("verification failed: {0}")]
    Verification(String),

    #[error("64-bit counter overflow; retry with the big-integer path")]
    CounterOverflow,

    #[error("generator matrix is singular")]
    SingularGenerator,

    #[error("internal consistency check failed: {0}")]
    InternalConsistency(String),

    #[error("search budget exhausted; result is partial")]
    BudgetExhausted,

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
