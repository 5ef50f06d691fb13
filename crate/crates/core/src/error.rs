use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not squarefree")]
    NotSquarefree(i64),
    #[error("invalid field parameters: {0}")]
    InvalidField(String),
    #[error("integral basis verification failed for {0}")]
    BasisVerification(String),
    #[error("field mismatch: {0}")]
    FieldMismatch(String),
    #[error("not a subfield: {0}")]
    NotSubfield(String),
    #[error("zero ideal")]
    ZeroIdeal,
    #[error("{0} is not an automorphism of the group")]
    NotAutomorphism(String),
    #[error("principality search exceeded its budget ({0} nodes)")]
    Undecided(u64),
    #[error("class group oracle mismatch for {field}: relations give {found}, oracle {oracle}")]
    OracleMismatch {
        field: String,
        found: String,
        oracle: String,
    },
    #[error("ideal class reduction stalled for {0}")]
    ReductionStalled(String),
    #[error("ideal is not Galois invariant")]
    NotInvariant,
    #[error("ideal meets S at {0}")]
    MeetsS(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("internal consistency failure: {0}")]
    Internal(String),
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub fn is_undecided(&self) -> bool {
        matches!(self, Error::Undecided(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
