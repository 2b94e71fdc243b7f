use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("matrix rank n = {0} is not supported (expected 2 or 3)")]
    UnsupportedRank(usize),
    #[error("{what} needs {size} elements, over the enumeration budget of {budget}")]
    BudgetExceeded {
        what: &'static str,
        size: u128,
        budget: u64,
    },
    #[error("element does not lie in the subfield {0}")]
    NotInSubfield(&'static str),
    #[error("multiplicative character evaluated at zero")]
    ZeroArgument,
    #[error("invalid z override g^{0}: z must lie in E but not in F")]
    InvalidZ(u64),
    #[error("theta_{0} is not regular (Frobenius orbit smaller than n)")]
    NonRegular(u64),
    #[error("matrix is singular")]
    Singular,
    #[error("matrix is not upper unipotent")]
    NotUnipotent,
    #[error("division by the zero polynomial")]
    ZeroDivisor,
    #[error("unsupported: {0}")]
    Unsupported(&'static str),
    #[error("distinction criteria disagree: {0}")]
    CriteriaDisagree(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("golden mismatch: {0}")]
    GoldenMismatch(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
