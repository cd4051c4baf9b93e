use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("genus must be at least 2, got {0}")]
    InvalidGenus(u32),

    #[error("generator index {index} out of range for genus {genus}")]
    GeneratorOutOfRange { index: usize, genus: u32 },

    #[error("cannot parse word: {0}")]
    WordParse(String),

    #[error("the identity word is not allowed here")]
    IdentityWord,

    #[error("exponent must be at least 1, got {0}")]
    InvalidExponent(i64),

    #[error("genus mismatch: expected {expected}, found {found}")]
    GenusMismatch { expected: u32, found: u32 },

    #[error("permutation size mismatch: {0} vs {1}")]
    SizeMismatch(usize, usize),

    #[error("not a permutation: {0}")]
    InvalidPermutation(String),

    #[error("cycle length {d} out of range 1..={n}")]
    CycleLengthOutOfRange { d: usize, n: usize },

    #[error("tuple does not satisfy the surface relator")]
    RelatorViolated,

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("partition sizes differ: {0} vs {1}")]
    PartitionSizeMismatch(usize, usize),

    #[error("count is not a non-negative integer: {0}")]
    NonIntegralCount(String),

    #[error("budget exceeded: {what} needs {needed}, limit is {limit}")]
    BudgetExceeded {
        what: &'static str,
        needed: String,
        limit: String,
    },

    #[error("inconsistent sampler weights: {0}")]
    InconsistentWeights(String),

    #[error("missing fixed-point data for power {0}")]
    MissingDivisor(u32),

    #[error("cannot parse observable spec: {0}")]
    SpecParse(String),

    #[error("arithmetic overflow in {0}")]
    Overflow(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
