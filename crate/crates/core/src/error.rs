use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("operator is not Hermitian (max |M - M^dagger| = {deviation:e})")]
    NonHermitianInput { deviation: f64 },

    #[error("operator is not unitary (max |U^dagger U - I| = {deviation:e})")]
    NotUnitary { deviation: f64 },

    #[error("state is not normalized (norm = {norm})")]
    UnnormalizedState { norm: f64 },

    #[error("cannot build a projector onto the zero vector")]
    ZeroVector,

    #[error("observables do not form a context of dimension {dimension}")]
    NotAContext { dimension: usize },

    #[error("invalid beam splitter mode pair ({0}, {1})")]
    InvalidModePair(usize, usize),

    #[error("invalid outcome distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid ternary digit {0}")]
    InvalidDigit(u8),

    #[error("invalid bit {0}")]
    InvalidBit(u8),

    #[error("corrupt file: {0}")]
    CorruptFile(String),

    #[error("string of length {n} has no complete block of length {m}")]
    EmptyBlocks { n: u64, m: u32 },

    #[error("string of length {n} is too short for normality analysis (need at least 4)")]
    StringTooShort { n: u64 },

    #[error("enumeration over 2^{m} strings exceeds the guard 2^{max}")]
    TooLarge { m: u32, max: u32 },

    #[error("expected probability of category {category} is zero but {observed} observations fell in it")]
    DegenerateExpected { category: usize, observed: u64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
