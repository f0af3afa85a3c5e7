use alloc::string::String;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("window exhausted: generation {gen} needs shift bits below scale {lo}")]
    WindowExhausted { gen: i32, lo: i32 },
    #[error("goodness depth must be at least 2, got {0}")]
    InvalidGoodnessDepth(i32),
    #[error("rectangles are not disjoint")]
    NotDisjoint,
    #[error("overlap rule unavailable")]
    OverlapRuleUnavailable,
    #[error("quadrature did not converge (partial value {partial})")]
    QuadratureFailed { partial: f64 },
    #[error("function does not have zero mean")]
    NonZeroMean,
    #[error("generation mismatch: {0} vs {1}")]
    GenerationMismatch(i32, i32),
    #[error("degenerate modulus: omega(2^-{0}) = 0")]
    DegenerateModulus(i32),
    #[error("cubes belong to different shift sequences")]
    SystemMismatch,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = core::result::Result<T, Error>;
