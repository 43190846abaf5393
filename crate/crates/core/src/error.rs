use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("operation is undefined on the empty word")]
    EmptyWord,

    #[error("symbol {symbol} is not a color in [1, {q}]")]
    SymbolOutOfRange { symbol: u8, q: u8 },

    #[error("color map is not a permutation of [1, {q}]")]
    NotAPermutation { q: u8 },

    #[error("need at least {min} colors, got {q}")]
    TooFewColors { q: u8, min: u8 },

    #[error("length {n} outside supported range [{min}, {max}]")]
    LengthOutOfRange { n: usize, min: usize, max: usize },

    #[error("enumeration of {needed} states exceeds budget of {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },

    #[error("arithmetic overflow in count type")]
    Overflow,

    #[error("coordinate sets overlap")]
    OverlappingSets,

    #[error("coordinate {index} is not in [1, {len}]")]
    NotASubset { index: usize, len: usize },

    #[error("kernel has no row for state {0}")]
    MissingRow(String),

    #[error("kernels act on different state spaces (source lengths {left} and {right})")]
    MismatchedStateSpaces { left: usize, right: usize },

    #[error("state {0} has two cyclically adjacent ones")]
    AdjacentOnes(String),

    #[error("no observations")]
    EmptyCounts,

    #[error("significance level {0} is not in (0, 1)")]
    InvalidAlpha(f64),

    #[error("cannot parse {0:?}")]
    Parse(String),

    #[error("distribution has zero total mass")]
    ZeroMass,

    #[error("broken invariant: {0}")]
    BrokenInvariant(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
