//! Exact computation and simulation for the finitely dependent proper
//! colorings of the cycle and of the line.

pub mod analysis;
pub mod chains;
pub mod dist;
pub mod eden;
pub mod error;
pub mod insertion;
pub mod kernel;
pub mod recurrence;
pub mod rng;
pub mod scalar;
pub mod verify;
pub mod word;

pub use dist::{Dist, DistEntry};
pub use error::{Error, Result};
pub use kernel::{kernel_equal, Kernel};
pub use rng::RngStream;
pub use scalar::{Count, Probability};
pub use word::{Color, ColorPerm, Sequence, Word};

/// Arbitrary-precision nonnegative integer for recurrence values.
pub type BigCount = num_bigint::BigUint;
/// Exact probability.
pub type Rational = num_rational::BigRational;
/// Distribution with exact rational probabilities.
pub type ExactDist<S> = Dist<S, Rational>;
/// Distribution with `f64` probabilities, for empirical frequencies.
pub type FloatDist<S> = Dist<S, f64>;
/// Kernel with exact rational transition probabilities.
pub type ExactKernel<S> = Kernel<S, Rational>;
