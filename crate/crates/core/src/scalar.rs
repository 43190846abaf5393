//! Scalar abstractions.
//!
//! Counting code (the cycle and line recurrences, partition functions) is
//! generic over [`Count`], so the same routines run on machine integers when
//! the values are known to be small and on [`num_bigint::BigUint`] otherwise.
//! Distributions and kernels are generic over [`Probability`]; the exact
//! instantiation is [`num_rational::BigRational`], while `f64`/`f32` are used
//! for empirical frequencies.

use std::fmt::{Debug, Display};
use std::ops::{Add, Div, Mul, Sub};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{
    CheckedAdd, CheckedMul, CheckedSub, FromPrimitive, One, Signed, ToPrimitive, Zero,
};

/// Nonnegative integer used for recurrence values and partition functions.
///
/// Overflow is reported through the `Checked*` operations, never wrapped.
pub trait Count:
    Clone
    + Debug
    + Display
    + Ord
    + Zero
    + One
    + CheckedAdd
    + CheckedSub
    + CheckedMul
    + FromPrimitive
    + Send
    + Sync
    + 'static
{
    fn to_biguint(&self) -> BigUint;

    fn try_from_biguint(value: &BigUint) -> Option<Self>;
}

impl Count for u64 {
    fn to_biguint(&self) -> BigUint {
        BigUint::from(*self)
    }

    fn try_from_biguint(value: &BigUint) -> Option<Self> {
        value.to_u64()
    }
}

impl Count for u128 {
    fn to_biguint(&self) -> BigUint {
        BigUint::from(*self)
    }

    fn try_from_biguint(value: &BigUint) -> Option<Self> {
        value.to_u128()
    }
}

impl Count for BigUint {
    fn to_biguint(&self) -> BigUint {
        self.clone()
    }

    fn try_from_biguint(value: &BigUint) -> Option<Self> {
        Some(value.clone())
    }
}

/// Probability values. Exact for rationals, approximate for floats.
pub trait Probability:
    Clone
    + Debug
    + PartialEq
    + PartialOrd
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Send
    + Sync
    + 'static
{
    /// True when arithmetic and equality are exact.
    const EXACT: bool;

    fn from_ratio(numerator: &BigUint, denominator: &BigUint) -> Self;

    fn from_u64_ratio(numerator: u64, denominator: u64) -> Self {
        Self::from_ratio(&BigUint::from(numerator), &BigUint::from(denominator))
    }

    fn to_f64(&self) -> f64;

    fn abs_diff(&self, other: &Self) -> Self {
        if self >= other {
            self.clone() - other.clone()
        } else {
            other.clone() - self.clone()
        }
    }
}

impl Probability for BigRational {
    const EXACT: bool = true;

    fn from_ratio(numerator: &BigUint, denominator: &BigUint) -> Self {
        BigRational::new(
            BigInt::from(numerator.clone()),
            BigInt::from(denominator.clone()),
        )
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn abs_diff(&self, other: &Self) -> Self {
        (self - other).abs()
    }
}

impl Probability for f64 {
    const EXACT: bool = false;

    fn from_ratio(numerator: &BigUint, denominator: &BigUint) -> Self {
        let q = BigRational::from_ratio(numerator, denominator);
        ToPrimitive::to_f64(&q).unwrap_or(f64::NAN)
    }

    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Probability for f32 {
    const EXACT: bool = false;

    fn from_ratio(numerator: &BigUint, denominator: &BigUint) -> Self {
        <f64 as Probability>::from_ratio(numerator, denominator) as f32
    }

    fn to_f64(&self) -> f64 {
        f64::from(*self)
    }
}

/// Renders a rational as `(numerator, denominator)` decimal strings.
pub fn rational_parts(value: &BigRational) -> (String, String) {
    (value.numer().to_string(), value.denom().to_string())
}

/// Renders a rational as `"p/q"`, or `"p"` for integers.
pub fn rational_string(value: &BigRational) -> String {
    if value.denom().is_one() {
        value.numer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

pub fn parse_rational(num: &str, den: &str) -> Option<BigRational> {
    let n: BigInt = num.trim().parse().ok()?;
    let d: BigInt = den.trim().parse().ok()?;
    if d.is_zero() {
        return None;
    }
    Some(BigRational::new(n, d))
}

/// Falling factorial `q (q-1) ... (q-m+1)`.
pub fn falling_factorial<C: Count>(q: u64, m: u64) -> Option<C> {
    let mut acc = C::one();
    for j in 0..m {
        let factor = C::from_u64(q.checked_sub(j)?)?;
        acc = acc.checked_mul(&factor)?;
    }
    Some(acc)
}

pub fn factorial<C: Count>(n: u64) -> Option<C> {
    falling_factorial(n, n)
}
