//! Numeric foundations: the floating scalar trait used by losses and
//! probabilities, extended-real helpers, and the weight semirings the
//! automaton and prior accumulate in.

use std::fmt::{Debug, Display};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Float, FromPrimitive, One, ToPrimitive, Zero};

/// Floating point scalar: `f32` or `f64`.
///
/// Losses live in the extended nonnegative reals; `+inf` is the absorbing
/// "impossible" value and `-ln 0 = +inf`.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("f64 always converts to a float scalar")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// `-ln p`, with `-ln 0 = +inf`.
pub fn neg_ln<S: Scalar>(p: S) -> S {
    if p <= S::zero() {
        S::infinity()
    } else {
        -p.ln()
    }
}

/// Stable `ln(sum(exp(x)))`. Empty input or all `-inf` gives `-inf`.
pub fn ln_sum_exp<S: Scalar>(xs: impl IntoIterator<Item = S>) -> S {
    let xs: Vec<S> = xs.into_iter().collect();
    let max = xs.iter().copied().fold(S::neg_infinity(), S::max);
    if max == S::neg_infinity() {
        return max;
    }
    if max == S::infinity() {
        return max;
    }
    let sum = xs
        .iter()
        .fold(S::zero(), |acc, &x| acc + (x - max).exp());
    max + sum.ln()
}

/// Relative tolerance under which two objective values are treated as tied.
pub const TIE_TOLERANCE: f64 = 1e-9;

/// Tie test on extended reals: equal infinities tie, otherwise a relative
/// tolerance of [`TIE_TOLERANCE`].
pub fn nearly_equal<S: Scalar>(a: S, b: S) -> bool {
    if a.is_infinite() || b.is_infinite() {
        return a == b;
    }
    let scale = S::one().max(a.abs()).max(b.abs());
    (a - b).abs() <= S::of(TIE_TOLERANCE) * scale
}

/// A commutative semiring of nonnegative weights.
///
/// `plus` accumulates alternatives, `times` combines the pieces of one
/// derivation. The automaton weight table and the prior normalizer are
/// generic over this, so the same recursion runs in linear floats, in log
/// space, or in exact rationals.
pub trait Semiring: Clone + Debug + PartialEq + Send + Sync {
    fn zero() -> Self;
    fn one() -> Self;
    fn plus(&self, rhs: &Self) -> Self;
    fn times(&self, rhs: &Self) -> Self;
    /// Embeds a strictly positive grammar weight.
    fn from_weight(w: f64) -> Self;
    /// `self / total`; `total` is nonzero.
    fn ratio(&self, total: &Self) -> Self;
    fn is_zero(&self) -> bool;
    /// Natural log of the represented weight as `f64` (`-inf` for zero).
    fn ln_f64(&self) -> f64;
    /// Represented weight as `f64`.
    fn to_f64(&self) -> f64;
}

macro_rules! linear_semiring {
    ($t:ty) => {
        impl Semiring for $t {
            fn zero() -> Self {
                0.0
            }
            fn one() -> Self {
                1.0
            }
            fn plus(&self, rhs: &Self) -> Self {
                self + rhs
            }
            fn times(&self, rhs: &Self) -> Self {
                self * rhs
            }
            fn from_weight(w: f64) -> Self {
                w as $t
            }
            fn ratio(&self, total: &Self) -> Self {
                self / total
            }
            fn is_zero(&self) -> bool {
                *self == 0.0
            }
            fn ln_f64(&self) -> f64 {
                (*self as f64).ln()
            }
            fn to_f64(&self) -> f64 {
                *self as f64
            }
        }
    };
}

linear_semiring!(f32);
linear_semiring!(f64);

/// A weight stored as its natural logarithm.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct LogWeight<S>(pub S);

impl<S: Scalar> LogWeight<S> {
    pub fn ln(&self) -> S {
        self.0
    }
}

impl<S: Scalar> Semiring for LogWeight<S> {
    fn zero() -> Self {
        LogWeight(S::neg_infinity())
    }
    fn one() -> Self {
        LogWeight(S::zero())
    }
    fn plus(&self, rhs: &Self) -> Self {
        let (a, b) = (self.0, rhs.0);
        if a == S::neg_infinity() {
            return *rhs;
        }
        if b == S::neg_infinity() {
            return *self;
        }
        let (hi, lo) = if a > b { (a, b) } else { (b, a) };
        LogWeight(hi + (lo - hi).exp().ln_1p())
    }
    fn times(&self, rhs: &Self) -> Self {
        LogWeight(self.0 + rhs.0)
    }
    fn from_weight(w: f64) -> Self {
        LogWeight(S::of(w.ln()))
    }
    fn ratio(&self, total: &Self) -> Self {
        LogWeight(self.0 - total.0)
    }
    fn is_zero(&self) -> bool {
        self.0 == S::neg_infinity()
    }
    fn ln_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }
    fn to_f64(&self) -> f64 {
        self.ln_f64().exp()
    }
}

impl Semiring for BigRational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn plus(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn times(&self, rhs: &Self) -> Self {
        self * rhs
    }
    /// Exact: every finite `f64` is a dyadic rational.
    fn from_weight(w: f64) -> Self {
        BigRational::from_float(w).unwrap_or_else(|| BigRational::from_integer(BigInt::from(0)))
    }
    fn ratio(&self, total: &Self) -> Self {
        self / total
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn ln_f64(&self) -> f64 {
        Semiring::to_f64(self).ln()
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neg_ln_of_zero_is_infinite() {
        assert_eq!(neg_ln(0.0f64), f64::INFINITY);
        assert_eq!(neg_ln(1.0f64), 0.0);
        assert!((neg_ln(0.5f32) - std::f32::consts::LN_2).abs() < 1e-6);
    }

    #[test]
    fn ln_sum_exp_matches_direct_sum() {
        let xs = [0.1f64.ln(), 0.2f64.ln(), 0.3f64.ln()];
        assert!((ln_sum_exp(xs) - 0.6f64.ln()).abs() < 1e-15);
        assert_eq!(ln_sum_exp(Vec::<f64>::new()), f64::NEG_INFINITY);
        // no underflow far below the f64 range
        let tiny = [-2000.0f64, -2000.0];
        assert!((ln_sum_exp(tiny) - (-2000.0 + 2f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn log_weight_agrees_with_linear() {
        let a = LogWeight::<f64>::from_weight(3.0);
        let b = LogWeight::<f64>::from_weight(5.0);
        assert!((a.plus(&b).to_f64() - 8.0).abs() < 1e-12);
        assert!((a.times(&b).to_f64() - 15.0).abs() < 1e-12);
        assert_eq!(LogWeight::<f64>::zero().plus(&a), a);
        assert!(LogWeight::<f64>::zero().is_zero());
    }

    #[test]
    fn rational_weights_are_exact() {
        let third = BigRational::from_weight(1.0).ratio(&BigRational::from_weight(3.0));
        let sum = third.plus(&third).plus(&third);
        assert_eq!(sum, <BigRational as Semiring>::one());
        assert_eq!(BigRational::from_weight(0.5).times(&BigRational::from_weight(4.0)), BigRational::from_weight(2.0));
    }

    #[test]
    fn ties_respect_infinity() {
        assert!(nearly_equal(f64::INFINITY, f64::INFINITY));
        assert!(!nearly_equal(f64::INFINITY, 1e300));
        assert!(nearly_equal(1.0, 1.0 + 1e-12));
        assert!(!nearly_equal(1.0, 1.0 + 1e-6));
    }
}
