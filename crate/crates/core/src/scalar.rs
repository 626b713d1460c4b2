//! Scalar bound for the generic layers of the crate.

use num_traits::Num;
use std::fmt::{Debug, Display, LowerExp};
use std::ops::Neg;

/// Real scalar usable as a matrix entry.
pub trait Scalar:
    Num + Copy + PartialOrd + Neg<Output = Self> + Debug + Display + LowerExp + Send + Sync + 'static
{
    /// Converts an `f64` value into `Self`.
    fn of(x: f64) -> Self;

    /// Nearest `f64`.
    fn to_f64(self) -> f64;

    fn abs(self) -> Self;

    fn sqrt(self) -> Self;

    fn is_finite(self) -> bool;

    fn infinity() -> Self;

    /// Converts an integer into `Self`.
    fn int(k: i64) -> Self {
        Self::of(k as f64)
    }

    fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    /// Integer power by repeated squaring.
    fn powi(self, k: i32) -> Self {
        let mut base = if k < 0 { Self::one() / self } else { self };
        let mut e = k.unsigned_abs();
        let mut acc = Self::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            e >>= 1;
        }
        acc
    }
}

macro_rules! native {
    ($t:ty) => {
        impl Scalar for $t {
            fn of(x: f64) -> Self {
                x as $t
            }

            fn to_f64(self) -> f64 {
                f64::from(self)
            }

            fn abs(self) -> Self {
                <$t>::abs(self)
            }

            fn sqrt(self) -> Self {
                <$t>::sqrt(self)
            }

            fn is_finite(self) -> bool {
                <$t>::is_finite(self)
            }

            fn infinity() -> Self {
                <$t>::INFINITY
            }

            fn max(self, other: Self) -> Self {
                <$t>::max(self, other)
            }

            fn powi(self, k: i32) -> Self {
                <$t>::powi(self, k)
            }
        }
    };
}

native!(f32);
native!(f64);

/// 256-bit binary float for evaluations whose cancellation exceeds `f64`.
pub type Wide = f256::f256;

impl Scalar for Wide {
    fn of(x: f64) -> Self {
        Wide::from(x)
    }

    fn to_f64(self) -> f64 {
        if !Wide::is_finite(self) {
            return if self.is_nan() {
                f64::NAN
            } else if self.is_sign_negative() {
                f64::NEG_INFINITY
            } else {
                f64::INFINITY
            };
        }
        let (sign, exp, (hi, lo)) = self.as_sign_exp_signif();
        // value = (-1)^sign * (hi 2^128 + lo) * 2^exp; the two-step scaling
        // keeps the intermediate within range.
        let signif = hi as f64 * 2f64.powi(128) + lo as f64;
        let half = exp / 2;
        let v = signif * 2f64.powi(half) * 2f64.powi(exp - half);
        if sign == 1 {
            -v
        } else {
            v
        }
    }

    fn abs(self) -> Self {
        Wide::abs(&self)
    }

    fn sqrt(self) -> Self {
        Wide::sqrt(self)
    }

    fn is_finite(self) -> bool {
        Wide::is_finite(self)
    }

    fn infinity() -> Self {
        Wide::INFINITY
    }

    fn int(k: i64) -> Self {
        Wide::from(k)
    }
}
