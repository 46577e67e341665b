//! Scalar types accepted by group-algebra elements and kernels.
//!
//! Group tables are always integral; coefficients may be real (`f32`, `f64`),
//! complex, or exact rationals. Everything that needs an eigensolver works in
//! `f64` and converts through [`Scalar::re`] / [`Scalar::im`].

use std::fmt::Debug;

use num_complex::Complex;
use num_rational::Ratio;
use num_traits::{Num, NumAssign, ToPrimitive};

/// Coefficient field for [`GroupAlgElement`](crate::GroupAlgElement) and [`Kernel`](crate::Kernel).
pub trait Scalar:
    Num + NumAssign + Copy + Clone + Debug + PartialEq + Send + Sync + 'static
{
    /// Complex conjugate (identity on real types).
    fn conj(self) -> Self;
    /// Modulus as `f64`.
    fn modulus(self) -> f64;
    fn re(self) -> f64;
    fn im(self) -> f64;
    fn from_i64(v: i64) -> Self;
    /// Nearest representable value; exact types round to a fraction.
    fn from_f64(v: f64) -> Self;
}

macro_rules! real_float {
    ($t:ty) => {
        impl Scalar for $t {
            #[inline]
            fn conj(self) -> Self {
                self
            }
            #[inline]
            fn modulus(self) -> f64 {
                (self as f64).abs()
            }
            #[inline]
            fn re(self) -> f64 {
                self as f64
            }
            #[inline]
            fn im(self) -> f64 {
                0.0
            }
            #[inline]
            fn from_i64(v: i64) -> Self {
                v as $t
            }
            #[inline]
            fn from_f64(v: f64) -> Self {
                v as $t
            }
        }
    };
}

real_float!(f32);
real_float!(f64);

macro_rules! complex_float {
    ($t:ty) => {
        impl Scalar for Complex<$t> {
            #[inline]
            fn conj(self) -> Self {
                Complex::conj(&self)
            }
            #[inline]
            fn modulus(self) -> f64 {
                self.norm() as f64
            }
            #[inline]
            fn re(self) -> f64 {
                self.re as f64
            }
            #[inline]
            fn im(self) -> f64 {
                self.im as f64
            }
            #[inline]
            fn from_i64(v: i64) -> Self {
                Complex::new(v as $t, 0.0)
            }
            #[inline]
            fn from_f64(v: f64) -> Self {
                Complex::new(v as $t, 0.0)
            }
        }
    };
}

complex_float!(f32);
complex_float!(f64);

impl Scalar for Ratio<i64> {
    fn conj(self) -> Self {
        self
    }
    fn modulus(self) -> f64 {
        num_traits::Signed::abs(&self).to_f64().unwrap_or(f64::NAN)
    }
    fn re(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
    fn im(self) -> f64 {
        0.0
    }
    fn from_i64(v: i64) -> Self {
        Ratio::from_integer(v)
    }
    fn from_f64(v: f64) -> Self {
        Ratio::approximate_float(v).unwrap_or_else(|| Ratio::from_integer(0))
    }
}
