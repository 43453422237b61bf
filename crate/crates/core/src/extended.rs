//! Binary fixed-point numbers on top of `BigInt`.
//!
//! Used where a series has to be summed beyond its radius of convergence:
//! the partial sums then grow like `ρ^{-n}` and the Padé (epsilon) table
//! cancels them back down to `O(1)`, which needs far more than 53 bits.
//! Inputs are converted exactly from `f64` (every double is a dyadic
//! rational), so the only rounding is the truncation to [`FRAC_BITS`]
//! fractional bits in products and quotients.

use core::cmp::Ordering;
use core::ops::{Add, Mul, Neg, Sub};

use num_bigint::{BigInt, Sign};
use num_traits::{ToPrimitive, Zero};

use crate::summation::EpsilonScalar;

/// Fractional bits carried by every [`Fixed`] value.
pub const FRAC_BITS: u32 = 1024;

/// A real number stored as `mantissa / 2^FRAC_BITS`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fixed(BigInt);

impl Fixed {
    pub fn zero() -> Self {
        Fixed(BigInt::zero())
    }

    pub fn one() -> Self {
        Fixed(BigInt::from(1u8) << FRAC_BITS)
    }

    pub fn from_integer(n: impl Into<BigInt>) -> Self {
        Fixed(n.into() << FRAC_BITS)
    }

    /// Exact conversion (bits below `2^-FRAC_BITS` are dropped).
    pub fn from_f64(x: f64) -> Self {
        assert!(x.is_finite(), "Fixed::from_f64 on non-finite input");
        if x == 0.0 {
            return Self::zero();
        }
        let bits = x.to_bits();
        let negative = bits >> 63 == 1;
        let exp_bits = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (mantissa, exponent) = if exp_bits == 0 {
            (frac, -1074i64)
        } else {
            (frac | (1u64 << 52), exp_bits - 1075)
        };
        let shift = exponent + FRAC_BITS as i64;
        let m = BigInt::from(mantissa);
        let v = if shift >= 0 { m << (shift as u64) } else { m >> ((-shift) as u64) };
        Fixed(if negative { -v } else { v })
    }

    /// Correctly scaled conversion to the nearest representable double
    /// (up to one unit of truncation in the top 64 bits).
    pub fn to_f64(&self) -> f64 {
        let bits = self.0.bits();
        if bits == 0 {
            return 0.0;
        }
        if bits <= 64 {
            let v = self.0.to_f64().unwrap_or(0.0);
            return libm::scalbn(v, -(FRAC_BITS as i32));
        }
        let drop = bits - 64;
        let top = (&self.0 >> drop).to_f64().unwrap_or(0.0);
        let e = drop as i64 - FRAC_BITS as i64;
        libm::scalbn(top, e.clamp(-4000, 4000) as i32)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn div_int(&self, d: u64) -> Self {
        Fixed(&self.0 / BigInt::from(d))
    }

    pub fn mul_int(&self, m: &BigInt) -> Self {
        Fixed(&self.0 * m)
    }

    pub fn checked_div(&self, other: &Self) -> Option<Self> {
        if other.0.is_zero() {
            return None;
        }
        Some(Fixed((&self.0 << FRAC_BITS) / &other.0))
    }

    pub fn powi(&self, n: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    pub fn signum(&self) -> i8 {
        match self.0.sign() {
            Sign::Minus => -1,
            Sign::NoSign => 0,
            Sign::Plus => 1,
        }
    }
}

impl PartialOrd for Fixed {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Fixed {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.cmp(&other.0)
    }
}

impl Add for &Fixed {
    type Output = Fixed;
    fn add(self, rhs: &Fixed) -> Fixed {
        Fixed(&self.0 + &rhs.0)
    }
}

impl Sub for &Fixed {
    type Output = Fixed;
    fn sub(self, rhs: &Fixed) -> Fixed {
        Fixed(&self.0 - &rhs.0)
    }
}

impl Mul for &Fixed {
    type Output = Fixed;
    fn mul(self, rhs: &Fixed) -> Fixed {
        Fixed((&self.0 * &rhs.0) >> FRAC_BITS)
    }
}

impl Neg for &Fixed {
    type Output = Fixed;
    fn neg(self) -> Fixed {
        Fixed(-&self.0)
    }
}

impl EpsilonScalar for Fixed {
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn recip(&self) -> Option<Self> {
        Fixed::one().checked_div(self)
    }
    fn to_f64(&self) -> f64 {
        Fixed::to_f64(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn small_values_round_trip() {
        for x in [0.0, 1.0, -2.5, 1e-250, 3.0e200, crate::math::powi(0.5, 1000)] {
            assert_eq!(Fixed::from_f64(x).to_f64(), x);
        }
    }

    #[test]
    fn division_and_product() {
        let third = Fixed::one().checked_div(&Fixed::from_integer(3)).unwrap();
        let one = &third * &Fixed::from_integer(3);
        assert!((one.to_f64() - 1.0).abs() < 1e-300);
        assert_eq!(third.to_f64(), 1.0 / 3.0);
    }

    proptest! {
        #[test]
        fn arithmetic_matches_f64(a in -1e6f64..1e6, b in 1e-3f64..1e3) {
            let fa = Fixed::from_f64(a);
            let fb = Fixed::from_f64(b);
            prop_assert_eq!((&fa + &fb).to_f64(), a + b);
            let prod = (&fa * &fb).to_f64();
            prop_assert!((prod - a * b).abs() <= f64::EPSILON * (a * b).abs());
            let q = fa.checked_div(&fb).unwrap().to_f64();
            prop_assert!((q - a / b).abs() <= 1e-15 * (a / b).abs().max(1e-300));
        }
    }
}
