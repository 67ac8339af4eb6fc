//! Numeric scalars.
//!
//! The compiler itself is exact: every literal, weight and constraint
//! coefficient is a [`Rational`]. The numeric kernels (network evaluation,
//! interval arithmetic, the simplex in the verifier crate) are written
//! against [`Scalar`] so they can also be instantiated at `f64` for quick
//! experiments.

use std::fmt::{Debug, Display};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Num, One, Signed, ToPrimitive, Zero};

/// Arbitrary-precision rational number.
pub type Rational = BigRational;

pub trait Scalar:
    Clone + Debug + Display + PartialOrd + Num + Signed + Send + Sync + 'static
{
    /// True when comparisons on this type are exact.
    const EXACT: bool;

    fn from_rational(value: &Rational) -> Self;

    fn from_i64(value: i64) -> Self;

    /// Zero test used for pivoting and sign decisions. Exact types use
    /// `is_zero`; floating types use an absolute tolerance.
    fn near_zero(&self) -> bool;

    fn is_pos(&self) -> bool {
        !self.near_zero() && *self > Self::zero()
    }

    fn is_neg(&self) -> bool {
        !self.near_zero() && *self < Self::zero()
    }

    fn max_of(a: Self, b: Self) -> Self {
        if a >= b {
            a
        } else {
            b
        }
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn from_rational(value: &Rational) -> Self {
        value.clone()
    }

    fn from_i64(value: i64) -> Self {
        Rational::from_integer(BigInt::from(value))
    }

    fn near_zero(&self) -> bool {
        self.is_zero()
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_rational(value: &Rational) -> Self {
        value.to_f64().unwrap_or(f64::NAN)
    }

    fn from_i64(value: i64) -> Self {
        value as f64
    }

    fn near_zero(&self) -> bool {
        self.abs() < 1e-9
    }
}

pub fn rat(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn int(value: i64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

/// Renders `value` as a terminating decimal if its denominator only has
/// prime factors 2 and 5. Integers render without a fractional part.
pub fn to_decimal(value: &Rational) -> Option<String> {
    let denom = value.denom();
    if denom.is_one() {
        return Some(value.numer().to_string());
    }
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    let mut rest = denom.clone();
    let (mut twos, mut fives) = (0u32, 0u32);
    while rest.is_even() {
        rest /= &two;
        twos += 1;
    }
    while (&rest % &five).is_zero() {
        rest /= &five;
        fives += 1;
    }
    if !rest.is_one() {
        return None;
    }
    let places = twos.max(fives);
    let scale = num_traits::pow(BigInt::from(10), places as usize);
    let scaled = value.numer() * (&scale / denom);
    let digits = scaled.abs().to_string();
    let places = places as usize;
    let padded = if digits.len() <= places {
        format!("{}{}", "0".repeat(places + 1 - digits.len()), digits)
    } else {
        digits
    };
    let (whole, frac) = padded.split_at(padded.len() - places);
    let sign = if scaled.is_negative() { "-" } else { "" };
    Some(format!("{sign}{whole}.{frac}"))
}

/// Decimal when exactly representable, otherwise `p/q`.
pub fn render_rational(value: &Rational) -> String {
    to_decimal(value).unwrap_or_else(|| format!("{}/{}", value.numer(), value.denom()))
}

/// Parses `123`, `-4.75` or `p/q` (with optional leading minus).
pub fn parse_rational(text: &str) -> Option<Rational> {
    let text = text.trim();
    if let Some((p, q)) = text.split_once('/') {
        let p: BigInt = p.trim().parse().ok()?;
        let q: BigInt = q.trim().parse().ok()?;
        if q.is_zero() {
            return None;
        }
        return Some(Rational::new(p, q));
    }
    let (negative, body) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text.strip_prefix('+').unwrap_or(text)),
    };
    if body.is_empty() {
        return None;
    }
    let value = match body.split_once('.') {
        Some((whole, frac)) => {
            if whole.is_empty()
                || frac.is_empty()
                || !whole.bytes().all(|b| b.is_ascii_digit())
                || !frac.bytes().all(|b| b.is_ascii_digit())
            {
                return None;
            }
            let numer: BigInt = format!("{whole}{frac}").parse().ok()?;
            let denom = num_traits::pow(BigInt::from(10), frac.len());
            Rational::new(numer, denom)
        }
        None => {
            if !body.bytes().all(|b| b.is_ascii_digit()) {
                return None;
            }
            Rational::from_integer(body.parse().ok()?)
        }
    };
    Some(if negative { -value } else { value })
}

/// The rational denoted exactly by a finite `f32`.
pub fn rational_from_f32(value: f32) -> Option<Rational> {
    if !value.is_finite() {
        return None;
    }
    let bits = value.to_bits();
    let negative = bits >> 31 == 1;
    let exponent = ((bits >> 23) & 0xff) as i32;
    let fraction = (bits & 0x7f_ffff) as i64;
    let (mantissa, exp2) = if exponent == 0 {
        (fraction, -126 - 23)
    } else {
        (fraction | 0x80_0000, exponent - 127 - 23)
    };
    let mut result = Rational::from_integer(BigInt::from(mantissa));
    let two = Rational::from_integer(BigInt::from(2));
    if exp2 >= 0 {
        result *= num_traits::pow(two, exp2 as usize);
    } else {
        result /= num_traits::pow(two, (-exp2) as usize);
    }
    Some(if negative { -result } else { result })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn decimal_rendering() {
        assert_eq!(render_rational(&rat(13, 4)), "3.25");
        assert_eq!(render_rational(&rat(-5, 4)), "-1.25");
        assert_eq!(render_rational(&rat(1, 3)), "1/3");
        assert_eq!(render_rational(&rat(-1, 20)), "-0.05");
        assert_eq!(render_rational(&int(7)), "7");
        assert_eq!(render_rational(&rat(1, 1024)), "0.0009765625");
    }

    #[test]
    fn parses_all_literal_shapes() {
        assert_eq!(parse_rational("3.25"), Some(rat(13, 4)));
        assert_eq!(parse_rational("-1/3"), Some(rat(-1, 3)));
        assert_eq!(parse_rational("42"), Some(int(42)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("1."), None);
        assert_eq!(parse_rational(".5"), None);
        assert_eq!(parse_rational("abc"), None);
    }

    #[test]
    fn float_bits_convert_exactly() {
        assert_eq!(rational_from_f32(f32::from_bits(0x3F00_0000)), Some(rat(1, 2)));
        assert_eq!(rational_from_f32(-0.75), Some(rat(-3, 4)));
        assert_eq!(rational_from_f32(0.0), Some(int(0)));
        // 0.1f32 is not 1/10
        let tenth = rational_from_f32(0.1).unwrap();
        assert_ne!(tenth, rat(1, 10));
        assert_eq!(tenth, Rational::new(BigInt::from(13421773), BigInt::from(134217728)));
        assert_eq!(rational_from_f32(f32::NAN), None);
        assert_eq!(rational_from_f32(f32::INFINITY), None);
        let tiny = rational_from_f32(f32::from_bits(1)).unwrap();
        assert_eq!(tiny.to_f64().unwrap(), f32::from_bits(1) as f64);
    }

    proptest! {
        #[test]
        fn decimal_text_round_trips(whole in 0u64..100_000, frac in "[0-9]{1,8}", neg: bool) {
            let text = format!("{}{}.{}", if neg { "-" } else { "" }, whole, frac);
            let value = parse_rational(&text).unwrap();
            let rendered = render_rational(&value);
            prop_assert_eq!(parse_rational(&rendered).unwrap(), value);
        }

        #[test]
        fn finite_floats_convert_exactly(bits in any::<u32>()) {
            let f = f32::from_bits(bits);
            prop_assume!(f.is_finite());
            let q = rational_from_f32(f).unwrap();
            prop_assert_eq!(q.to_f64().unwrap(), f as f64);
        }
    }
}
