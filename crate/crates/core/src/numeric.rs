//! Precision management, the arbitrary-precision scalar type, and the
//! fundamental constants every other module builds on.
//!
//! All arithmetic runs at `digits + guard_digits` decimal digits; values are
//! only rounded to `digits` when they are formatted for output.

use std::cmp::Ordering;
use std::fmt;

use rug::float::Constant;
use rug::ops::Pow;
use rug::{Assign, Float};

use crate::error::{Error, Result};

pub const MIN_DIGITS: u32 = 10;
pub const DEFAULT_GUARD_DIGITS: u32 = 10;
pub const MIN_GUARD_DIGITS: u32 = 10;

/// An arbitrary-precision real that is always finite.
#[derive(Clone, Debug, PartialEq, PartialOrd)]
pub struct BigReal(Float);

impl BigReal {
    pub fn new(value: Float) -> Result<Self> {
        if value.is_finite() {
            Ok(BigReal(value))
        } else {
            Err(Error::NonFiniteEvaluation(format!("{value}")))
        }
    }

    /// Wraps a value the caller has already proven finite.
    pub(crate) fn finite(value: Float) -> Self {
        debug_assert!(value.is_finite(), "non-finite value escaped: {value}");
        BigReal(value)
    }

    /// Parses a decimal literal at the given precision in bits.
    pub fn parse(literal: &str, bits: u32) -> Result<Self> {
        let parsed = Float::parse(literal)
            .map_err(|e| Error::Domain(format!("cannot parse {literal:?}: {e}")))?;
        BigReal::new(Float::with_val(bits, parsed))
    }

    pub fn as_float(&self) -> &Float {
        &self.0
    }

    pub fn into_float(self) -> Float {
        self.0
    }

    pub fn prec(&self) -> u32 {
        self.0.prec()
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64()
    }

    pub fn abs(&self) -> BigReal {
        BigReal(self.0.clone().abs())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_sign_negative(&self) -> bool {
        self.0.is_sign_negative() && !self.0.is_zero()
    }

    pub fn cmp_abs_to(&self, other: &BigReal) -> Ordering {
        self.0
            .cmp_abs(&other.0)
            .expect("finite values are always comparable")
    }

    /// `|self - other|` at the larger of the two precisions.
    pub fn abs_diff(&self, other: &BigReal) -> BigReal {
        let bits = self.prec().max(other.prec());
        BigReal(Float::with_val(bits, &self.0 - &other.0).abs())
    }

    /// Decimal rendering with exactly `digits` significant digits.
    ///
    /// Moderate magnitudes print positionally (`0.0021446908754`), very large
    /// or very small ones in scientific notation (`1.2345e-31`). Zero prints
    /// as `0`.
    pub fn to_decimal(&self, digits: u32) -> String {
        format_decimal(&self.0, digits.max(1))
    }
}

impl fmt::Display for BigReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = match f.precision() {
            Some(p) => p as u32,
            None => decimal_digits_for_bits(self.prec()),
        };
        f.write_str(&self.to_decimal(digits))
    }
}

impl AsRef<Float> for BigReal {
    fn as_ref(&self) -> &Float {
        &self.0
    }
}

fn format_decimal(value: &Float, digits: u32) -> String {
    if value.is_zero() {
        return "0".to_string();
    }
    let (negative, mantissa, exp) = value.to_sign_string_exp(10, Some(digits as usize));
    let exp = exp.expect("finite non-zero value has an exponent");
    let sign = if negative { "-" } else { "" };
    // value = 0.mantissa * 10^exp
    let body = if (-5..=21).contains(&exp) {
        if exp <= 0 {
            format!("0.{}{}", "0".repeat((-exp) as usize), mantissa)
        } else {
            let exp = exp as usize;
            if exp >= mantissa.len() {
                format!("{}{}", mantissa, "0".repeat(exp - mantissa.len()))
            } else {
                format!("{}.{}", &mantissa[..exp], &mantissa[exp..])
            }
        }
    } else {
        let (lead, rest) = mantissa.split_at(1);
        if rest.is_empty() {
            format!("{}e{}", lead, exp - 1)
        } else {
            format!("{}.{}e{}", lead, rest, exp - 1)
        }
    };
    format!("{sign}{body}")
}

pub(crate) fn decimal_digits_for_bits(bits: u32) -> u32 {
    ((bits as f64) * std::f64::consts::LOG10_2).floor() as u32
}

pub(crate) fn bits_for_digits(digits: u32) -> u32 {
    ((digits as f64) * std::f64::consts::LOG2_10).ceil() as u32 + 4
}

/// Working precision, guard digits and acceptance tolerance.
#[derive(Clone, Debug, PartialEq)]
pub struct PrecisionContext {
    digits: u32,
    guard_digits: u32,
    tolerance: BigReal,
}

impl PrecisionContext {
    /// `digits` significant digits, 10 guard digits, tolerance `10^-digits`.
    pub fn new(digits: u32) -> Result<Self> {
        Self::with_guard(digits, DEFAULT_GUARD_DIGITS)
    }

    pub fn with_guard(digits: u32, guard_digits: u32) -> Result<Self> {
        if digits < MIN_DIGITS {
            return Err(Error::InvalidPrecision(format!(
                "digits must be at least {MIN_DIGITS}, got {digits}"
            )));
        }
        if guard_digits < MIN_GUARD_DIGITS {
            return Err(Error::InvalidPrecision(format!(
                "guard digits must be at least {MIN_GUARD_DIGITS}, got {guard_digits}"
            )));
        }
        let bits = bits_for_digits(digits + guard_digits);
        let tolerance = BigReal::finite(pow10(bits, -(digits as i32)));
        Ok(PrecisionContext {
            digits,
            guard_digits,
            tolerance,
        })
    }

    /// Replaces the default `10^-digits` acceptance threshold.
    pub fn with_tolerance(mut self, tolerance: BigReal) -> Result<Self> {
        if tolerance.is_sign_negative() || tolerance.is_zero() {
            return Err(Error::InvalidPrecision(format!(
                "tolerance must be positive, got {tolerance}"
            )));
        }
        self.tolerance = BigReal::finite(Float::with_val(self.working_bits(), tolerance.as_float()));
        Ok(self)
    }

    /// Same digits and tolerance, with `extra` more guard digits.
    pub fn with_extra_guard(&self, extra: u32) -> Self {
        let guard_digits = self.guard_digits + extra;
        let bits = bits_for_digits(self.digits + guard_digits);
        PrecisionContext {
            digits: self.digits,
            guard_digits,
            tolerance: BigReal::finite(Float::with_val(bits, self.tolerance.as_float())),
        }
    }

    pub fn digits(&self) -> u32 {
        self.digits
    }

    pub fn guard_digits(&self) -> u32 {
        self.guard_digits
    }

    pub fn tolerance(&self) -> &BigReal {
        &self.tolerance
    }

    pub fn working_digits(&self) -> u32 {
        self.digits + self.guard_digits
    }

    pub fn working_bits(&self) -> u32 {
        bits_for_digits(self.working_digits())
    }

    /// A `Float` at working precision.
    pub fn float<T>(&self, value: T) -> Float
    where
        Float: Assign<T>,
    {
        Float::with_val(self.working_bits(), value)
    }

    /// A finite `BigReal` at working precision.
    ///
    /// Panics if `value` is not finite; use [`BigReal::new`] for checked input.
    pub fn real<T>(&self, value: T) -> BigReal
    where
        Float: Assign<T>,
    {
        BigReal::new(self.float(value)).expect("finite input")
    }
}

pub(crate) fn pow10(bits: u32, exp: i32) -> Float {
    Float::with_val(bits, 10).pow(exp)
}

pub(crate) fn pi(bits: u32) -> Float {
    Float::with_val(bits, Constant::Pi)
}

/// ln(1 + √2), which is also asinh(1).
pub(crate) fn ln_one_plus_sqrt2(bits: u32) -> Float {
    Float::with_val(bits, 1).asinh()
}

pub(crate) fn sqrt2(bits: u32) -> Float {
    Float::with_val(bits, 2).sqrt()
}

/// π at working precision.
pub fn const_pi(ctx: &PrecisionContext) -> BigReal {
    BigReal::finite(pi(ctx.working_bits()))
}

/// L = ln(1 + √2).
pub fn const_l(ctx: &PrecisionContext) -> BigReal {
    BigReal::finite(ln_one_plus_sqrt2(ctx.working_bits()))
}

/// The Grothendieck-Krivine constant π / (2 ln(1 + √2)).
pub fn const_kg(ctx: &PrecisionContext) -> BigReal {
    let bits = ctx.working_bits();
    let two_l = ln_one_plus_sqrt2(bits) * 2u32;
    BigReal::finite(pi(bits) / two_l)
}

/// Neumaier-compensated running sum at a fixed precision.
///
/// Addition order is the caller's order, so results are reproducible.
#[derive(Clone, Debug)]
pub struct CompensatedSum {
    sum: Float,
    compensation: Float,
}

impl CompensatedSum {
    pub fn new(bits: u32) -> Self {
        CompensatedSum {
            sum: Float::new(bits),
            compensation: Float::new(bits),
        }
    }

    pub fn add(&mut self, term: &Float) {
        let bits = self.sum.prec();
        let t = Float::with_val(bits, &self.sum + term);
        let err = if self.sum.cmp_abs(term) != Some(Ordering::Less) {
            Float::with_val(bits, &self.sum - &t) + term
        } else {
            Float::with_val(bits, term - &t) + &self.sum
        };
        self.compensation += err;
        self.sum = t;
    }

    pub fn value(&self) -> Float {
        Float::with_val(self.sum.prec(), &self.sum + &self.compensation)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_low_precision() {
        assert!(matches!(
            PrecisionContext::new(9),
            Err(Error::InvalidPrecision(_))
        ));
        assert!(matches!(
            PrecisionContext::with_guard(20, 5),
            Err(Error::InvalidPrecision(_))
        ));
    }

    #[test]
    fn rejects_non_positive_tolerance() {
        let ctx = PrecisionContext::new(20).unwrap();
        let zero = ctx.real(0);
        assert!(ctx.clone().with_tolerance(zero).is_err());
        let neg = ctx.real(-1);
        assert!(ctx.with_tolerance(neg).is_err());
    }

    #[test]
    fn default_tolerance_is_ten_to_minus_digits() {
        let ctx = PrecisionContext::new(25).unwrap();
        assert_eq!(ctx.tolerance().to_decimal(5), "1.0000e-25");
        assert_eq!(ctx.working_digits(), 35);
    }

    #[test]
    fn decimal_formatting() {
        let ctx = PrecisionContext::new(20).unwrap();
        assert_eq!(ctx.real(0).to_decimal(10), "0");
        assert_eq!(ctx.real(1.125).to_decimal(4), "1.125");
        assert_eq!(ctx.real(-0.5).to_decimal(3), "-0.500");
        assert_eq!(ctx.real(1234.5).to_decimal(6), "1234.50");
        assert_eq!(ctx.real(0.00125).to_decimal(2), "0.0013");
        assert_eq!(ctx.real(1e-30).to_decimal(3), "1.00e-30");
        assert_eq!(ctx.real(3e25).to_decimal(2), "3.0e25");
    }

    #[test]
    fn pi_to_fifteen_digits() {
        let ctx = PrecisionContext::new(15).unwrap();
        assert_eq!(const_pi(&ctx).to_decimal(15), "3.14159265358979");
    }

    #[test]
    fn compensated_sum_recovers_cancelled_bits() {
        let mut s = CompensatedSum::new(64);
        let big = Float::with_val(64, 1u64 << 63);
        let one = Float::with_val(64, 1);
        s.add(&big);
        for _ in 0..10 {
            s.add(&one);
        }
        s.add(&(-big.clone()));
        assert_eq!(s.value(), 10);
    }
}
