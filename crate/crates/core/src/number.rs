//! Exact decimal <-> rational conversion.
//!
//! All coordinates are arbitrary-precision rationals. Text inputs are decimals
//! and are converted losslessly; at most [`MAX_FRACTION_DIGITS`] significant
//! fractional digits are accepted so that bignum growth stays bounded.

use num::bigint::Sign;
use num::{BigInt, BigRational, Integer, One, Signed, ToPrimitive, Zero};
use thiserror::Error;

pub type Scalar = BigRational;

pub const MAX_FRACTION_DIGITS: u32 = 12;

/// Digits used for coordinates the harness computes itself (inflated
/// vertices, hint points, centers).
pub const GRID_DIGITS: u32 = 9;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecimalError {
    #[error("invalid decimal number `{0}`")]
    Invalid(String),
    #[error("`{0}` has more than 12 fractional digits")]
    TooPrecise(String),
}

pub fn int(v: i64) -> Scalar {
    BigRational::from_integer(BigInt::from(v))
}

pub fn ratio(n: i64, d: i64) -> Scalar {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn pow10(e: u32) -> BigInt {
    num::pow(BigInt::from(10), e as usize)
}

/// Parses a decimal literal (`-1.25`, `.5`, `3.`, `2e-3`) into an exact rational.
pub fn parse_decimal(text: &str) -> Result<Scalar, DecimalError> {
    let s = text.trim();
    let invalid = || DecimalError::Invalid(text.to_string());
    let (negative, body) = match s.as_bytes().first() {
        Some(b'-') => (true, &s[1..]),
        Some(b'+') => (false, &s[1..]),
        _ => (false, s),
    };
    let (mantissa, exponent) = match body.find(['e', 'E']) {
        Some(i) => {
            let exp: i64 = body[i + 1..].parse().map_err(|_| invalid())?;
            (&body[..i], exp)
        }
        None => (body, 0),
    };
    let (int_part, frac_part) = match mantissa.find('.') {
        Some(i) => (&mantissa[..i], &mantissa[i + 1..]),
        None => (mantissa, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(invalid());
    }
    if !int_part.bytes().all(|b| b.is_ascii_digit()) || !frac_part.bytes().all(|b| b.is_ascii_digit())
    {
        return Err(invalid());
    }
    if exponent.abs() > 64 {
        return Err(invalid());
    }
    let significant_frac = frac_part.trim_end_matches('0');
    let digits = format!("{int_part}{significant_frac}");
    let mut numer: BigInt = if digits.is_empty() {
        BigInt::zero()
    } else {
        digits.parse().map_err(|_| invalid())?
    };
    let scale = significant_frac.len() as i64 - exponent;
    if numer.is_zero() {
        return Ok(Scalar::zero());
    }
    if scale > MAX_FRACTION_DIGITS as i64 {
        return Err(DecimalError::TooPrecise(text.to_string()));
    }
    if negative {
        numer = -numer;
    }
    Ok(if scale >= 0 {
        BigRational::new(numer, pow10(scale as u32))
    } else {
        BigRational::from_integer(numer * pow10((-scale) as u32))
    })
}

/// Number of decimal digits needed to write `q` exactly, or `None` when its
/// expansion does not terminate.
pub fn terminating_digits(q: &Scalar) -> Option<u32> {
    let mut d = q.denom().clone();
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    let (mut twos, mut fives) = (0u32, 0u32);
    while d.is_even() {
        d /= &two;
        twos += 1;
    }
    while (&d % &five).is_zero() {
        d /= &five;
        fives += 1;
    }
    d.is_one().then_some(twos.max(fives))
}

/// Formats `q` as a plain decimal. Exact whenever the expansion terminates;
/// otherwise rounded half-away-from-zero to 12 fractional digits.
pub fn format_decimal(q: &Scalar) -> String {
    let (digits, value) = match terminating_digits(q) {
        Some(d) => (d, q.clone()),
        None => (MAX_FRACTION_DIGITS, round_to_digits(q, MAX_FRACTION_DIGITS)),
    };
    let scaled = (value * BigRational::from_integer(pow10(digits))).to_integer();
    let negative = scaled.sign() == Sign::Minus;
    let magnitude = scaled.abs().to_string();
    let mut out = String::new();
    if negative {
        out.push('-');
    }
    if digits == 0 {
        out.push_str(&magnitude);
        return out;
    }
    let width = digits as usize + 1;
    let padded = format!("{magnitude:0>width$}");
    let (whole, frac) = padded.split_at(padded.len() - digits as usize);
    let frac = frac.trim_end_matches('0');
    out.push_str(whole);
    if !frac.is_empty() {
        out.push('.');
        out.push_str(frac);
    }
    out
}

/// Nearest multiple of `10^-digits`, ties away from zero.
pub fn round_to_digits(q: &Scalar, digits: u32) -> Scalar {
    let scale = BigRational::from_integer(pow10(digits));
    (q * &scale).round() / scale
}

/// Converts a float to the nearest multiple of `10^-digits`.
pub fn from_f64_rounded(v: f64, digits: u32) -> Scalar {
    let scaled = (v * 10f64.powi(digits as i32)).round();
    let numer = BigInt::from(scaled as i128);
    BigRational::new(numer, pow10(digits))
}

pub fn to_f64(q: &Scalar) -> f64 {
    q.to_f64().unwrap_or_else(|| {
        if q.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}
