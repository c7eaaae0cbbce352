//! Exact rational scalars.
//!
//! Every length, cut position, density and value in the crate is an
//! arbitrary-precision rational kept in lowest terms. Decimal output exists
//! only for display.

use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Exact rational number used for all lengths and values.
pub type Scalar = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseScalarError {
    #[error("empty rational literal")]
    Empty,
    #[error("malformed rational literal {0:?}")]
    Malformed(String),
    #[error("zero denominator in {0:?}")]
    ZeroDenominator(String),
}

/// `numer / denom` as an exact scalar. Panics on a zero denominator.
pub fn ratio(numer: i64, denom: i64) -> Scalar {
    Scalar::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn int(value: i64) -> Scalar {
    Scalar::from_integer(BigInt::from(value))
}

pub fn zero() -> Scalar {
    Scalar::zero()
}

pub fn one() -> Scalar {
    Scalar::one()
}

/// Parses `"p/q"`, an integer, or a decimal literal such as `"-0.125"` or
/// `"2.5e-3"`. Decimal literals are converted exactly.
pub fn parse_scalar(text: &str) -> Result<Scalar, ParseScalarError> {
    let s = text.trim();
    if s.is_empty() {
        return Err(ParseScalarError::Empty);
    }
    let malformed = || ParseScalarError::Malformed(text.to_string());
    if let Some((p, q)) = s.split_once('/') {
        let numer = BigInt::from_str(p.trim()).map_err(|_| malformed())?;
        let denom = BigInt::from_str(q.trim()).map_err(|_| malformed())?;
        if denom.is_zero() {
            return Err(ParseScalarError::ZeroDenominator(text.to_string()));
        }
        return Ok(Scalar::new(numer, denom));
    }

    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => {
            let exp = i32::from_str(&s[pos + 1..]).map_err(|_| malformed())?;
            (&s[..pos], exp)
        }
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (whole, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if whole.is_empty() && frac.is_empty() {
        return Err(malformed());
    }
    if !whole.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(malformed());
    }
    let joined = format!("{whole}{frac}");
    let mut numer = BigInt::from_str(if joined.is_empty() { "0" } else { &joined }).map_err(|_| malformed())?;
    if negative {
        numer = -numer;
    }
    let scale = exponent - frac.len() as i32;
    let pow = BigInt::from(10u32).pow(scale.unsigned_abs());
    Ok(if scale >= 0 { Scalar::from_integer(numer * pow) } else { Scalar::new(numer, pow) })
}

/// Canonical `"p/q"` form; the denominator is always written, so integers
/// come out as `"1/1"` and `"0/1"`.
pub fn format_scalar(value: &Scalar) -> String {
    format!("{}/{}", value.numer(), value.denom())
}

/// Decimal rendering rounded (half away from zero) to `significant` digits,
/// with trailing zeros removed.
pub fn format_decimal(value: &Scalar, significant: usize) -> String {
    assert!(significant > 0);
    if value.is_zero() {
        return "0".to_string();
    }
    let negative = value.is_negative();
    let magnitude = value.abs();
    let ten = BigInt::from(10u32);
    let pow10 = |e: i64| -> Scalar {
        let p = ten.pow(e.unsigned_abs() as u32);
        if e >= 0 {
            Scalar::from_integer(p)
        } else {
            Scalar::new(BigInt::one(), p)
        }
    };

    // exponent of the leading digit
    let mut exp = magnitude.numer().to_string().len() as i64 - magnitude.denom().to_string().len() as i64;
    while magnitude < pow10(exp) {
        exp -= 1;
    }
    while magnitude >= pow10(exp + 1) {
        exp += 1;
    }

    let shift = significant as i64 - 1 - exp;
    let scaled = &magnitude * pow10(shift);
    let (q, r) = scaled.numer().div_rem(scaled.denom());
    let mut digits = if r.clone() * 2u32 >= *scaled.denom() { q + 1u32 } else { q };
    if digits >= ten.pow(significant as u32) {
        digits /= &ten;
        exp += 1;
    }
    let digits = digits.to_string();
    let point = exp + 1; // digits before the decimal point

    let mut out = String::new();
    if negative {
        out.push('-');
    }
    if point <= 0 {
        out.push_str("0.");
        out.extend(std::iter::repeat_n('0', (-point) as usize));
        out.push_str(&digits);
    } else if point as usize >= digits.len() {
        out.push_str(&digits);
        out.extend(std::iter::repeat_n('0', point as usize - digits.len()));
    } else {
        out.push_str(&digits[..point as usize]);
        out.push('.');
        out.push_str(&digits[point as usize..]);
    }
    if out.contains('.') {
        let trimmed = out.trim_end_matches('0').trim_end_matches('.').len();
        out.truncate(trimmed);
    }
    out
}

/// Twelve significant digits, the reporting precision used throughout.
pub fn decimal12(value: &Scalar) -> String {
    format_decimal(value, 12)
}

/// Smallest integer not below `value`.
pub fn ceil_to_u64(value: &Scalar) -> Option<u64> {
    value.ceil().to_integer().to_u64()
}

pub fn is_nonnegative(value: &Scalar) -> bool {
    value.numer().sign() != Sign::Minus
}

pub fn to_f64(value: &Scalar) -> f64 {
    value.to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_decimals_exactly() {
        assert_eq!(parse_scalar("1/3").unwrap(), ratio(1, 3));
        assert_eq!(parse_scalar("2/4").unwrap(), ratio(1, 2));
        assert_eq!(parse_scalar("0.25").unwrap(), ratio(1, 4));
        assert_eq!(parse_scalar("-1.5").unwrap(), ratio(-3, 2));
        assert_eq!(parse_scalar("2.5e-3").unwrap(), ratio(1, 400));
        assert_eq!(parse_scalar("3e2").unwrap(), int(300));
        assert_eq!(parse_scalar(".5").unwrap(), ratio(1, 2));
        assert_eq!(parse_scalar("7").unwrap(), int(7));
    }

    #[test]
    fn rejects_garbage() {
        assert_eq!(parse_scalar(""), Err(ParseScalarError::Empty));
        assert!(matches!(parse_scalar("1/0"), Err(ParseScalarError::ZeroDenominator(_))));
        assert!(parse_scalar("abc").is_err());
        assert!(parse_scalar("1.2.3").is_err());
        assert!(parse_scalar(".").is_err());
    }

    #[test]
    fn canonical_form_always_has_denominator() {
        assert_eq!(format_scalar(&int(1)), "1/1");
        assert_eq!(format_scalar(&zero()), "0/1");
        assert_eq!(format_scalar(&ratio(6, -4)), "-3/2");
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(decimal12(&ratio(1, 3)), "0.333333333333");
        assert_eq!(decimal12(&ratio(2, 3)), "0.666666666667");
        assert_eq!(decimal12(&ratio(1, 2)), "0.5");
        assert_eq!(decimal12(&int(1)), "1");
        assert_eq!(decimal12(&zero()), "0");
        assert_eq!(decimal12(&ratio(-1, 400)), "-0.0025");
        assert_eq!(decimal12(&int(1234)), "1234");
        assert_eq!(decimal12(&ratio(1, 30)), "0.0333333333333");
        assert_eq!(format_decimal(&ratio(999_999, 1_000_000), 3), "1");
        assert_eq!(format_decimal(&int(123_456), 2), "120000");
    }
}
