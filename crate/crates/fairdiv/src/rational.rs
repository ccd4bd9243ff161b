//! Exact rational numbers used for every valuation, share and utility.
//!
//! All arithmetic in this crate is exact: shares are removed by driving them
//! to literal zero and comparisons never involve tolerances, so the carrier
//! type is an arbitrary-precision rational kept in canonical form (reduced,
//! positive denominator).

use num::bigint::BigInt;
use num::rational::Ratio;
use num::{One, Zero};
use std::fmt;

/// Arbitrary-precision rational in canonical form.
pub type Rational = Ratio<BigInt>;

/// Shorthand for a rational from an integer.
pub fn rat(value: i64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

/// Shorthand for a rational `numer / denom`. Panics if `denom == 0`.
pub fn ratio(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RationalParseError {
    Malformed(String),
    ZeroDenominator(String),
}

impl fmt::Display for RationalParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RationalParseError::Malformed(s) => write!(f, "malformed rational literal {s:?}"),
            RationalParseError::ZeroDenominator(s) => {
                write!(f, "zero denominator in rational literal {s:?}")
            }
        }
    }
}

impl std::error::Error for RationalParseError {}

/// Parses a rational from one of three exact forms:
///
/// * an integer: `"7"`, `"-3"`
/// * a fraction: `"p/q"`, e.g. `"-3/7"`
/// * a decimal string, expanded exactly over a power-of-ten denominator:
///   `"0.25"` becomes 1/4, `"-1.5"` becomes -3/2
///
/// No whitespace or exponent notation is accepted.
pub fn parse_rational(text: &str) -> Result<Rational, RationalParseError> {
    let malformed = || RationalParseError::Malformed(text.to_string());
    if let Some((numer, denom)) = text.split_once('/') {
        let n: BigInt = numer.parse().map_err(|_| malformed())?;
        let d: BigInt = denom.parse().map_err(|_| malformed())?;
        if d.is_zero() {
            return Err(RationalParseError::ZeroDenominator(text.to_string()));
        }
        return Ok(Rational::new(n, d));
    }
    if let Some((int_part, frac_part)) = text.split_once('.') {
        let (negative, digits) = match int_part.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, int_part.strip_prefix('+').unwrap_or(int_part)),
        };
        if digits.is_empty()
            || frac_part.is_empty()
            || !digits.bytes().all(|b| b.is_ascii_digit())
            || !frac_part.bytes().all(|b| b.is_ascii_digit())
        {
            return Err(malformed());
        }
        let whole: BigInt = format!("{digits}{frac_part}").parse().map_err(|_| malformed())?;
        let scale = num::pow(BigInt::from(10), frac_part.len());
        let magnitude = Rational::new(whole, scale);
        return Ok(if negative { -magnitude } else { magnitude });
    }
    let n: BigInt = text.parse().map_err(|_| malformed())?;
    Ok(Rational::from_integer(n))
}

/// Formats a rational as `"p"` when whole and `"p/q"` otherwise.
pub fn format_rational(value: &Rational) -> String {
    if value.denom().is_one() {
        value.numer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_integers_and_fractions() {
        assert_eq!(parse_rational("7").unwrap(), rat(7));
        assert_eq!(parse_rational("-3/7").unwrap(), ratio(-3, 7));
        assert_eq!(parse_rational("3/-7").unwrap(), ratio(-3, 7));
        assert_eq!(parse_rational("6/4").unwrap(), ratio(3, 2));
    }

    #[test]
    fn handles_values_beyond_machine_integers() {
        let huge = parse_rational("123456789012345678901234567891/7").unwrap();
        assert_eq!(
            format_rational(&huge),
            "123456789012345678901234567891/7"
        );
        assert_eq!(&huge * rat(7), parse_rational("123456789012345678901234567891").unwrap());
    }

    #[test]
    fn parses_decimals_exactly() {
        assert_eq!(parse_rational("0.25").unwrap(), ratio(1, 4));
        assert_eq!(parse_rational("-1.5").unwrap(), ratio(-3, 2));
        assert_eq!(parse_rational("-0.5").unwrap(), ratio(-1, 2));
        assert_eq!(parse_rational("2.0").unwrap(), rat(2));
    }

    #[test]
    fn rejects_malformed_literals() {
        for bad in ["", "1/0", "x", "1.2.3", "1e3", ".5", "1.", "1 / 2"] {
            assert!(parse_rational(bad).is_err(), "accepted {bad:?}");
        }
        assert!(matches!(
            parse_rational("1/0"),
            Err(RationalParseError::ZeroDenominator(_))
        ));
    }

    #[test]
    fn formats_canonically() {
        assert_eq!(format_rational(&rat(-3)), "-3");
        assert_eq!(format_rational(&ratio(1, 2)), "1/2");
        assert_eq!(format_rational(&ratio(2, 4)), "1/2");
    }
}
