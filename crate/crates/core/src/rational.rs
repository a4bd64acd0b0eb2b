//! Exact rational numbers.
//!
//! Every payoff, outside option, tolerance and grid step in the crate is a
//! [`Rational`]: an arbitrary-precision fraction kept in lowest terms with a
//! positive denominator. Text form is canonical `p/q` (or `p` when `q = 1`);
//! parsing also accepts finite decimals such as `-0.25`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cannot parse {input:?} as a rational: {reason}")]
pub struct ParseRationalError {
    pub input: String,
    pub reason: &'static str,
}

/// `n / d` as an exact rational. Panics when `d == 0`.
pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parses `"p/q"`, `"p"`, or a finite decimal like `"-1.25"`.
pub fn parse_rational(input: &str) -> Result<Rational, ParseRationalError> {
    let err = |reason| ParseRationalError { input: input.to_string(), reason };
    let s = input.trim();
    if s.is_empty() {
        return Err(err("empty string"));
    }
    if let Some((num, den)) = s.split_once('/') {
        let n: BigInt = num.trim().parse().map_err(|_| err("bad numerator"))?;
        let d: BigInt = den.trim().parse().map_err(|_| err("bad denominator"))?;
        if d.is_zero() {
            return Err(err("zero denominator"));
        }
        return Ok(Rational::new(n, d));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        let negative = whole.trim_start().starts_with('-');
        let whole_digits = whole.trim_start_matches(['-', '+']);
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(err("bad decimal fraction"));
        }
        if !whole_digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(err("bad decimal integer part"));
        }
        let digits = format!("{whole_digits}{frac}");
        let n: BigInt = digits.parse().map_err(|_| err("bad decimal"))?;
        let d = num_traits::pow(BigInt::from(10), frac.len());
        let value = Rational::new(n, d);
        return Ok(if negative { -value } else { value });
    }
    let n: BigInt = s.parse().map_err(|_| err("not an integer, fraction, or decimal"))?;
    Ok(Rational::from_integer(n))
}

/// Canonical text form: lowest terms, `p` when the denominator is one.
pub fn format_rational(r: &Rational) -> String {
    r.to_string()
}

/// The middle value of three.
pub fn median(a: &Rational, b: &Rational, c: &Rational) -> Rational {
    let mut v = [a, b, c];
    v.sort();
    v[1].clone()
}

/// Largest integer `k` with `k <= r`.
pub fn floor_int(r: &Rational) -> BigInt {
    r.floor().to_integer()
}

/// Smallest integer `k` with `k >= r`.
pub fn ceil_int(r: &Rational) -> BigInt {
    r.ceil().to_integer()
}

/// `|a - b|`.
pub fn abs_diff(a: &Rational, b: &Rational) -> Rational {
    (a - b).abs()
}

pub fn is_integer(r: &Rational) -> bool {
    r.denom().is_one()
}

/// Lossy conversion used only for diagnostics and sampling.
pub fn to_f64(r: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}
