//! Arbitrary-precision rationals and their canonical text form.
//!
//! Backed by [`num_rational::BigRational`], which keeps every value reduced
//! with a positive denominator.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

pub type Rational = num_rational::BigRational;

/// Shorthand constructor from machine integers.
///
/// Panics on a zero denominator; intended for literals in tests and fixtures.
pub fn rat(numer: i64, denom: i64) -> Rational {
    assert!(denom != 0, "zero denominator");
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseRationalError {
    #[error("empty rational literal")]
    Empty,
    #[error("malformed rational literal `{0}`")]
    Malformed(String),
    #[error("denominator must be positive in `{0}`")]
    NonPositiveDenominator(String),
}

/// Parse `p/q` or a bare integer `p`; `q` must be positive.
pub fn parse_rational(s: &str) -> Result<Rational, ParseRationalError> {
    if s.is_empty() {
        return Err(ParseRationalError::Empty);
    }
    let malformed = || ParseRationalError::Malformed(s.to_string());
    match s.split_once('/') {
        None => {
            let n: BigInt = s.parse().map_err(|_| malformed())?;
            Ok(Rational::from_integer(n))
        }
        Some((num, den)) => {
            let n: BigInt = num.parse().map_err(|_| malformed())?;
            let d: BigInt = den.parse().map_err(|_| malformed())?;
            if !d.is_positive() {
                return Err(ParseRationalError::NonPositiveDenominator(s.to_string()));
            }
            Ok(Rational::new(n, d))
        }
    }
}

/// Canonical text form: `p` when the denominator is 1, otherwise `p/q`.
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// True when stored in lowest terms with a positive denominator.
pub fn is_canonical(r: &Rational) -> bool {
    r.denom().is_positive() && r.numer().gcd(r.denom()).is_one()
}

/// Convert to `f64`, tolerating numerators and denominators far outside the
/// `f64` range.
pub fn rational_to_f64(r: &Rational) -> f64 {
    if r.numer().is_zero() {
        return 0.0;
    }
    let shift_n = r.numer().bits().saturating_sub(64) as usize;
    let shift_d = r.denom().bits().saturating_sub(64) as usize;
    let n = (r.numer() >> shift_n).to_f64().expect("64-bit magnitude");
    let d = (r.denom() >> shift_d).to_f64().expect("64-bit magnitude");
    (n / d) * 2f64.powi(shift_n as i32 - shift_d as i32)
}
