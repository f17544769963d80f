//! Exact rational helpers shared across the crate.
//!
//! Geometry and map bookkeeping use arbitrary-precision [`Q`]. The interval
//! unions of the magnification pipeline use the fixed-width [`Q128`] with
//! checked arithmetic, because they hold millions of endpoints.

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::{BigRational, Ratio};
use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, CheckedSub, One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Q = BigRational;
pub type Q128 = Ratio<i128>;

pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn q_int(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// Parses `"p/q"`, `"p"` or `"-p/q"`. Decimal notation is rejected.
pub fn parse_rational(text: &str) -> Result<Q> {
    let text = text.trim();
    let bad = || Error::Argument(format!("malformed rational {text:?}"));
    let (num, den) = match text.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (text, "1"),
    };
    let num: BigInt = num.parse().map_err(|_| bad())?;
    let den: BigInt = den.parse().map_err(|_| bad())?;
    if den.is_zero() {
        return Err(bad());
    }
    Ok(Q::new(num, den))
}

/// Canonical `"p/q"` form (`"p"` for integers).
pub fn format_rational(value: &Q) -> String {
    if value.denom().is_one() {
        value.numer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

pub fn to_f64(value: &Q) -> f64 {
    value.to_f64().unwrap_or_else(|| ln_rational(value).exp())
}

/// Natural logarithm of a positive big integer, without overflowing `f64`.
pub fn ln_bigint(value: &BigInt) -> f64 {
    assert!(value.sign() == Sign::Plus, "logarithm of non-positive integer");
    let bits = value.bits();
    if bits <= 1000 {
        return value.to_f64().expect("finite").ln();
    }
    let shift = bits - 64;
    let top: BigInt = value >> shift;
    top.to_f64().expect("finite").ln() + shift as f64 * std::f64::consts::LN_2
}

/// Natural logarithm of a positive rational.
pub fn ln_rational(value: &Q) -> f64 {
    ln_bigint(value.numer()) - ln_bigint(value.denom())
}

pub fn pow(base: &Q, exp: usize) -> Q {
    num_traits::pow(base.clone(), exp)
}

pub fn to_q128(value: &Q) -> Result<Q128> {
    let n = value.numer().to_i128().ok_or(Error::Overflow)?;
    let d = value.denom().to_i128().ok_or(Error::Overflow)?;
    Ok(Q128::new(n, d))
}

pub fn from_q128(value: &Q128) -> Q {
    Q::new(BigInt::from(*value.numer()), BigInt::from(*value.denom()))
}

pub fn q128_to_f64(value: &Q128) -> f64 {
    *value.numer() as f64 / *value.denom() as f64
}

pub fn format_q128(value: &Q128) -> String {
    if *value.denom() == 1 {
        value.numer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

pub fn parse_q128(text: &str) -> Result<Q128> {
    to_q128(&parse_rational(text)?)
}

pub fn add128(a: &Q128, b: &Q128) -> Result<Q128> {
    a.checked_add(b).ok_or(Error::Overflow)
}

pub fn sub128(a: &Q128, b: &Q128) -> Result<Q128> {
    a.checked_sub(b).ok_or(Error::Overflow)
}

pub fn mul128(a: &Q128, b: &Q128) -> Result<Q128> {
    a.checked_mul(b).ok_or(Error::Overflow)
}

pub fn div128(a: &Q128, b: &Q128) -> Result<Q128> {
    if b.is_zero() {
        return Err(Error::Argument("division by zero".into()));
    }
    a.checked_div(b).ok_or(Error::Overflow)
}

/// Floor of a rational as a big integer.
pub fn floor(value: &Q) -> BigInt {
    value.numer().div_floor(value.denom())
}

/// Ceiling of a rational as a big integer.
pub fn ceil(value: &Q) -> BigInt {
    -((-value.numer()).div_floor(value.denom()))
}

pub fn abs(value: &Q) -> Q {
    value.abs()
}
