//! Exact rationals and their `"p/q"` text form.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::str::FromStr;

/// The rational number type used everywhere in the crate.
pub type Q = BigRational;

/// Builds `n/d`. Panics if `d == 0`.
pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// The integer `n` as a rational.
pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn zero() -> Q {
    Q::zero()
}

pub fn one() -> Q {
    Q::one()
}

/// Renders `p/q`, or just `p` for integers.
pub fn fmt_q(x: &Q) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("malformed rational {0:?}")]
pub struct ParseRationalError(pub String);

/// Parses `"p/q"`, `"p"` or a plain integer.
pub fn parse_q(s: &str) -> Result<Q, ParseRationalError> {
    let bad = || ParseRationalError(s.to_string());
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n = BigInt::from_str(n.trim()).map_err(|_| bad())?;
            let d = BigInt::from_str(d.trim()).map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(Q::new(n, d))
        }
        None => BigInt::from_str(s).map(Q::from_integer).map_err(|_| bad()),
    }
}

/// Reads a rational from JSON: either a `"p/q"` string or an integer.
pub fn q_from_json(v: &serde_json::Value) -> Result<Q, ParseRationalError> {
    match v {
        serde_json::Value::String(s) => parse_q(s),
        serde_json::Value::Number(n) => n
            .as_i64()
            .map(qi)
            .ok_or_else(|| ParseRationalError(n.to_string())),
        other => Err(ParseRationalError(other.to_string())),
    }
}

pub fn q_to_json(x: &Q) -> serde_json::Value {
    serde_json::Value::String(fmt_q(x))
}

pub fn is_unit_interval(x: &Q) -> bool {
    !x.is_negative() && x <= &Q::one()
}
