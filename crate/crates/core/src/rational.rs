//! Exact rational arithmetic helpers shared by every module.

use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// The exact scalar type used throughout the crate.
pub type Q = BigRational;

/// Builds `num / den`. Panics if `den` is zero.
pub fn q(num: i64, den: i64) -> Q {
    Q::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn zero() -> Q {
    Q::zero()
}

pub fn one() -> Q {
    Q::one()
}

pub fn to_f64(x: &Q) -> f64 {
    x.to_f64().unwrap_or_else(|| {
        let n = x.numer().to_f64().unwrap_or(f64::INFINITY);
        let d = x.denom().to_f64().unwrap_or(f64::INFINITY);
        n / d
    })
}

/// Exact conversion of a finite float.
pub fn from_f64(x: f64) -> Option<Q> {
    Q::from_float(x)
}

pub fn positive_part(x: &Q) -> Q {
    if x.is_positive() {
        x.clone()
    } else {
        Q::zero()
    }
}

pub fn min_q<'a>(a: &'a Q, b: &'a Q) -> &'a Q {
    if a <= b {
        a
    } else {
        b
    }
}

pub fn max_q<'a>(a: &'a Q, b: &'a Q) -> &'a Q {
    if a >= b {
        a
    } else {
        b
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot parse `{0}` as a rational number")]
pub struct ParseRationalError(pub String);

/// Parses `7`, `-3/4`, `0.125` or `2.5e-1` exactly.
pub fn parse_rational(s: &str) -> Result<Q, ParseRationalError> {
    let err = || ParseRationalError(s.to_string());
    let t = s.trim();
    if t.is_empty() {
        return Err(err());
    }
    if let Some((n, d)) = t.split_once('/') {
        let n = BigInt::from_str(n.trim()).map_err(|_| err())?;
        let d = BigInt::from_str(d.trim()).map_err(|_| err())?;
        if d.is_zero() {
            return Err(err());
        }
        return Ok(Q::new(n, d));
    }
    let (mantissa, exponent) = match t.find(['e', 'E']) {
        Some(i) => (&t[..i], t[i + 1..].parse::<i32>().map_err(|_| err())?),
        None => (t, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (whole, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if whole.is_empty() && frac.is_empty() {
        return Err(err());
    }
    if !whole.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(err());
    }
    let all = format!("{whole}{frac}");
    let mut value = Q::from_integer(BigInt::from_str(if all.is_empty() { "0" } else { &all }).map_err(|_| err())?);
    let shift = exponent - frac.len() as i32;
    let ten = Q::from_integer(BigInt::from(10));
    let scale = num_traits::pow(ten, shift.unsigned_abs() as usize);
    if shift >= 0 {
        value *= scale;
    } else {
        value /= scale;
    }
    Ok(if negative { -value } else { value })
}

/// Renders `n` or `n/d`.
pub fn format_rational(x: &Q) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub(crate) fn bigint_to_json(n: &BigInt) -> serde_json::Number {
    serde_json::Number::from_str(&n.to_string()).expect("integer literal is a valid JSON number")
}

pub(crate) fn bigint_from_json(n: &serde_json::Number) -> Result<BigInt, String> {
    BigInt::from_str(&n.to_string()).map_err(|_| format!("expected an integer, found {n}"))
}

/// A rational serialized as the JSON pair `[numerator, denominator]`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct QPair(pub Q);

impl Serialize for QPair {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        [bigint_to_json(self.0.numer()), bigint_to_json(self.0.denom())].serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for QPair {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let parts = Vec::<serde_json::Number>::deserialize(deserializer)?;
        if parts.len() != 2 {
            return Err(D::Error::custom(format!(
                "a rational is a [numerator, denominator] pair, found {} entries",
                parts.len()
            )));
        }
        let n = bigint_from_json(&parts[0]).map_err(D::Error::custom)?;
        let d = bigint_from_json(&parts[1]).map_err(D::Error::custom)?;
        if d.is_zero() {
            return Err(D::Error::custom("zero denominator"));
        }
        Ok(QPair(Q::new(n, d)))
    }
}

pub(crate) fn pair_list(values: &[&Q]) -> Vec<serde_json::Number> {
    values
        .iter()
        .flat_map(|v| [bigint_to_json(v.numer()), bigint_to_json(v.denom())])
        .collect()
}

pub(crate) fn rationals_from_numbers(parts: &[serde_json::Number]) -> Result<Vec<Q>, String> {
    if parts.len() % 2 != 0 {
        return Err("odd number of integers in a rational list".into());
    }
    parts
        .chunks(2)
        .map(|c| {
            let n = bigint_from_json(&c[0])?;
            let d = bigint_from_json(&c[1])?;
            if d.is_zero() {
                Err("zero denominator".to_string())
            } else {
                Ok(Q::new(n, d))
            }
        })
        .collect()
}
