//! Exact rational numbers and their JSON form.
//!
//! Rationals travel as `[num, den]` pairs. Components that fit in an `i64`
//! are written as JSON numbers, larger ones as decimal strings.

use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Value;

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// `2^-n` as an exact rational.
pub fn dyadic(n: u32) -> Rational {
    Rational::new(BigInt::one(), BigInt::one() << n)
}

pub fn pow2(n: u32) -> BigInt {
    BigInt::one() << n
}

pub fn ceil_int(r: &Rational) -> BigInt {
    r.ceil().to_integer()
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        if r.is_positive() {
            f64::INFINITY
        } else {
            f64::NEG_INFINITY
        }
    })
}

/// Exact rational for a finite double.
pub fn from_f64(x: f64) -> Result<Rational> {
    Rational::from_float(x).ok_or_else(|| Error::Malformed(format!("non-finite number {x}")))
}

pub fn max(a: &Rational, b: &Rational) -> Rational {
    if a >= b {
        a.clone()
    } else {
        b.clone()
    }
}

pub fn min(a: &Rational, b: &Rational) -> Rational {
    if a <= b {
        a.clone()
    } else {
        b.clone()
    }
}

/// Parses `"3"`, `"-1/2"`, `"0.25"`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Malformed(format!("not a rational: {s:?}"));
    if let Some((n, d)) = s.split_once('/') {
        let n = BigInt::from_str(n.trim()).map_err(|_| bad())?;
        let d = BigInt::from_str(d.trim()).map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(Rational::new(n, d));
    }
    if let Some((ip, fp)) = s.split_once('.') {
        let neg = ip.starts_with('-');
        let digits = format!("{}{}", ip.trim_start_matches(['-', '+']), fp);
        let n = BigInt::from_str(&digits).map_err(|_| bad())?;
        let d = num_traits::pow(BigInt::from(10), fp.len());
        let r = Rational::new(n, d);
        return Ok(if neg { -r } else { r });
    }
    BigInt::from_str(s).map(Rational::from_integer).map_err(|_| bad())
}

fn bigint_to_json(n: &BigInt) -> Value {
    match n.to_i64() {
        Some(v) => Value::from(v),
        None => Value::from(n.to_string()),
    }
}

fn bigint_from_json(v: &Value) -> Result<BigInt> {
    match v {
        Value::Number(n) => n
            .as_i64()
            .map(BigInt::from)
            .ok_or_else(|| Error::Malformed(format!("expected an integer, got {n}"))),
        Value::String(s) => {
            BigInt::from_str(s).map_err(|_| Error::Malformed(format!("expected an integer, got {s:?}")))
        }
        other => Err(Error::Malformed(format!("expected an integer, got {other}"))),
    }
}

pub fn rational_to_json(r: &Rational) -> Value {
    Value::Array(vec![bigint_to_json(r.numer()), bigint_to_json(r.denom())])
}

/// Accepts `[num, den]`, a bare integer, or a string accepted by [`parse_rational`].
pub fn rational_from_json(v: &Value) -> Result<Rational> {
    match v {
        Value::Array(parts) if parts.len() == 2 => {
            let n = bigint_from_json(&parts[0])?;
            let d = bigint_from_json(&parts[1])?;
            if d.is_zero() {
                return Err(Error::Malformed("zero denominator".into()));
            }
            Ok(Rational::new(n, d))
        }
        Value::Number(n) if n.is_i64() => Ok(int(n.as_i64().unwrap())),
        Value::Number(n) => from_f64(n.as_f64().unwrap_or(f64::NAN)),
        Value::String(s) => parse_rational(s),
        other => Err(Error::Malformed(format!("expected a rational, got {other}"))),
    }
}

/// Serde adapter: `#[serde(with = "crate::rational::json")]`.
pub mod json {
    use super::*;

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        rational_to_json(r).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        let v = Value::deserialize(d)?;
        rational_from_json(&v).map_err(D::Error::custom)
    }
}

/// Reduced `num/den` display, integers without the denominator.
pub fn display(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Least common multiple of denominators; handy when building grids.
pub fn common_denominator<'a>(rs: impl IntoIterator<Item = &'a Rational>) -> BigInt {
    rs.into_iter()
        .fold(BigInt::one(), |acc, r| acc.lcm(r.denom()))
}

pub fn abs(r: &Rational) -> Rational {
    r.abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_common_forms() {
        assert_eq!(parse_rational("3").unwrap(), int(3));
        assert_eq!(parse_rational("-1/2").unwrap(), rat(-1, 2));
        assert_eq!(parse_rational("0.25").unwrap(), rat(1, 4));
        assert_eq!(parse_rational("-1.5").unwrap(), rat(-3, 2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn json_pairs() {
        let r = rat(-7, 3);
        let v = rational_to_json(&r);
        assert_eq!(v.to_string(), "[-7,3]");
        assert_eq!(rational_from_json(&v).unwrap(), r);
        let huge = Rational::from_integer(BigInt::one() << 100u32);
        assert_eq!(rational_from_json(&rational_to_json(&huge)).unwrap(), huge);
    }

    #[test]
    fn dyadics() {
        assert_eq!(dyadic(3), rat(1, 8));
        assert_eq!(ceil_int(&rat(7, 2)), BigInt::from(4));
        assert_eq!(ceil_int(&int(2)), BigInt::from(2));
    }
}
