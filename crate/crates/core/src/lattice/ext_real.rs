use std::cmp::Ordering;
use std::fmt;

use num_traits::{Signed, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::rational::{self, Rational};

/// A point of the extended real line.
///
/// The derived order puts `NegInf` below every finite value and `PosInf`
/// above, which is the order of the extended reals.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ExtReal {
    NegInf,
    Finite(Rational),
    PosInf,
}

impl ExtReal {
    pub fn zero() -> Self {
        ExtReal::Finite(Rational::zero())
    }

    pub fn from_int(n: i64) -> Self {
        ExtReal::Finite(rational::int(n))
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    pub fn finite(&self) -> Option<&Rational> {
        match self {
            ExtReal::Finite(r) => Some(r),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, ExtReal::Finite(r) if r.is_zero())
    }

    pub fn is_nonnegative(&self) -> bool {
        *self >= ExtReal::zero()
    }

    /// Extended addition. The ambiguous sums `(+inf) + (-inf)` and
    /// `(-inf) + (+inf)` evaluate to 0.
    pub fn ext_add(&self, other: &ExtReal) -> ExtReal {
        use ExtReal::*;
        match (self, other) {
            (Finite(a), Finite(b)) => Finite(a + b),
            (PosInf, NegInf) | (NegInf, PosInf) => ExtReal::zero(),
            (PosInf, _) | (_, PosInf) => PosInf,
            (NegInf, _) | (_, NegInf) => NegInf,
        }
    }

    pub fn neg(&self) -> ExtReal {
        match self {
            ExtReal::NegInf => ExtReal::PosInf,
            ExtReal::PosInf => ExtReal::NegInf,
            ExtReal::Finite(r) => ExtReal::Finite(-r),
        }
    }

    /// Product with `0 * (+-inf) = 0`.
    pub fn mul(&self, other: &ExtReal) -> ExtReal {
        use ExtReal::*;
        if self.is_zero() || other.is_zero() {
            return ExtReal::zero();
        }
        match (self, other) {
            (Finite(a), Finite(b)) => Finite(a * b),
            _ => {
                let positive = (self > &ExtReal::zero()) == (other > &ExtReal::zero());
                if positive {
                    PosInf
                } else {
                    NegInf
                }
            }
        }
    }

    pub fn scale(&self, c: &Rational) -> ExtReal {
        self.mul(&ExtReal::Finite(c.clone()))
    }

    pub fn abs(&self) -> ExtReal {
        match self {
            ExtReal::Finite(r) => ExtReal::Finite(r.abs()),
            _ => ExtReal::PosInf,
        }
    }

    pub fn min(a: &ExtReal, b: &ExtReal) -> ExtReal {
        if a <= b {
            a.clone()
        } else {
            b.clone()
        }
    }

    pub fn max(a: &ExtReal, b: &ExtReal) -> ExtReal {
        if a >= b {
            a.clone()
        } else {
            b.clone()
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            ExtReal::NegInf => f64::NEG_INFINITY,
            ExtReal::PosInf => f64::INFINITY,
            ExtReal::Finite(r) => rational::to_f64(r),
        }
    }

    pub fn cmp_rational(&self, r: &Rational) -> Ordering {
        match self {
            ExtReal::NegInf => Ordering::Less,
            ExtReal::PosInf => Ordering::Greater,
            ExtReal::Finite(v) => v.cmp(r),
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            ExtReal::NegInf => Value::from("-inf"),
            ExtReal::PosInf => Value::from("+inf"),
            ExtReal::Finite(r) => rational::rational_to_json(r),
        }
    }

    pub fn from_json(v: &Value) -> Result<ExtReal> {
        match v {
            Value::String(s) => match s.trim() {
                "+inf" | "inf" | "+Infinity" | "Infinity" => Ok(ExtReal::PosInf),
                "-inf" | "-Infinity" => Ok(ExtReal::NegInf),
                other => rational::parse_rational(other).map(ExtReal::Finite),
            },
            other => rational::rational_from_json(other).map(ExtReal::Finite),
        }
    }

    /// Sum of an iterator under [`ExtReal::ext_add`], folded left to right.
    pub fn sum<'a>(items: impl IntoIterator<Item = &'a ExtReal>) -> ExtReal {
        items
            .into_iter()
            .fold(ExtReal::zero(), |acc, x| acc.ext_add(x))
    }
}

impl From<Rational> for ExtReal {
    fn from(r: Rational) -> Self {
        ExtReal::Finite(r)
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::NegInf => write!(f, "-inf"),
            ExtReal::PosInf => write!(f, "+inf"),
            ExtReal::Finite(r) => write!(f, "{}", rational::display(r)),
        }
    }
}

impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for ExtReal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Value::deserialize(d)?;
        ExtReal::from_json(&v).map_err(D::Error::custom)
    }
}

/// Extended addition as a free function.
pub fn ext_add(a: &ExtReal, b: &ExtReal) -> ExtReal {
    a.ext_add(b)
}

impl std::str::FromStr for ExtReal {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ExtReal::from_json(&Value::from(s))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    #[test]
    fn ambiguous_sum_is_zero() {
        assert_eq!(ExtReal::PosInf.ext_add(&ExtReal::NegInf), ExtReal::zero());
        assert_eq!(ExtReal::NegInf.ext_add(&ExtReal::PosInf), ExtReal::zero());
    }

    #[test]
    fn ordinary_sums() {
        assert_eq!(ExtReal::from_int(1).ext_add(&ExtReal::from_int(2)), ExtReal::from_int(3));
        assert_eq!(ExtReal::PosInf.ext_add(&ExtReal::from_int(5)), ExtReal::PosInf);
        assert_eq!(ExtReal::NegInf.ext_add(&ExtReal::NegInf), ExtReal::NegInf);
    }

    #[test]
    fn not_associative_around_infinity() {
        // (inf + -inf) + 1 = 1 but inf + (-inf + 1) = 0
        let (p, n, one) = (ExtReal::PosInf, ExtReal::NegInf, ExtReal::from_int(1));
        assert_eq!(p.ext_add(&n).ext_add(&one), one);
        assert_eq!(p.ext_add(&n.ext_add(&one)), ExtReal::zero());
    }

    #[test]
    fn order_and_products() {
        assert!(ExtReal::NegInf < ExtReal::Finite(rat(-1000, 1)));
        assert!(ExtReal::Finite(rat(1000, 1)) < ExtReal::PosInf);
        assert_eq!(ExtReal::PosInf.mul(&ExtReal::zero()), ExtReal::zero());
        assert_eq!(ExtReal::PosInf.scale(&rat(-1, 2)), ExtReal::NegInf);
    }

    #[test]
    fn json() {
        for x in [ExtReal::PosInf, ExtReal::NegInf, ExtReal::Finite(rat(3, 4))] {
            assert_eq!(ExtReal::from_json(&x.to_json()).unwrap(), x);
        }
    }
}
