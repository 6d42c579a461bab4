//! Exact-or-float scalars.
//!
//! Weight tables are usually rational (0/1 tables, random rational tests) but
//! some constructions need irrational values such as `log α`. [`Scalar`] keeps
//! rational arithmetic exact for as long as it can and degrades to `f64` on
//! the first float operand or on `i64` overflow.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{CheckedAdd, CheckedMul, CheckedSub, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub type Rational = Ratio<i64>;

/// Slack used when comparing values that went through a float path.
pub const FLOAT_SLACK: f64 = 1e-12;

#[derive(Clone, Copy, Debug)]
pub enum Scalar {
    Exact(Rational),
    Float(f64),
}

impl Scalar {
    pub const ZERO: Scalar = Scalar::Exact(Ratio::new_raw(0, 1));
    pub const ONE: Scalar = Scalar::Exact(Ratio::new_raw(1, 1));

    pub fn int(v: i64) -> Self {
        Scalar::Exact(Ratio::from_integer(v))
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        Scalar::Exact(Ratio::new(num, den))
    }

    pub fn to_f64(self) -> f64 {
        match self {
            Scalar::Exact(r) => ratio_to_f64(r),
            Scalar::Float(f) => f,
        }
    }

    pub fn as_exact(self) -> Option<Rational> {
        match self {
            Scalar::Exact(r) => Some(r),
            Scalar::Float(_) => None,
        }
    }

    pub fn is_exact(self) -> bool {
        matches!(self, Scalar::Exact(_))
    }

    pub fn abs(self) -> Self {
        match self {
            Scalar::Exact(r) => Scalar::Exact(r.abs()),
            Scalar::Float(f) => Scalar::Float(f.abs()),
        }
    }

    pub fn to_float(self) -> Self {
        Scalar::Float(self.to_f64())
    }

    /// Division by a positive integer count.
    pub fn div_int(self, n: i64) -> Self {
        assert!(n != 0, "division by zero");
        match self {
            Scalar::Exact(r) => Scalar::Exact(r / n),
            Scalar::Float(f) => Scalar::Float(f / n as f64),
        }
    }

    pub fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    pub fn min(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    /// `self <= other` allowing [`FLOAT_SLACK`] when either side is a float.
    pub fn le_slack(self, other: Self) -> bool {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => a <= b,
            _ => self.to_f64() <= other.to_f64() + FLOAT_SLACK * (1.0 + other.to_f64().abs()),
        }
    }
}

fn ratio_to_f64(r: Rational) -> f64 {
    r.to_f64()
        .unwrap_or_else(|| *r.numer() as f64 / *r.denom() as f64)
}

fn exact_or_float(
    a: Rational,
    b: Rational,
    op: impl Fn(&Rational, &Rational) -> Option<Rational>,
    fop: impl Fn(f64, f64) -> f64,
) -> Scalar {
    match op(&a, &b) {
        Some(r) => Scalar::Exact(r),
        None => Scalar::Float(fop(ratio_to_f64(a), ratio_to_f64(b))),
    }
}

impl Add for Scalar {
    type Output = Scalar;
    fn add(self, rhs: Scalar) -> Scalar {
        match (self, rhs) {
            (Scalar::Exact(a), Scalar::Exact(b)) => {
                exact_or_float(a, b, |x, y| x.checked_add(y), |x, y| x + y)
            }
            _ => Scalar::Float(self.to_f64() + rhs.to_f64()),
        }
    }
}

impl Sub for Scalar {
    type Output = Scalar;
    fn sub(self, rhs: Scalar) -> Scalar {
        match (self, rhs) {
            (Scalar::Exact(a), Scalar::Exact(b)) => {
                exact_or_float(a, b, |x, y| x.checked_sub(y), |x, y| x - y)
            }
            _ => Scalar::Float(self.to_f64() - rhs.to_f64()),
        }
    }
}

impl Mul for Scalar {
    type Output = Scalar;
    fn mul(self, rhs: Scalar) -> Scalar {
        match (self, rhs) {
            (Scalar::Exact(a), Scalar::Exact(b)) => {
                exact_or_float(a, b, |x, y| x.checked_mul(y), |x, y| x * y)
            }
            _ => Scalar::Float(self.to_f64() * rhs.to_f64()),
        }
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match self {
            Scalar::Exact(r) => Scalar::Exact(-r),
            Scalar::Float(f) => Scalar::Float(-f),
        }
    }
}

impl Sum for Scalar {
    fn sum<I: Iterator<Item = Scalar>>(iter: I) -> Scalar {
        iter.fold(Scalar::ZERO, |a, b| a + b)
    }
}

impl PartialEq for Scalar {
    fn eq(&self, other: &Self) -> bool {
        self.partial_cmp(other) == Some(Ordering::Equal)
    }
}

impl PartialOrd for Scalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Some(a.cmp(b)),
            _ => self.to_f64().partial_cmp(&other.to_f64()),
        }
    }
}

impl From<i64> for Scalar {
    fn from(v: i64) -> Self {
        Scalar::int(v)
    }
}

impl From<Rational> for Scalar {
    fn from(r: Rational) -> Self {
        Scalar::Exact(r)
    }
}

impl From<f64> for Scalar {
    fn from(f: f64) -> Self {
        Scalar::Float(f)
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Exact(r) if r.is_integer() => write!(f, "{}", r.numer()),
            Scalar::Exact(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            Scalar::Float(x) => write!(f, "{x}"),
        }
    }
}

#[derive(Debug, thiserror::Error)]
#[error("cannot parse {0:?} as a rational (expected \"p\" or \"p/q\")")]
pub struct ParseScalarError(String);

impl FromStr for Scalar {
    type Err = ParseScalarError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseScalarError(s.to_string());
        let s = s.trim();
        match s.split_once('/') {
            Some((n, d)) => {
                let n: i64 = n.trim().parse().map_err(|_| err())?;
                let d: i64 = d.trim().parse().map_err(|_| err())?;
                if d.is_zero() {
                    return Err(err());
                }
                Ok(Scalar::ratio(n, d))
            }
            None => {
                if let Ok(n) = s.parse::<i64>() {
                    Ok(Scalar::int(n))
                } else {
                    s.parse::<f64>().map(Scalar::Float).map_err(|_| err())
                }
            }
        }
    }
}

impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Scalar::Exact(r) if r.is_integer() => serializer.serialize_i64(*r.numer()),
            Scalar::Exact(r) => serializer.collect_str(&format_args!("{}/{}", r.numer(), r.denom())),
            Scalar::Float(x) => serializer.serialize_f64(*x),
        }
    }
}

impl<'de> Deserialize<'de> for Scalar {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Int(i64),
            Float(f64),
            Text(String),
        }
        match Repr::deserialize(deserializer)? {
            Repr::Int(i) => Ok(Scalar::int(i)),
            Repr::Float(f) => Ok(Scalar::Float(f)),
            Repr::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Least common multiple that reports overflow instead of wrapping.
pub fn checked_lcm(a: i64, b: i64) -> Option<i64> {
    let g = a.gcd(&b);
    if g == 0 {
        return Some(0);
    }
    (a / g).checked_mul(b).map(i64::abs)
}

pub fn lcm_usize(a: usize, b: usize) -> usize {
    a / a.gcd(&b) * b
}
