//! Scalars usable by the generic linear algebra: `f64` and exact rationals.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, Signed, ToPrimitive, Zero};
use serde_json::Value;

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub trait Scalar:
    Clone + fmt::Debug + fmt::Display + PartialOrd + Num + Signed + Send + Sync + 'static
{
    /// True when arithmetic is exact and zero tests need no tolerance.
    const EXACT: bool;

    fn from_i64(v: i64) -> Self;
    fn from_f64(v: f64) -> Option<Self>;
    fn to_f64(&self) -> f64;

    /// Square root when it exists in the scalar field.
    fn sqrt_opt(&self) -> Option<Self>;

    fn to_json(&self) -> Value;
    fn from_json(v: &Value) -> Result<Self>;

    fn is_negligible(&self, tol: f64) -> bool {
        if Self::EXACT {
            self.is_zero()
        } else {
            self.to_f64().abs() <= tol
        }
    }

    /// Strictly positive beyond `tol` (exactly positive for exact scalars).
    fn is_pos(&self, tol: f64) -> bool {
        if Self::EXACT {
            self.is_positive()
        } else {
            self.to_f64() > tol
        }
    }

    fn from_ratio(p: i64, q: i64) -> Self {
        Self::from_i64(p) / Self::from_i64(q)
    }

    fn abs_f64(&self) -> f64 {
        self.to_f64().abs()
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_i64(v: i64) -> Self {
        v as f64
    }

    fn from_f64(v: f64) -> Option<Self> {
        v.is_finite().then_some(v)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn sqrt_opt(&self) -> Option<Self> {
        (*self >= 0.0).then(|| self.sqrt())
    }

    fn to_json(&self) -> Value {
        serde_json::Number::from_f64(*self).map(Value::Number).unwrap_or(Value::Null)
    }

    fn from_json(v: &Value) -> Result<Self> {
        match v {
            Value::Number(n) => n.as_f64().ok_or_else(|| Error::Parse(format!("bad number {n}"))),
            Value::String(s) => parse_rational(s).map(|r| Scalar::to_f64(&r)),
            _ => Err(Error::Parse(format!("expected number, got {v}"))),
        }
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn from_i64(v: i64) -> Self {
        Rational::from_integer(BigInt::from(v))
    }

    fn from_f64(v: f64) -> Option<Self> {
        Rational::from_float(v)
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or_else(|| {
            // numerator or denominator overflowed f64; scale down
            let shift = self.numer().bits().max(self.denom().bits()) as i64 - 900;
            let n = self.numer() >> (shift.max(0) as usize);
            let d = self.denom() >> (shift.max(0) as usize);
            n.to_f64().unwrap_or(f64::NAN) / d.to_f64().unwrap_or(f64::NAN)
        })
    }

    fn sqrt_opt(&self) -> Option<Self> {
        if self.is_negative() {
            return None;
        }
        let n = self.numer().sqrt();
        let d = self.denom().sqrt();
        (&n * &n == *self.numer() && &d * &d == *self.denom()).then(|| Rational::new(n, d))
    }

    fn to_json(&self) -> Value {
        Value::String(self.to_string())
    }

    fn from_json(v: &Value) -> Result<Self> {
        match v {
            Value::String(s) => parse_rational(s),
            Value::Number(n) => {
                if let Some(i) = n.as_i64() {
                    Ok(Rational::from_i64(i))
                } else {
                    let f = n.as_f64().ok_or_else(|| Error::Parse(format!("bad number {n}")))?;
                    <Rational as Scalar>::from_f64(f).ok_or_else(|| Error::Parse(format!("bad number {n}")))
                }
            }
            _ => Err(Error::Parse(format!("expected rational, got {v}"))),
        }
    }
}

/// Parses `"p/q"`, `"p"` or a decimal literal.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    if let Ok(r) = Rational::from_str(s) {
        if r.denom().is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s}")));
        }
        return Ok(r);
    }
    let f: f64 = s.parse().map_err(|_| Error::Parse(format!("not a rational: {s}")))?;
    <Rational as Scalar>::from_f64(f).ok_or_else(|| Error::Parse(format!("not finite: {s}")))
}

pub fn rat(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

pub fn binomial(n: usize, k: usize) -> i64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r: i64 = 1;
    for i in 0..k {
        r = r * (n - i) as i64 / (i + 1) as i64;
    }
    r
}

pub fn sign_i(i: usize) -> i64 {
    if i % 2 == 0 { 1 } else { -1 }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_roundtrip() {
        let r = rat(-3, 7);
        let v = r.to_json();
        assert_eq!(v, Value::String("-3/7".into()));
        assert_eq!(Rational::from_json(&v).unwrap(), r);
        assert_eq!(Rational::from_json(&serde_json::json!(5)).unwrap(), rat(5, 1));
    }

    #[test]
    fn sqrt_of_squares() {
        assert_eq!(rat(9, 4).sqrt_opt(), Some(rat(3, 2)));
        assert_eq!(rat(2, 1).sqrt_opt(), None);
        assert_eq!(rat(-1, 1).sqrt_opt(), None);
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(4, 2), 6);
        assert_eq!(binomial(5, 0), 1);
        assert_eq!(binomial(3, 5), 0);
    }

    #[test]
    fn bad_denominator() {
        assert!(parse_rational("1/0").is_err());
    }
}
