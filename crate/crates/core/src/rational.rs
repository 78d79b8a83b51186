//! Exact rational helpers shared by the census, bound and structure modules.
//!
//! Everything that ends up in a comparison is kept as a [`Rational`]; floating
//! point only appears when a value is reported as a logarithm.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot parse {input:?} as an exact rational")]
pub struct ParseRationalError {
    pub input: String,
}

/// Parses `"3/5"`, `"0.6"`, `"1"`, or `"-2.25"` into an exact rational.
///
/// Decimal strings are read exactly (`"0.1"` is one tenth, not the nearest
/// binary double).
pub fn parse_rational(input: &str) -> Result<Rational, ParseRationalError> {
    let err = || ParseRationalError {
        input: input.to_string(),
    };
    let s = input.trim();
    if s.is_empty() {
        return Err(err());
    }
    if let Some((num, den)) = s.split_once('/') {
        let num: BigInt = num.trim().parse().map_err(|_| err())?;
        let den: BigInt = den.trim().parse().map_err(|_| err())?;
        if den.is_zero() {
            return Err(err());
        }
        return Ok(Rational::new(num, den));
    }
    let (negative, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(err());
    }
    let digits_ok = |p: &str| p.bytes().all(|b| b.is_ascii_digit());
    if !digits_ok(int_part) || !digits_ok(frac_part) {
        return Err(err());
    }
    let mut digits = String::with_capacity(int_part.len() + frac_part.len());
    digits.push_str(int_part);
    digits.push_str(frac_part);
    let num: BigInt = if digits.is_empty() {
        BigInt::zero()
    } else {
        digits.parse().map_err(|_| err())?
    };
    let den = num_traits::pow(BigInt::from(10u32), frac_part.len());
    let value = Rational::new(num, den);
    Ok(if negative { -value } else { value })
}

pub fn int(value: i64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn from_biguint(value: &BigUint) -> Rational {
    Rational::from_integer(BigInt::from(value.clone()))
}

/// Smallest integer `>= value`.
pub fn ceil_int(value: &Rational) -> BigInt {
    value.ceil().to_integer()
}

pub fn to_f64(value: &Rational) -> f64 {
    if value.is_zero() {
        return 0.0;
    }
    let sign = if value.is_negative() { -1.0 } else { 1.0 };
    let ln = ln_bigint(&value.numer().abs()) - ln_bigint(&value.denom().abs());
    sign * ln.exp()
}

/// Natural log of a positive big integer, accurate to f64 rounding.
pub fn ln_bigint(value: &BigInt) -> f64 {
    assert!(value.is_positive(), "ln of non-positive integer");
    let bits = value.bits();
    if bits <= 1000 {
        return value.to_f64().expect("fits in f64").ln();
    }
    let shift = bits - 64;
    let top = (value >> shift).to_f64().expect("64-bit prefix");
    top.ln() + (shift as f64) * std::f64::consts::LN_2
}

/// Natural log of a positive rational; `-inf` for zero.
pub fn ln_rational(value: &Rational) -> f64 {
    if value.is_zero() {
        return f64::NEG_INFINITY;
    }
    assert!(value.is_positive(), "ln of negative rational");
    ln_bigint(value.numer()) - ln_bigint(value.denom())
}

/// `ln(n!)`: exact summation for small `n`, Stirling series above.
pub fn ln_factorial(n: u64) -> f64 {
    if n < 2 {
        return 0.0;
    }
    if n <= 4096 {
        return (2..=n).map(|k| (k as f64).ln()).sum();
    }
    let x = n as f64;
    x * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI * x).ln() + 1.0 / (12.0 * x)
        - 1.0 / (360.0 * x.powi(3))
        + 1.0 / (1260.0 * x.powi(5))
}

pub fn factorial(n: u64) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, k| acc * k)
}

pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// `(n-1)!!` for even `n`: the number of perfect matchings on `n` points.
pub fn pairings(points: u64) -> BigUint {
    assert!(
        points.is_multiple_of(2),
        "pairings need an even number of points"
    );
    let mut acc = BigUint::one();
    let mut k = points.saturating_sub(1);
    while k > 1 {
        acc *= k;
        k -= 2;
    }
    acc
}

/// Display wrapper printing `p/q` (or `p` when integral).
pub struct Exact<'a>(pub &'a Rational);

impl fmt::Display for Exact<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

pub fn to_string(value: &Rational) -> String {
    Exact(value).to_string()
}

/// Serde adapter storing a rational as its `p/q` string.
pub mod serde_rational {
    use super::*;

    pub fn serialize<S: Serializer>(value: &Rational, s: S) -> Result<S::Ok, S::Error> {
        to_string(value).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let raw = String::deserialize(d)?;
        parse_rational(&raw).map_err(serde::de::Error::custom)
    }
}

pub mod serde_rational_opt {
    use super::*;

    pub fn serialize<S: Serializer>(value: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
        value.as_ref().map(to_string).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Rational>, D::Error> {
        let raw = Option::<String>::deserialize(d)?;
        raw.map(|r| parse_rational(&r).map_err(serde::de::Error::custom))
            .transpose()
    }
}
