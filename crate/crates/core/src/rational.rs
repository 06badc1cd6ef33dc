//! Exact rational numbers.
//!
//! [`Rational`] wraps an arbitrary-precision fraction that is always stored in
//! lowest terms with a positive denominator, so structural equality is value
//! equality. Nothing in the exponent pipeline touches floating point; decimal
//! strings are produced only for display, by exact round-half-even rounding.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use dashu_int::{IBig, UBig};
use dashu_ratio::RBig;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{domain, Error, Result};

/// Number of fractional digits carried by the `approx` field of the JSON form.
pub const JSON_APPROX_DIGITS: usize = 12;

/// An exact fraction in lowest terms.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Rational(RBig);

/// The four field operations, for callers that pick the operation at runtime.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl Rational {
    /// Builds `num/den` in reduced form. Fails on a zero denominator.
    pub fn new(num: impl Into<IBig>, den: impl Into<IBig>) -> Result<Self> {
        let den = den.into();
        if den == IBig::ZERO {
            return Err(Error::ZeroDenominator);
        }
        Ok(Self(RBig::from_parts_signed(num.into(), den)))
    }

    pub fn integer(value: impl Into<IBig>) -> Self {
        Self(RBig::from(value.into()))
    }

    pub fn zero() -> Self {
        Self(RBig::ZERO)
    }

    pub fn one() -> Self {
        Self(RBig::ONE)
    }

    pub fn numer(&self) -> &IBig {
        self.0.numerator()
    }

    pub fn denom(&self) -> &UBig {
        self.0.denominator()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_int()
    }

    pub fn is_positive(&self) -> bool {
        *self.numer() > IBig::ZERO
    }

    pub fn is_negative(&self) -> bool {
        *self.numer() < IBig::ZERO
    }

    pub fn abs(&self) -> Self {
        if self.is_negative() {
            -self
        } else {
            self.clone()
        }
    }

    /// `1/self`, failing on zero.
    pub fn recip(&self) -> Result<Self> {
        Self::one().checked_div(self)
    }

    pub fn checked_div(&self, rhs: &Self) -> Result<Self> {
        if rhs.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Self(&self.0 / &rhs.0))
    }

    /// Largest integer not exceeding the value.
    pub fn floor(&self) -> IBig {
        self.0.floor()
    }

    /// Decimal expansion with exactly `digits` fractional digits, rounded
    /// half-to-even. `digits = 0` yields a bare integer.
    pub fn to_decimal(&self, digits: usize) -> String {
        let scaled = self.numer().clone() * IBig::from(10u8).pow(digits);
        let den = IBig::from(self.denom().clone());
        let negative = scaled < IBig::ZERO;
        let magnitude = if negative { -scaled } else { scaled };
        let (mut quot, rem) = (&magnitude / &den, &magnitude % &den);
        let twice = rem * IBig::from(2u8);
        let round_up = match twice.cmp(&den) {
            Ordering::Greater => true,
            Ordering::Equal => (&quot % IBig::from(2u8)) != IBig::ZERO,
            Ordering::Less => false,
        };
        if round_up {
            quot += IBig::ONE;
        }
        format_fixed(&quot, digits, negative && quot != IBig::ZERO)
    }

    /// Renders the value the way exponent tables do: `2+a/b` when the value
    /// exceeds 2, plain `a/b` otherwise.
    pub fn excess_form(&self) -> String {
        let two = Self::integer(2);
        if *self > two {
            let rest = self - &two;
            if rest.is_integer() {
                format!("2+{}", rest.numer())
            } else {
                format!("2+{rest}")
            }
        } else {
            self.to_string()
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
}

pub(crate) fn format_fixed(magnitude: &IBig, digits: usize, negative: bool) -> String {
    let mut body = magnitude.to_string();
    if digits > 0 {
        if body.len() <= digits {
            body = format!("{}{}", "0".repeat(digits + 1 - body.len()), body);
        }
        body.insert(body.len() - digits, '.');
    }
    if negative {
        body.insert(0, '-');
    }
    body
}

/// `num/den` for formula constants whose denominator is known to be nonzero.
pub(crate) fn ratio(num: i128, den: i128) -> Rational {
    Rational::new(num, den).expect("formula denominator is nonzero")
}

/// Constructor with the argument order used throughout the exponent tables.
pub fn rational(num: impl Into<IBig>, den: impl Into<IBig>) -> Result<Rational> {
    Rational::new(num, den)
}

/// Applies one field operation; division by zero is reported, not panicked.
pub fn arith(a: &Rational, b: &Rational, op: ArithOp) -> Result<Rational> {
    Ok(match op {
        ArithOp::Add => a + b,
        ArithOp::Sub => a - b,
        ArithOp::Mul => a * b,
        ArithOp::Div => a.checked_div(b)?,
    })
}

/// Exact `1/lo + 1/(lo+1) + ... + 1/hi`.
///
/// The sum is accumulated by binary splitting without intermediate
/// reduction, then reduced once.
pub fn harmonic_sum(lo: u64, hi: u64) -> Result<Rational> {
    if lo == 0 {
        return Err(domain("lo", 0, "[1, hi]"));
    }
    if lo > hi {
        return Err(Error::EmptyRange { lo, hi });
    }
    let (num, den) = split_sum(lo, hi + 1);
    Rational::new(num, den)
}

// Unreduced sum of 1/k for k in [a, b).
fn split_sum(a: u64, b: u64) -> (IBig, IBig) {
    if b - a == 1 {
        return (IBig::ONE, IBig::from(a));
    }
    let mid = a + (b - a) / 2;
    let (n1, d1) = split_sum(a, mid);
    let (n2, d2) = split_sum(mid, b);
    (n1 * &d2 + n2 * &d1, d1 * d2)
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numer(), self.denom())
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Rational {
    type Err = Error;

    /// Accepts `a/b` or a bare integer `a`.
    fn from_str(s: &str) -> Result<Self> {
        let parse_err = || Error::Parse(s.to_string());
        let trimmed = s.trim();
        match trimmed.split_once('/') {
            Some((num, den)) => {
                let num = IBig::from_str(num.trim()).map_err(|_| parse_err())?;
                let den = IBig::from_str(den.trim()).map_err(|_| parse_err())?;
                Rational::new(num, den)
            }
            None => {
                let num = IBig::from_str(trimmed).map_err(|_| parse_err())?;
                Ok(Rational::integer(num))
            }
        }
    }
}

impl From<i64> for Rational {
    fn from(value: i64) -> Self {
        Self::integer(value)
    }
}

impl From<u32> for Rational {
    fn from(value: u32) -> Self {
        Self::integer(value)
    }
}

impl From<IBig> for Rational {
    fn from(value: IBig) -> Self {
        Self::integer(value)
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident) => {
        impl $trait<&Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                Rational((&self.0).$method(&rhs.0))
            }
        }
        impl $trait<Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational(self.0.$method(rhs.0))
            }
        }
        impl $trait<&Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                Rational(self.0.$method(&rhs.0))
            }
        }
        impl $trait<Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational((&self.0).$method(rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);
// Panics on a zero divisor, like integer division; use `checked_div` or
// `arith` when the divisor is not known to be nonzero.
forward_binop!(Div, div);

impl AddAssign<&Rational> for Rational {
    fn add_assign(&mut self, rhs: &Rational) {
        self.0 += &rhs.0;
    }
}

impl SubAssign<&Rational> for Rational {
    fn sub_assign(&mut self, rhs: &Rational) {
        self.0 -= &rhs.0;
    }
}

impl MulAssign<&Rational> for Rational {
    fn mul_assign(&mut self, rhs: &Rational) {
        self.0 *= &rhs.0;
    }
}

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0.clone())
    }
}

#[derive(Serialize)]
struct RationalRepr<'a> {
    num: String,
    den: String,
    approx: &'a str,
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let approx = self.to_decimal(JSON_APPROX_DIGITS);
        RationalRepr {
            num: self.numer().to_string(),
            den: self.denom().to_string(),
            approx: &approx,
        }
        .serialize(serializer)
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RationalInput {
    Parts {
        num: String,
        den: String,
        #[allow(dead_code)]
        #[serde(default)]
        approx: Option<String>,
    },
    Text(String),
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = match RationalInput::deserialize(deserializer)? {
            RationalInput::Parts { num, den, .. } => format!("{num}/{den}"),
            RationalInput::Text(text) => text,
        };
        text.parse().map_err(serde::de::Error::custom)
    }
}
