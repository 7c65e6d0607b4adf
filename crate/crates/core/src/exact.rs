//! Exact arithmetic over the rationals and over a quadratic extension `Q(√d)`.
//!
//! Every order-condition computation runs in [`ExactScalar`], a value of the
//! form `a + b·√d` with arbitrary-precision rational `a`, `b`. A computation
//! uses a single discriminant; purely rational values carry `d = 0` and mix
//! freely with any discriminant.
//!
//! The textual form used by tableau files and reports is the *entry literal*:
//!
//! ```text
//! RAT   := ['-'] DIGITS ['/' DIGITS]
//! ENTRY := RAT | RAT '|' RAT        // "a|b" is a + b·√d
//! ```

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_integer::Roots;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Serialize, Serializer};
use thiserror::Error;

/// Arbitrary-precision rational, always stored reduced with a positive denominator.
pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExactError {
    #[error("malformed entry literal `{0}`")]
    Malformed(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
    #[error("discriminant mismatch: √{0} vs √{1}")]
    DiscriminantMismatch(u64, u64),
    #[error("irrational literal `{0}` used without a discriminant")]
    MissingDiscriminant(String),
    #[error("division by zero")]
    DivisionByZero,
}

/// An element `a + b·√d` of `Q(√d)`.
///
/// Invariants: when `b = 0` the discriminant is stored as `0`; `d` is never
/// a perfect square greater than zero (such values fold into `a`).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ExactScalar {
    a: Rational,
    b: Rational,
    d: u64,
}

impl ExactScalar {
    /// Builds `a + b·√d`, normalizing rational values to `d = 0`.
    pub fn new(a: Rational, b: Rational, d: u64) -> Self {
        let mut x = ExactScalar { a, b, d };
        x.normalize();
        x
    }

    pub fn rational(a: Rational) -> Self {
        ExactScalar { a, b: Rational::zero(), d: 0 }
    }

    pub fn from_integer(n: i64) -> Self {
        Self::rational(Rational::from_integer(BigInt::from(n)))
    }

    /// `num/den` as an exact rational. Panics on a zero denominator.
    pub fn ratio(num: i64, den: i64) -> Self {
        Self::rational(Rational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn zero() -> Self {
        Self::rational(Rational::zero())
    }

    pub fn one() -> Self {
        Self::rational(Rational::one())
    }

    fn normalize(&mut self) {
        if self.d == 0 {
            self.b.set_zero();
        } else if !self.b.is_zero() {
            let root = self.d.sqrt();
            if root * root == self.d {
                let folded = &self.b * Rational::from_integer(BigInt::from(root));
                self.a = &self.a + folded;
                self.b.set_zero();
            }
        }
        if self.b.is_zero() {
            self.d = 0;
        }
    }

    /// Rational part `a`.
    pub fn rational_part(&self) -> &Rational {
        &self.a
    }

    /// Coefficient `b` of `√d`.
    pub fn irrational_part(&self) -> &Rational {
        &self.b
    }

    /// Stored discriminant; `0` for purely rational values.
    pub fn discriminant(&self) -> u64 {
        self.d
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn conjugate(&self) -> Self {
        ExactScalar { a: self.a.clone(), b: -&self.b, d: self.d }
    }

    /// The field norm `a² − d·b²`.
    pub fn norm(&self) -> Rational {
        let d = Rational::from_integer(BigInt::from(self.d));
        &self.a * &self.a - d * &self.b * &self.b
    }

    fn common_discriminant(&self, other: &Self) -> Result<u64, ExactError> {
        match (self.d, other.d) {
            (0, d) | (d, 0) => Ok(d),
            (x, y) if x == y => Ok(x),
            (x, y) => Err(ExactError::DiscriminantMismatch(x, y)),
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self, ExactError> {
        let d = self.common_discriminant(other)?;
        Ok(Self::new(&self.a + &other.a, &self.b + &other.b, d))
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self, ExactError> {
        let d = self.common_discriminant(other)?;
        Ok(Self::new(&self.a - &other.a, &self.b - &other.b, d))
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self, ExactError> {
        let d = self.common_discriminant(other)?;
        let dd = Rational::from_integer(BigInt::from(d));
        let a = &self.a * &other.a + dd * &self.b * &other.b;
        let b = &self.a * &other.b + &self.b * &other.a;
        Ok(Self::new(a, b, d))
    }

    /// `(a + b√d)⁻¹ = (a − b√d) / (a² − d·b²)`.
    pub fn inverse(&self) -> Result<Self, ExactError> {
        if self.is_zero() {
            return Err(ExactError::DivisionByZero);
        }
        let norm = self.norm();
        Ok(Self::new(&self.a / &norm, -&self.b / &norm, self.d))
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self, ExactError> {
        self.common_discriminant(other)?;
        self.checked_mul(&other.inverse()?)
    }

    /// Sign of the real number `a + b√d`, computed exactly.
    pub fn signum(&self) -> Ordering {
        let sa = self.a.cmp(&Rational::zero());
        let sb = self.b.cmp(&Rational::zero());
        if sb == Ordering::Equal {
            return sa;
        }
        if sa == Ordering::Equal || sa == sb {
            return sb;
        }
        // Opposite signs: compare a² with d·b².
        let d = Rational::from_integer(BigInt::from(self.d));
        let lhs = &self.a * &self.a;
        let rhs = d * &self.b * &self.b;
        match lhs.cmp(&rhs) {
            Ordering::Greater => sa,
            Ordering::Less => sb,
            Ordering::Equal => Ordering::Equal,
        }
    }

    pub fn abs(&self) -> Self {
        if self.signum() == Ordering::Less {
            -self
        } else {
            self.clone()
        }
    }

    /// Nearest binary64 value. `√d` is approximated to 2⁻¹²⁸ before the
    /// final rational-to-float rounding, so the result is correctly rounded
    /// except in vanishingly close ties.
    pub fn to_f64(&self) -> f64 {
        if self.b.is_zero() {
            return self.a.to_f64().unwrap_or(f64::NAN);
        }
        const BITS: usize = 128;
        let scaled = BigInt::from(self.d) << (2 * BITS);
        let root = scaled.sqrt();
        let sqrt_d = Rational::new(root, BigInt::one() << BITS);
        (&self.a + &self.b * sqrt_d).to_f64().unwrap_or(f64::NAN)
    }

    /// Parses an entry literal; `d` is the discriminant of the enclosing tableau.
    pub fn parse(text: &str, d: u64) -> Result<Self, ExactError> {
        match text.split_once('|') {
            None => Ok(Self::rational(parse_rational(text)?)),
            Some((a, b)) => {
                let a = parse_rational(a).map_err(|e| relabel(e, text))?;
                let b = parse_rational(b).map_err(|e| relabel(e, text))?;
                if d == 0 && !b.is_zero() {
                    return Err(ExactError::MissingDiscriminant(text.to_string()));
                }
                Ok(Self::new(a, b, d))
            }
        }
    }
}

fn relabel(err: ExactError, text: &str) -> ExactError {
    match err {
        ExactError::Malformed(_) => ExactError::Malformed(text.to_string()),
        ExactError::ZeroDenominator(_) => ExactError::ZeroDenominator(text.to_string()),
        other => other,
    }
}

fn parse_digits(digits: &str, whole: &str) -> Result<BigInt, ExactError> {
    if digits.is_empty() || !digits.bytes().all(|c| c.is_ascii_digit()) {
        return Err(ExactError::Malformed(whole.to_string()));
    }
    BigInt::parse_bytes(digits.as_bytes(), 10).ok_or_else(|| ExactError::Malformed(whole.to_string()))
}

/// Parses `['-'] DIGITS ['/' DIGITS]`.
pub fn parse_rational(text: &str) -> Result<Rational, ExactError> {
    let (negative, body) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text),
    };
    let (num, den) = match body.split_once('/') {
        Some((n, d)) => (parse_digits(n, text)?, parse_digits(d, text)?),
        None => (parse_digits(body, text)?, BigInt::one()),
    };
    if den.is_zero() {
        return Err(ExactError::ZeroDenominator(text.to_string()));
    }
    let num = if negative { -num } else { num };
    Ok(Rational::new(num, den))
}

/// Renders a rational as `n` or `n/d`.
pub fn format_rational(r: &Rational) -> String {
    r.to_string()
}

impl fmt::Display for ExactScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            write!(f, "{}", self.a)
        } else {
            write!(f, "{}|{}", self.a, self.b)
        }
    }
}

impl FromStr for ExactScalar {
    type Err = ExactError;

    /// Parses a rational literal. Use [`ExactScalar::parse`] for `a|b` forms.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ExactScalar::parse(s, 0)
    }
}

impl Serialize for ExactScalar {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl From<Rational> for ExactScalar {
    fn from(r: Rational) -> Self {
        ExactScalar::rational(r)
    }
}

impl From<i64> for ExactScalar {
    fn from(n: i64) -> Self {
        ExactScalar::from_integer(n)
    }
}

impl From<&num_bigint::BigUint> for ExactScalar {
    fn from(n: &num_bigint::BigUint) -> Self {
        ExactScalar::rational(Rational::from_integer(BigInt::from_biguint(Sign::Plus, n.clone())))
    }
}

// Operator forms panic on a discriminant mismatch or division by zero; the
// `checked_*` methods report those as errors instead.

impl<'a> Add<&'a ExactScalar> for &'a ExactScalar {
    type Output = ExactScalar;
    fn add(self, rhs: &ExactScalar) -> ExactScalar {
        self.checked_add(rhs).expect("exact add")
    }
}

impl<'a> Sub<&'a ExactScalar> for &'a ExactScalar {
    type Output = ExactScalar;
    fn sub(self, rhs: &ExactScalar) -> ExactScalar {
        self.checked_sub(rhs).expect("exact sub")
    }
}

impl<'a> Mul<&'a ExactScalar> for &'a ExactScalar {
    type Output = ExactScalar;
    fn mul(self, rhs: &ExactScalar) -> ExactScalar {
        self.checked_mul(rhs).expect("exact mul")
    }
}

impl<'a> Div<&'a ExactScalar> for &'a ExactScalar {
    type Output = ExactScalar;
    fn div(self, rhs: &ExactScalar) -> ExactScalar {
        self.checked_div(rhs).expect("exact div")
    }
}

macro_rules! forward_owned {
    ($($tr:ident $method:ident),*) => {$(
        impl $tr<ExactScalar> for ExactScalar {
            type Output = ExactScalar;
            fn $method(self, rhs: ExactScalar) -> ExactScalar {
                (&self).$method(&rhs)
            }
        }
        impl<'a> $tr<&'a ExactScalar> for ExactScalar {
            type Output = ExactScalar;
            fn $method(self, rhs: &ExactScalar) -> ExactScalar {
                (&self).$method(rhs)
            }
        }
    )*};
}

forward_owned!(Add add, Sub sub, Mul mul, Div div);

impl Neg for &ExactScalar {
    type Output = ExactScalar;
    fn neg(self) -> ExactScalar {
        ExactScalar { a: -&self.a, b: -&self.b, d: self.d }
    }
}

impl Neg for ExactScalar {
    type Output = ExactScalar;
    fn neg(self) -> ExactScalar {
        -&self
    }
}

impl std::iter::Sum for ExactScalar {
    fn sum<I: Iterator<Item = ExactScalar>>(iter: I) -> Self {
        iter.fold(ExactScalar::zero(), |acc, x| acc + x)
    }
}
