//! Exact rational numbers in canonical form.
//!
//! Values whose numerator and denominator fit in an `i64` are kept inline and
//! combined through `i128` intermediates; anything larger spills into a
//! [`BigRational`]. The representation is always canonical (reduced, positive
//! denominator, inline whenever it fits), so derived equality and hashing are
//! structural.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Rational(Repr);

#[derive(Clone, PartialEq, Eq, Hash)]
enum Repr {
    /// `den >= 1`, `gcd(|num|, den) = 1`, `num != i64::MIN`.
    Small(i64, i64),
    Big(BigRational),
}

fn gcd_u128(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

fn fits(v: i128) -> bool {
    v > i64::MIN as i128 && v <= i64::MAX as i128
}

impl Rational {
    /// Builds `num / den`. Panics when `den == 0`.
    pub fn new(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Self::from_i128(num as i128, den as i128)
    }

    pub fn from_integer(v: i64) -> Self {
        Self::from_i128(v as i128, 1)
    }

    pub fn zero() -> Self {
        Rational(Repr::Small(0, 1))
    }

    pub fn one() -> Self {
        Rational(Repr::Small(1, 1))
    }

    fn from_i128(num: i128, den: i128) -> Self {
        debug_assert!(den != 0);
        let (mut n, mut d) = if den < 0 { (-num, -den) } else { (num, den) };
        let g = gcd_u128(n.unsigned_abs(), d as u128) as i128;
        if g > 1 {
            n /= g;
            d /= g;
        }
        if fits(n) && fits(d) {
            Rational(Repr::Small(n as i64, d as i64))
        } else {
            Rational(Repr::Big(BigRational::new_raw(n.into(), d.into())))
        }
    }

    /// Canonicalizes a big value, demoting it to the inline form if possible.
    pub fn from_big(v: BigRational) -> Self {
        // BigRational::new reduces; new_raw values coming from arithmetic are
        // already reduced by num-rational.
        match (v.numer().to_i128(), v.denom().to_i128()) {
            (Some(n), Some(d)) if fits(n) && fits(d) => Rational(Repr::Small(n as i64, d as i64)),
            _ => Rational(Repr::Big(v)),
        }
    }

    pub fn to_big(&self) -> BigRational {
        match &self.0 {
            Repr::Small(n, d) => BigRational::new_raw(BigInt::from(*n), BigInt::from(*d)),
            Repr::Big(b) => b.clone(),
        }
    }

    pub fn numer(&self) -> BigInt {
        match &self.0 {
            Repr::Small(n, _) => BigInt::from(*n),
            Repr::Big(b) => b.numer().clone(),
        }
    }

    pub fn denom(&self) -> BigInt {
        match &self.0 {
            Repr::Small(_, d) => BigInt::from(*d),
            Repr::Big(b) => b.denom().clone(),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.0, Repr::Small(0, _))
    }

    pub fn is_positive(&self) -> bool {
        match &self.0 {
            Repr::Small(n, _) => *n > 0,
            Repr::Big(b) => b.is_positive(),
        }
    }

    pub fn is_negative(&self) -> bool {
        match &self.0 {
            Repr::Small(n, _) => *n < 0,
            Repr::Big(b) => b.is_negative(),
        }
    }

    pub fn is_integer(&self) -> bool {
        match &self.0 {
            Repr::Small(_, d) => *d == 1,
            Repr::Big(b) => b.is_integer(),
        }
    }

    /// The value as an `i64`, if it is an integer in range.
    pub fn to_i64(&self) -> Option<i64> {
        match &self.0 {
            Repr::Small(n, 1) => Some(*n),
            _ => None,
        }
    }

    pub fn abs(&self) -> Self {
        if self.is_negative() {
            -self
        } else {
            self.clone()
        }
    }

    pub fn floor(&self) -> Self {
        match &self.0 {
            Repr::Small(n, d) => Self::from_integer(n.div_floor(d)),
            Repr::Big(b) => Self::from_big(b.floor()),
        }
    }

    pub fn ceil(&self) -> Self {
        match &self.0 {
            Repr::Small(n, d) => Self::from_integer(n.div_ceil(d)),
            Repr::Big(b) => Self::from_big(b.ceil()),
        }
    }

    /// `(a + b) / 2`.
    pub fn midpoint(a: &Rational, b: &Rational) -> Rational {
        (a + b) / Rational::from_integer(2)
    }

    pub fn recip(&self) -> Self {
        Rational::one() / self
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $small:expr, $big:expr) => {
        impl<'a> $trait<&'a Rational> for &'a Rational {
            type Output = Rational;
            fn $method(self, rhs: &'a Rational) -> Rational {
                match (&self.0, &rhs.0) {
                    (Repr::Small(a, b), Repr::Small(c, d)) => {
                        let f: fn(i128, i128, i128, i128) -> Rational = $small;
                        f(*a as i128, *b as i128, *c as i128, *d as i128)
                    }
                    _ => {
                        let f: fn(BigRational, BigRational) -> BigRational = $big;
                        Rational::from_big(f(self.to_big(), rhs.to_big()))
                    }
                }
            }
        }
        impl $trait<Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                (&self).$method(&rhs)
            }
        }
        impl<'a> $trait<&'a Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &'a Rational) -> Rational {
                (&self).$method(rhs)
            }
        }
        impl<'a> $trait<Rational> for &'a Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                self.$method(&rhs)
            }
        }
    };
}

binop!(Add, add, |a, b, c, d| Rational::from_i128(a * d + c * b, b * d), |x, y| x + y);
binop!(Sub, sub, |a, b, c, d| Rational::from_i128(a * d - c * b, b * d), |x, y| x - y);
binop!(Mul, mul, |a, b, c, d| Rational::from_i128(a * c, b * d), |x, y| x * y);
binop!(
    Div,
    div,
    |a, b, c, d| {
        assert!(c != 0, "division by zero");
        Rational::from_i128(a * d, b * c)
    },
    |x, y| {
        assert!(!y.is_zero(), "division by zero");
        x / y
    }
);

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        match &self.0 {
            Repr::Small(n, d) => Rational(Repr::Small(-n, *d)),
            Repr::Big(b) => Rational::from_big(-b),
        }
    }
}

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        -&self
    }
}

impl Ord for Rational {
    fn cmp(&self, other: &Self) -> Ordering {
        match (&self.0, &other.0) {
            (Repr::Small(a, b), Repr::Small(c, d)) => {
                (*a as i128 * *d as i128).cmp(&(*c as i128 * *b as i128))
            }
            _ => self.to_big().cmp(&other.to_big()),
        }
    }
}

impl PartialOrd for Rational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl From<i64> for Rational {
    fn from(v: i64) -> Self {
        Rational::from_integer(v)
    }
}

impl From<BigInt> for Rational {
    fn from(v: BigInt) -> Self {
        Rational::from_big(BigRational::from_integer(v))
    }
}

impl Default for Rational {
    fn default() -> Self {
        Rational::zero()
    }
}

impl std::iter::Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Self {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

impl<'a> std::iter::Sum<&'a Rational> for Rational {
    fn sum<I: Iterator<Item = &'a Rational>>(iter: I) -> Self {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            Repr::Small(n, 1) => write!(f, "{n}"),
            Repr::Small(n, d) => write!(f, "{n}/{d}"),
            Repr::Big(b) if b.is_integer() => write!(f, "{}", b.numer()),
            Repr::Big(b) => write!(f, "{}/{}", b.numer(), b.denom()),
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid rational literal {0:?}")]
pub struct ParseRationalError(pub String);

impl FromStr for Rational {
    type Err = ParseRationalError;

    /// Accepts `"p"` or `"p/q"` with `q != 0`; the result is canonicalized.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseRationalError(s.to_string());
        let t = s.trim();
        let (n, d) = match t.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (t, "1"),
        };
        let n: BigInt = n.parse().map_err(|_| err())?;
        let d: BigInt = d.parse().map_err(|_| err())?;
        if d.is_zero() {
            return Err(err());
        }
        Ok(Rational::from_big(BigRational::new(n, d)))
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Lit {
            Int(i64),
            Str(String),
        }
        match Lit::deserialize(d)? {
            Lit::Int(v) => Ok(Rational::from_integer(v)),
            Lit::Str(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Shorthand for `Rational::new(num, den)`.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(num, den)
}

/// Shorthand for an integer-valued rational.
pub fn int(v: i64) -> Rational {
    Rational::from_integer(v)
}

/// Parses a comma-separated list of rationals, e.g. `"3,5/2,1"`.
pub fn parse_list(s: &str) -> Result<Vec<Rational>, ParseRationalError> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',').map(str::parse).collect()
}

/// Least common multiple of all denominators.
pub fn lcm_of_denominators<'a>(values: impl IntoIterator<Item = &'a Rational>) -> BigInt {
    values
        .into_iter()
        .fold(BigInt::one(), |acc, v| acc.lcm(&v.denom()))
}
