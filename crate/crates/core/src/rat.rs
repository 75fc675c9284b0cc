//! Exact rational arithmetic.
//!
//! Every time, cost, distance and dual value in this crate is a [`Rat`].
//! Event ordering in the growth engines and gadget edge lengths like
//! `1/(6k)` require exact comparisons, so floating point is banned from
//! the core. The representation keeps a reduced `i64/i64` fraction as the
//! fast path and falls back to an arbitrary-precision fraction only when
//! a value leaves the `i64` range; values are demoted back as soon as
//! they fit again, so equal values always have equal representations.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::de::Error as DeError;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

#[derive(Clone)]
pub enum Rat {
    /// Reduced fraction, denominator > 0.
    Small(i64, i64),
    /// Reduced fraction outside the `i64` range (invariant: never fits `Small`).
    Big(Box<BigRational>),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseRatError {
    #[error("empty rational literal")]
    Empty,
    #[error("invalid rational literal {0:?}")]
    Invalid(String),
    #[error("zero denominator in {0:?}")]
    ZeroDenominator(String),
}

fn gcd_u128(mut a: u128, mut b: u128) -> u128 {
    if a == 0 {
        return b;
    }
    if b == 0 {
        return a;
    }
    let shift = (a | b).trailing_zeros();
    a >>= a.trailing_zeros();
    loop {
        b >>= b.trailing_zeros();
        if a > b {
            std::mem::swap(&mut a, &mut b);
        }
        b -= a;
        if b == 0 {
            return a << shift;
        }
    }
}

/// Builds a reduced `Rat` from a signed i128 fraction, `den != 0`.
fn make_i128(mut num: i128, mut den: i128) -> Rat {
    debug_assert!(den != 0);
    if den < 0 {
        num = -num;
        den = -den;
    }
    if num == 0 {
        return Rat::Small(0, 1);
    }
    let g = gcd_u128(num.unsigned_abs(), den as u128) as i128;
    num /= g;
    den /= g;
    if let (Ok(n), Ok(d)) = (i64::try_from(num), i64::try_from(den)) {
        Rat::Small(n, d)
    } else {
        Rat::Big(Box::new(BigRational::new(num.into(), den.into())))
    }
}

/// Demotes a big rational back to the small representation when possible.
fn from_big(r: BigRational) -> Rat {
    if let (Some(n), Some(d)) = (r.numer().to_i64(), r.denom().to_i64()) {
        Rat::Small(n, d)
    } else {
        Rat::Big(Box::new(r))
    }
}

impl Rat {
    pub const ZERO: Rat = Rat::Small(0, 1);
    pub const ONE: Rat = Rat::Small(1, 1);

    pub fn new<N: Into<i64>, D: Into<i64>>(num: N, den: D) -> Rat {
        let d: i64 = den.into();
        assert!(d != 0, "zero denominator");
        make_i128(num.into() as i128, d as i128)
    }

    pub fn int(n: i64) -> Rat {
        Rat::Small(n, 1)
    }

    pub fn zero() -> Rat {
        Rat::ZERO
    }

    pub fn one() -> Rat {
        Rat::ONE
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Rat::Small(0, _))
    }

    pub fn is_negative(&self) -> bool {
        match self {
            Rat::Small(n, _) => *n < 0,
            Rat::Big(r) => r.is_negative(),
        }
    }

    pub fn is_positive(&self) -> bool {
        match self {
            Rat::Small(n, _) => *n > 0,
            Rat::Big(r) => r.is_positive(),
        }
    }

    pub fn abs(&self) -> Rat {
        if self.is_negative() {
            -self.clone()
        } else {
            self.clone()
        }
    }

    pub fn recip(&self) -> Rat {
        match self {
            Rat::Small(n, d) => {
                assert!(*n != 0, "division by zero");
                make_i128(*d as i128, *n as i128)
            }
            Rat::Big(r) => from_big(r.recip()),
        }
    }

    pub fn min(self, other: Rat) -> Rat {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn max(self, other: Rat) -> Rat {
        if self >= other {
            self
        } else {
            other
        }
    }

    pub fn to_big(&self) -> BigRational {
        match self {
            Rat::Small(n, d) => BigRational::new(BigInt::from(*n), BigInt::from(*d)),
            Rat::Big(r) => (**r).clone(),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Rat::Small(n, d) => *n as f64 / *d as f64,
            Rat::Big(r) => r.to_f64().unwrap_or(f64::NAN),
        }
    }

    /// Exact "p/q" form ("p" when q = 1); used in all serialized output.
    pub fn to_frac_string(&self) -> String {
        match self {
            Rat::Small(n, 1) => format!("{n}"),
            Rat::Small(n, d) => format!("{n}/{d}"),
            Rat::Big(r) => {
                if r.denom() == &BigInt::from(1) {
                    format!("{}", r.numer())
                } else {
                    format!("{}/{}", r.numer(), r.denom())
                }
            }
        }
    }
}

impl Default for Rat {
    fn default() -> Self {
        Rat::ZERO
    }
}

impl fmt::Display for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_frac_string())
    }
}

impl fmt::Debug for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_frac_string())
    }
}

impl PartialEq for Rat {
    fn eq(&self, other: &Self) -> bool {
        // Reduced forms are canonical and Big never aliases a Small value.
        match (self, other) {
            (Rat::Small(a, b), Rat::Small(c, d)) => a == c && b == d,
            (Rat::Big(a), Rat::Big(b)) => a == b,
            _ => false,
        }
    }
}

impl Eq for Rat {}

impl PartialOrd for Rat {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Rat {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Rat::Small(a, b), Rat::Small(c, d)) => {
                (*a as i128 * *d as i128).cmp(&(*c as i128 * *b as i128))
            }
            _ => self.to_big().cmp(&other.to_big()),
        }
    }
}

impl Hash for Rat {
    fn hash<H: Hasher>(&self, state: &mut H) {
        match self {
            Rat::Small(n, d) => {
                state.write_u8(0);
                n.hash(state);
                d.hash(state);
            }
            Rat::Big(r) => {
                state.write_u8(1);
                r.numer().to_signed_bytes_le().hash(state);
                r.denom().to_signed_bytes_le().hash(state);
            }
        }
    }
}

impl From<i64> for Rat {
    fn from(n: i64) -> Self {
        Rat::int(n)
    }
}

impl From<u32> for Rat {
    fn from(n: u32) -> Self {
        Rat::int(n as i64)
    }
}

impl From<usize> for Rat {
    fn from(n: usize) -> Self {
        match i64::try_from(n) {
            Ok(v) => Rat::int(v),
            Err(_) => from_big(BigRational::from(BigInt::from(n))),
        }
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $small:expr, $big:expr) => {
        impl $trait for &Rat {
            type Output = Rat;
            fn $method(self, rhs: &Rat) -> Rat {
                match (self, rhs) {
                    (Rat::Small(a, b), Rat::Small(c, d)) => {
                        let small: fn(i128, i128, i128, i128) -> Rat = $small;
                        small(*a as i128, *b as i128, *c as i128, *d as i128)
                    }
                    _ => {
                        let big: fn(BigRational, BigRational) -> BigRational = $big;
                        from_big(big(self.to_big(), rhs.to_big()))
                    }
                }
            }
        }
        impl $trait for Rat {
            type Output = Rat;
            fn $method(self, rhs: Rat) -> Rat {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&Rat> for Rat {
            type Output = Rat;
            fn $method(self, rhs: &Rat) -> Rat {
                (&self).$method(rhs)
            }
        }
        impl $trait<Rat> for &Rat {
            type Output = Rat;
            fn $method(self, rhs: Rat) -> Rat {
                self.$method(&rhs)
            }
        }
    };
}

binop!(Add, add, |a, b, c, d| make_i128(a * d + c * b, b * d), |x, y| x + y);
binop!(Sub, sub, |a, b, c, d| make_i128(a * d - c * b, b * d), |x, y| x - y);
binop!(Mul, mul, |a, b, c, d| make_i128(a * c, b * d), |x, y| x * y);
binop!(
    Div,
    div,
    |a, b, c, d| {
        assert!(c != 0, "division by zero");
        make_i128(a * d, b * c)
    },
    |x, y| x / y
);

impl Neg for &Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        match self {
            Rat::Small(n, d) => Rat::Small(-n, *d),
            Rat::Big(r) => from_big(-(**r).clone()),
        }
    }
}

impl Neg for Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        -&self
    }
}

impl AddAssign<&Rat> for Rat {
    fn add_assign(&mut self, rhs: &Rat) {
        *self = &*self + rhs;
    }
}

impl AddAssign for Rat {
    fn add_assign(&mut self, rhs: Rat) {
        *self = &*self + &rhs;
    }
}

impl SubAssign<&Rat> for Rat {
    fn sub_assign(&mut self, rhs: &Rat) {
        *self = &*self - rhs;
    }
}

impl SubAssign for Rat {
    fn sub_assign(&mut self, rhs: Rat) {
        *self = &*self - &rhs;
    }
}

impl MulAssign<&Rat> for Rat {
    fn mul_assign(&mut self, rhs: &Rat) {
        *self = &*self * rhs;
    }
}

impl MulAssign for Rat {
    fn mul_assign(&mut self, rhs: Rat) {
        *self = &*self * &rhs;
    }
}

impl DivAssign<&Rat> for Rat {
    fn div_assign(&mut self, rhs: &Rat) {
        *self = &*self / rhs;
    }
}

impl DivAssign for Rat {
    fn div_assign(&mut self, rhs: Rat) {
        *self = &*self / &rhs;
    }
}

impl Sum for Rat {
    fn sum<I: Iterator<Item = Rat>>(iter: I) -> Rat {
        iter.fold(Rat::ZERO, |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a Rat> for Rat {
    fn sum<I: Iterator<Item = &'a Rat>>(iter: I) -> Rat {
        iter.fold(Rat::ZERO, |acc, x| acc + x)
    }
}

impl FromStr for Rat {
    type Err = ParseRatError;

    /// Parses "p/q", integers, and finite decimals ("0.75"), all exactly.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() {
            return Err(ParseRatError::Empty);
        }
        let invalid = || ParseRatError::Invalid(s.to_string());
        if let Some((num, den)) = s.split_once('/') {
            let n = BigInt::from_str(num.trim()).map_err(|_| invalid())?;
            let d = BigInt::from_str(den.trim()).map_err(|_| invalid())?;
            if d.is_zero() {
                return Err(ParseRatError::ZeroDenominator(s.to_string()));
            }
            return Ok(from_big(BigRational::new(n, d)));
        }
        if let Some((int_part, frac_part)) = s.split_once('.') {
            let neg = int_part.trim_start().starts_with('-');
            let int_part = if int_part == "-" || int_part.is_empty() {
                "0"
            } else {
                int_part
            };
            let i = BigInt::from_str(int_part).map_err(|_| invalid())?;
            if frac_part.is_empty() || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
                return Err(invalid());
            }
            let f = BigInt::from_str(frac_part).map_err(|_| invalid())?;
            let scale = BigInt::from(10u32).pow(frac_part.len() as u32);
            let frac = BigRational::new(f, scale);
            let whole = BigRational::from(i.clone());
            let value = if neg || i.is_negative() {
                whole - frac
            } else {
                whole + frac
            };
            return Ok(from_big(value));
        }
        let n = BigInt::from_str(s).map_err(|_| invalid())?;
        Ok(from_big(BigRational::from(n)))
    }
}

impl Serialize for Rat {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_frac_string())
    }
}

impl<'de> Deserialize<'de> for Rat {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct V;
        impl serde::de::Visitor<'_> for V {
            type Value = Rat;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a rational as \"p/q\", a decimal string, or an integer")
            }
            fn visit_str<E: DeError>(self, v: &str) -> Result<Rat, E> {
                v.parse().map_err(E::custom)
            }
            fn visit_i64<E: DeError>(self, v: i64) -> Result<Rat, E> {
                Ok(Rat::int(v))
            }
            fn visit_u64<E: DeError>(self, v: u64) -> Result<Rat, E> {
                i64::try_from(v)
                    .map(Rat::int)
                    .map_err(|_| E::custom("integer out of range"))
            }
        }
        deserializer.deserialize_any(V)
    }
}

/// Shorthand used all over the tests: `rat!(7, 12)` or `rat!(3)`.
#[macro_export]
macro_rules! rat {
    ($n:expr) => {
        $crate::rat::Rat::int($n)
    };
    ($n:expr, $d:expr) => {
        $crate::rat::Rat::new($n as i64, $d as i64)
    };
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_arithmetic() {
        let a = Rat::new(1, 2);
        let b = Rat::new(1, 3);
        assert_eq!(&a + &b, Rat::new(5, 6));
        assert_eq!(&a - &b, Rat::new(1, 6));
        assert_eq!(&a * &b, Rat::new(1, 6));
        assert_eq!(&a / &b, Rat::new(3, 2));
        assert_eq!(-&a, Rat::new(-1, 2));
        assert_eq!(a.recip(), Rat::int(2));
    }

    #[test]
    fn reduction_and_sign() {
        assert_eq!(Rat::new(2, 4), Rat::new(1, 2));
        assert_eq!(Rat::new(3, -6), Rat::new(-1, 2));
        assert_eq!(Rat::new(-3, -6), Rat::new(1, 2));
        assert_eq!(Rat::new(0, -5), Rat::ZERO);
    }

    #[test]
    fn ordering() {
        assert!(Rat::new(7, 12) < Rat::new(3, 5));
        assert!(Rat::new(-1, 2) < Rat::ZERO);
        assert_eq!(Rat::new(2, 3).cmp(&Rat::new(4, 6)), Ordering::Equal);
    }

    #[test]
    fn overflow_promotes_and_demotes() {
        let big = Rat::int(i64::MAX) * Rat::int(i64::MAX);
        assert!(matches!(big, Rat::Big(_)));
        let back = &big / (Rat::int(i64::MAX) * Rat::int(i64::MAX));
        assert_eq!(back, Rat::ONE);
        assert!(matches!(back, Rat::Small(..)));
        // near-overflow addition stays exact
        let x = Rat::new(i64::MAX - 1, 3);
        let y = Rat::new(1, 3);
        assert_eq!((&x + &y) * Rat::int(3), Rat::int(i64::MAX));
    }

    #[test]
    fn parsing() {
        assert_eq!("7/12".parse::<Rat>().unwrap(), Rat::new(7, 12));
        assert_eq!("-7/12".parse::<Rat>().unwrap(), Rat::new(-7, 12));
        assert_eq!("3".parse::<Rat>().unwrap(), Rat::int(3));
        assert_eq!("0.75".parse::<Rat>().unwrap(), Rat::new(3, 4));
        assert_eq!("-0.5".parse::<Rat>().unwrap(), Rat::new(-1, 2));
        assert_eq!("1.25".parse::<Rat>().unwrap(), Rat::new(5, 4));
        assert!("1/0".parse::<Rat>().is_err());
        assert!("".parse::<Rat>().is_err());
        assert!("x".parse::<Rat>().is_err());
    }

    #[test]
    fn display_roundtrip() {
        for s in ["0", "7/12", "-3/4", "5", "-5"] {
            let r: Rat = s.parse().unwrap();
            assert_eq!(r.to_frac_string(), s);
        }
    }

    #[test]
    fn serde_roundtrip() {
        let r = Rat::new(-7, 12);
        let json = serde_json::to_string(&r).unwrap();
        assert_eq!(json, "\"-7/12\"");
        let back: Rat = serde_json::from_str(&json).unwrap();
        assert_eq!(back, r);
        let from_int: Rat = serde_json::from_str("3").unwrap();
        assert_eq!(from_int, Rat::int(3));
        let from_dec: Rat = serde_json::from_str("\"0.2\"").unwrap();
        assert_eq!(from_dec, Rat::new(1, 5));
    }
}
