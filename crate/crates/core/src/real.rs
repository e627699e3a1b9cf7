//! Exact-until-forced scalars and extended exponents.
//!
//! [`Real`] carries an exact rational for as long as every operation keeps the
//! value rational. The first fractional power (or an operation mixing in an
//! already approximate operand) demotes it to `f64`. Comparisons between two
//! exact values are exact; anything else is compared in floating point.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num::bigint::BigInt;
use num::rational::Ratio;
use num::traits::{One, Signed, ToPrimitive, Zero};
use num::BigRational;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Rational with 64-bit parts, used for user-facing exponents (p, r, s, q, θ).
pub type Rat64 = Ratio<i64>;

/// Default relative tolerance for comparisons that involve irrational values.
pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub enum Real {
    Exact(BigRational),
    Approx(f64),
}

impl Real {
    pub fn zero() -> Self {
        Real::Exact(BigRational::zero())
    }

    pub fn one() -> Self {
        Real::Exact(BigRational::one())
    }

    pub fn int(n: i64) -> Self {
        Real::Exact(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn frac(num: i128, den: i128) -> Self {
        Real::Exact(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn from_rat64(r: Rat64) -> Self {
        Real::frac(*r.numer() as i128, *r.denom() as i128)
    }

    pub fn approx(x: f64) -> Self {
        Real::Approx(x)
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Real::Exact(_))
    }

    pub fn as_exact(&self) -> Option<&BigRational> {
        match self {
            Real::Exact(r) => Some(r),
            Real::Approx(_) => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Real::Exact(r) => big_to_f64(r),
            Real::Approx(x) => *x,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Real::Exact(r) => r.is_zero(),
            Real::Approx(x) => *x == 0.0,
        }
    }

    pub fn is_positive(&self) -> bool {
        match self {
            Real::Exact(r) => r.is_positive(),
            Real::Approx(x) => *x > 0.0,
        }
    }

    pub fn recip(&self) -> Real {
        match self {
            Real::Exact(r) if !r.is_zero() => Real::Exact(r.recip()),
            Real::Exact(_) => Real::Approx(f64::INFINITY),
            Real::Approx(x) => Real::Approx(1.0 / x),
        }
    }

    /// Raises to a rational power. The result stays exact for integer
    /// exponents and whenever the base is a perfect power of the denominator.
    pub fn pow(&self, e: Rat64) -> Real {
        if let (Real::Exact(r), false) = (self, e.is_integer()) {
            if let Some(root) = exact_root(r, *e.denom()) {
                return Real::Exact(root).pow(Rat64::from_integer(*e.numer()));
            }
        }
        if e.is_integer() {
            let n = *e.numer();
            match self {
                Real::Exact(r) => {
                    if n < 0 && r.is_zero() {
                        return Real::Approx(f64::INFINITY);
                    }
                    let mut acc = BigRational::one();
                    for _ in 0..n.unsigned_abs() {
                        acc *= r;
                    }
                    Real::Exact(if n < 0 { acc.recip() } else { acc })
                }
                Real::Approx(x) => Real::Approx(x.powi(n as i32)),
            }
        } else {
            Real::Approx(self.to_f64().powf(rat_to_f64(e)))
        }
    }

    pub fn powf(&self, e: f64) -> Real {
        Real::Approx(self.to_f64().powf(e))
    }

    pub fn ln(&self) -> f64 {
        self.to_f64().ln()
    }

    pub fn max(self, other: Real) -> Real {
        if other > self {
            other
        } else {
            self
        }
    }

    pub fn min(self, other: Real) -> Real {
        if other < self {
            other
        } else {
            self
        }
    }

    /// `self ≤ rhs·(1+tol)`; exact when both sides are exact.
    pub fn le_tol(&self, rhs: &Real, tol: f64) -> bool {
        match (self, rhs) {
            (Real::Exact(a), Real::Exact(b)) => a <= b,
            _ => {
                let (a, b) = (self.to_f64(), rhs.to_f64());
                a <= b + tol * b.abs() || a <= b
            }
        }
    }

    /// Equality up to relative tolerance; exact when both sides are exact.
    pub fn eq_tol(&self, rhs: &Real, tol: f64) -> bool {
        match (self, rhs) {
            (Real::Exact(a), Real::Exact(b)) => a == b,
            _ => {
                let (a, b) = (self.to_f64(), rhs.to_f64());
                (a - b).abs() <= tol * a.abs().max(b.abs()) || a == b
            }
        }
    }
}

fn exact_root(r: &BigRational, d: i64) -> Option<BigRational> {
    if r.is_negative() || d <= 0 || d > 64 {
        return None;
    }
    let d = d as u32;
    let root = |x: &num::BigInt| {
        let y = x.nth_root(d);
        (num::pow(y.clone(), d as usize) == *x).then_some(y)
    };
    Some(BigRational::new(root(r.numer())?, root(r.denom())?))
}

pub(crate) fn big_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| if r.is_negative() { f64::NEG_INFINITY } else { f64::INFINITY })
}

pub fn rat_to_f64(r: Rat64) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Exact rational value of a finite double.
pub fn f64_to_big(x: f64) -> Option<BigRational> {
    BigRational::from_float(x)
}

pub fn format_big(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn parse_big(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Malformed(format!("not a rational: {s:?}"));
    if let Some((n, d)) = s.split_once('/') {
        let n = BigInt::from_str(n.trim()).map_err(|_| bad())?;
        let d = BigInt::from_str(d.trim()).map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        Ok(BigRational::new(n, d))
    } else if let Some((ip, fp)) = s.split_once('.') {
        let digits = fp.len() as u32;
        let neg = ip.starts_with('-');
        let ip = if ip.is_empty() || ip == "-" { "0" } else { ip };
        let whole = BigInt::from_str(ip).map_err(|_| bad())?;
        let frac = BigInt::from_str(fp).map_err(|_| bad())?;
        let den = BigInt::from(10u32).pow(digits);
        let frac = if neg { -frac } else { frac };
        Ok(BigRational::new(whole * &den + frac, den))
    } else {
        Ok(BigRational::from_integer(BigInt::from_str(s).map_err(|_| bad())?))
    }
}

impl PartialEq for Real {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Real::Exact(a), Real::Exact(b)) => a == b,
            _ => self.to_f64() == other.to_f64(),
        }
    }
}

impl PartialOrd for Real {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (Real::Exact(a), Real::Exact(b)) => Some(a.cmp(b)),
            _ => self.to_f64().partial_cmp(&other.to_f64()),
        }
    }
}

macro_rules! real_binop {
    ($tr:ident, $method:ident, $op:tt) => {
        impl<'a> $tr<&'a Real> for &'a Real {
            type Output = Real;
            fn $method(self, rhs: &'a Real) -> Real {
                match (self, rhs) {
                    (Real::Exact(a), Real::Exact(b)) => real_exact_op!($method, a, b, $op),
                    _ => Real::Approx(self.to_f64() $op rhs.to_f64()),
                }
            }
        }
        impl $tr<Real> for Real {
            type Output = Real;
            fn $method(self, rhs: Real) -> Real {
                (&self).$method(&rhs)
            }
        }
        impl<'a> $tr<&'a Real> for Real {
            type Output = Real;
            fn $method(self, rhs: &'a Real) -> Real {
                (&self).$method(rhs)
            }
        }
        impl<'a> $tr<Real> for &'a Real {
            type Output = Real;
            fn $method(self, rhs: Real) -> Real {
                self.$method(&rhs)
            }
        }
    };
}

macro_rules! real_exact_op {
    (div, $a:expr, $b:expr, $op:tt) => {
        if $b.is_zero() {
            Real::Approx(big_to_f64($a) / 0.0)
        } else {
            Real::Exact($a / $b)
        }
    };
    ($m:ident, $a:expr, $b:expr, $op:tt) => {
        Real::Exact($a $op $b)
    };
}

real_binop!(Add, add, +);
real_binop!(Sub, sub, -);
real_binop!(Mul, mul, *);
real_binop!(Div, div, /);

impl Neg for Real {
    type Output = Real;
    fn neg(self) -> Real {
        match self {
            Real::Exact(a) => Real::Exact(-a),
            Real::Approx(x) => Real::Approx(-x),
        }
    }
}

impl std::iter::Sum for Real {
    fn sum<I: Iterator<Item = Real>>(iter: I) -> Real {
        iter.fold(Real::zero(), |a, b| a + b)
    }
}

impl<'a> std::iter::Sum<&'a Real> for Real {
    fn sum<I: Iterator<Item = &'a Real>>(iter: I) -> Real {
        iter.fold(Real::zero(), |a, b| a + b)
    }
}

impl From<i64> for Real {
    fn from(n: i64) -> Self {
        Real::int(n)
    }
}

impl From<BigRational> for Real {
    fn from(r: BigRational) -> Self {
        Real::Exact(r)
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Real::Exact(r) if r.is_integer() => write!(f, "{}", r.numer()),
            Real::Exact(r) => write!(f, "{}", format_big(r)),
            Real::Approx(x) => write!(f, "{x}"),
        }
    }
}

impl Serialize for Real {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Real::Exact(r) => s.serialize_str(&format_big(r)),
            Real::Approx(x) => s.serialize_f64(*x),
        }
    }
}

/// An exponent in `(0, ∞]`, finite values kept as exact rationals.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Exponent {
    Finite(Rat64),
    Infinite,
}

impl Exponent {
    pub fn int(n: i64) -> Self {
        Exponent::Finite(Rat64::from_integer(n))
    }

    pub fn ratio(n: i64, d: i64) -> Self {
        Exponent::Finite(Rat64::new(n, d))
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Exponent::Infinite)
    }

    pub fn finite(&self) -> Option<Rat64> {
        match self {
            Exponent::Finite(r) => Some(*r),
            Exponent::Infinite => None,
        }
    }

    /// `1/p`, with `1/∞ = 0`.
    pub fn recip(&self) -> Rat64 {
        match self {
            Exponent::Finite(r) => r.recip(),
            Exponent::Infinite => Rat64::zero(),
        }
    }

    /// Inverse of [`Exponent::recip`]: `1/x`, with `1/0 = ∞`.
    pub fn from_recip(x: Rat64) -> Result<Self> {
        if x.is_zero() {
            Ok(Exponent::Infinite)
        } else if x.is_positive() {
            Ok(Exponent::Finite(x.recip()))
        } else {
            Err(Error::Parameter(format!("exponent reciprocal {x} is negative")))
        }
    }

    /// Hölder conjugate; defined for `p ≥ 1`.
    pub fn conjugate(&self) -> Result<Self> {
        let inv = self.recip();
        if inv > Rat64::one() {
            return Err(Error::Parameter(format!("conjugate of {self} < 1 is undefined")));
        }
        Exponent::from_recip(Rat64::one() - inv)
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Exponent::Finite(r) => rat_to_f64(*r),
            Exponent::Infinite => f64::INFINITY,
        }
    }

    pub fn is_positive(&self) -> bool {
        match self {
            Exponent::Finite(r) => r.is_positive(),
            Exponent::Infinite => true,
        }
    }
}

impl PartialOrd for Exponent {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        // 1/p is order-reversing on (0, ∞].
        Some(other.recip().cmp(&self.recip()))
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(r) if r.is_integer() => write!(f, "{}", r.numer()),
            Exponent::Finite(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            Exponent::Infinite => write!(f, "inf"),
        }
    }
}

impl FromStr for Exponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if matches!(t, "inf" | "infinity" | "∞" | "Inf") {
            return Ok(Exponent::Infinite);
        }
        let r = parse_rat64(t)?;
        if !r.is_positive() {
            return Err(Error::Parameter(format!("exponent must be positive, got {t}")));
        }
        Ok(Exponent::Finite(r))
    }
}

pub fn parse_rat64(s: &str) -> Result<Rat64> {
    let big = parse_big(s)?;
    match (big.numer().to_i64(), big.denom().to_i64()) {
        (Some(n), Some(d)) => Ok(Rat64::new(n, d)),
        _ => Err(Error::Malformed(format!("rational out of range: {s}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_arithmetic_stays_exact() {
        let a = Real::frac(1, 3);
        let b = Real::frac(1, 6);
        let c = &a + &b;
        assert_eq!(c, Real::frac(1, 2));
        assert!(c.is_exact());
        assert!(a.pow(Rat64::from_integer(3)).is_exact());
        assert!(!a.pow(Rat64::new(1, 2)).is_exact());
    }

    #[test]
    fn approx_demotes() {
        let c = Real::frac(1, 2) * Real::approx(2.0);
        assert!(!c.is_exact());
        assert_eq!(c.to_f64(), 1.0);
    }

    #[test]
    fn exponent_conjugates() {
        assert_eq!(Exponent::int(1).conjugate().unwrap(), Exponent::Infinite);
        assert_eq!(Exponent::Infinite.conjugate().unwrap(), Exponent::int(1));
        assert_eq!(Exponent::int(2).conjugate().unwrap(), Exponent::int(2));
        assert_eq!(Exponent::ratio(4, 3).conjugate().unwrap(), Exponent::int(4));
        assert!(Exponent::ratio(1, 2).conjugate().is_err());
        assert!(Exponent::int(2) < Exponent::Infinite);
    }

    #[test]
    fn parses_decimals_and_fractions() {
        assert_eq!(parse_rat64("0.9").unwrap(), Rat64::new(9, 10));
        assert_eq!(parse_rat64("4/3").unwrap(), Rat64::new(4, 3));
        assert_eq!(parse_rat64("-0.25").unwrap(), Rat64::new(-1, 4));
        assert_eq!("inf".parse::<Exponent>().unwrap(), Exponent::Infinite);
        assert!("0".parse::<Exponent>().is_err());
    }

    #[test]
    fn tolerance_comparisons() {
        assert!(Real::approx(1.0 + 1e-12).le_tol(&Real::one(), 1e-9));
        assert!(!Real::frac(1000000001, 1000000000).le_tol(&Real::one(), 1e-9));
    }
}
