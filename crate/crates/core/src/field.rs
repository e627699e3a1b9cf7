//! Scalar types the sweep engines run on: scaled integers, big rationals, or
//! doubles. Engines only add, subtract, multiply and compare, so one generic
//! implementation serves the exact and the approximate paths.

use std::ops::{Add, Mul, Sub};

use num::traits::Zero;
use num::{BigInt, BigRational};

use crate::real::Real;

pub(crate) trait Field: Clone + PartialOrd + Send + Sync + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> {
    fn zero() -> Self;
    fn from_usize(n: usize) -> Self;
    fn to_real(&self) -> Real;
}

impl Field for i128 {
    fn zero() -> Self {
        0
    }
    fn from_usize(n: usize) -> Self {
        n as i128
    }
    fn to_real(&self) -> Real {
        Real::frac(*self, 1)
    }
}

impl Field for f64 {
    fn zero() -> Self {
        0.0
    }
    fn from_usize(n: usize) -> Self {
        n as f64
    }
    fn to_real(&self) -> Real {
        Real::Approx(*self)
    }
}

impl Field for BigRational {
    fn zero() -> Self {
        <BigRational as Zero>::zero()
    }
    fn from_usize(n: usize) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }
    fn to_real(&self) -> Real {
        Real::Exact(self.clone())
    }
}

pub(crate) fn prefix_sums<T: Field>(values: &[T]) -> Vec<T> {
    let mut out = Vec::with_capacity(values.len() + 1);
    let mut acc = T::zero();
    out.push(acc.clone());
    for v in values {
        acc = acc + v.clone();
        out.push(acc.clone());
    }
    out
}
