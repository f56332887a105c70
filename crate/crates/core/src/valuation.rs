//! Exact rational valuations, normalized so that `mu(t) = 1`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RationalValuation(Ratio<i64>);

impl RationalValuation {
    pub fn new(numer: i64, denom: i64) -> Self {
        RationalValuation(Ratio::new(numer, denom))
    }
    pub fn integer(n: i64) -> Self {
        RationalValuation(Ratio::from_integer(n))
    }
    pub fn zero() -> Self {
        Self::integer(0)
    }
    pub fn numer(&self) -> i64 {
        *self.0.numer()
    }
    pub fn denom(&self) -> i64 {
        *self.0.denom()
    }
    /// Smallest integer `k` with `k / e >= self`.
    pub fn ceil_scaled(&self, e: i64) -> i64 {
        (self.0 * Ratio::from_integer(e)).ceil().to_integer()
    }
    /// Largest integer `k` with `k / e <= self`.
    pub fn floor_scaled(&self, e: i64) -> i64 {
        (self.0 * Ratio::from_integer(e)).floor().to_integer()
    }
    pub fn max(self, other: Self) -> Self {
        if self >= other {
            self
        } else {
            other
        }
    }
}

impl Add for RationalValuation {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        RationalValuation(self.0 + o.0)
    }
}
impl Sub for RationalValuation {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        RationalValuation(self.0 - o.0)
    }
}
impl Neg for RationalValuation {
    type Output = Self;
    fn neg(self) -> Self {
        RationalValuation(-self.0)
    }
}
impl Mul<i64> for RationalValuation {
    type Output = Self;
    fn mul(self, k: i64) -> Self {
        RationalValuation(self.0 * k)
    }
}

impl fmt::Display for RationalValuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.denom() == 1 {
            write!(f, "{}", self.numer())
        } else {
            write!(f, "{}/{}", self.numer(), self.denom())
        }
    }
}
impl fmt::Debug for RationalValuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for RationalValuation {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for RationalValuation {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        let parse = |x: &str| x.trim().parse::<i64>().map_err(serde::de::Error::custom);
        match s.split_once('/') {
            Some((n, m)) => Ok(RationalValuation::new(parse(n)?, parse(m)?)),
            None => Ok(RationalValuation::integer(parse(&s)?)),
        }
    }
}
