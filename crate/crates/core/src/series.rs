//! Truncated Laurent series over a finite field with absolute precision.
//!
//! A [`PrecSeries`] stores the coefficients from its valuation up to the last nonzero
//! known coefficient; every exponent between that and `prec` is known to be zero, and
//! exponents `>= prec` are unknown. A series with no stored coefficient is zero to
//! precision `prec`, and its valuation is reported as `prec`.
//!
//! Precision rules (x, y with valuations vx, vy and precisions px, py):
//!
//! | operation      | result precision                              |
//! |----------------|-----------------------------------------------|
//! | `x + y`        | `min(px, py)`                                 |
//! | `x * y`        | `min(px + vy, py + vx)`                       |
//! | `1 / x`        | `px - 2 vx`                                   |
//! | `x^q`          | `q px`                                        |
//! | `d/dX x`       | `px - 1`                                      |
//! | `f(g)`, vg > 0 | propagated through Horner, capped at `pf vg`  |

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fq::FiniteField;

/// Bound on relative precision; anything larger is treated as a caller error.
pub const MAX_RELATIVE_PRECISION: i64 = 1 << 22;

#[derive(Clone)]
pub struct PrecSeries {
    field: Arc<FiniteField>,
    val: i64,
    coeffs: Vec<u32>,
    prec: i64,
}

impl PartialEq for PrecSeries {
    fn eq(&self, other: &Self) -> bool {
        *self.field == *other.field
            && self.val == other.val
            && self.prec == other.prec
            && self.coeffs == other.coeffs
    }
}
impl Eq for PrecSeries {}

impl fmt::Debug for PrecSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.format("X"))
    }
}

impl PrecSeries {
    pub fn zero(field: &Arc<FiniteField>, prec: i64) -> Self {
        PrecSeries {
            field: field.clone(),
            val: prec,
            coeffs: Vec::new(),
            prec,
        }
    }

    /// `sum coeffs[i] X^(val+i) + O(X^prec)`; coefficients at or above `prec` are dropped.
    pub fn from_coeffs(field: &Arc<FiniteField>, val: i64, coeffs: Vec<u32>, prec: i64) -> Self {
        debug_assert!(coeffs.iter().all(|&c| c < field.order()));
        let mut s = PrecSeries {
            field: field.clone(),
            val,
            coeffs,
            prec,
        };
        s.normalize();
        s
    }

    pub fn monomial(field: &Arc<FiniteField>, c: u32, k: i64, prec: i64) -> Self {
        Self::from_coeffs(field, k, vec![c], prec)
    }

    pub fn one(field: &Arc<FiniteField>, prec: i64) -> Self {
        Self::monomial(field, 1, 0, prec)
    }

    /// Constant residue-field element.
    pub fn constant(field: &Arc<FiniteField>, c: u32, prec: i64) -> Self {
        Self::monomial(field, c, 0, prec)
    }

    fn normalize(&mut self) {
        if self.val < self.prec {
            let keep = (self.prec - self.val).min(self.coeffs.len() as i64).max(0) as usize;
            self.coeffs.truncate(keep);
        } else {
            self.coeffs.clear();
        }
        let lead = self.coeffs.iter().position(|&c| c != 0);
        match lead {
            None => {
                self.coeffs.clear();
                self.val = self.prec;
            }
            Some(k) => {
                if k > 0 {
                    self.coeffs.drain(..k);
                    self.val += k as i64;
                }
                while self.coeffs.last() == Some(&0) {
                    self.coeffs.pop();
                }
            }
        }
    }

    pub fn field(&self) -> &Arc<FiniteField> {
        &self.field
    }
    pub fn prec(&self) -> i64 {
        self.prec
    }
    /// Valuation, or `prec` when the series is zero to its precision.
    pub fn val(&self) -> i64 {
        self.val
    }
    pub fn valuation(&self) -> Option<i64> {
        if self.coeffs.is_empty() {
            None
        } else {
            Some(self.val)
        }
    }
    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }
    /// Number of known digits after the leading one.
    pub fn relative_prec(&self) -> i64 {
        self.prec - self.val
    }
    /// One past the last stored (possibly nonzero) exponent.
    pub fn end(&self) -> i64 {
        self.val + self.coeffs.len() as i64
    }
    pub fn leading_coeff(&self) -> Option<u32> {
        self.coeffs.first().copied()
    }
    /// Coefficient of `X^i`. Exponents at or beyond the precision read as zero.
    pub fn coeff(&self, i: i64) -> u32 {
        if i < self.val || i >= self.end() {
            0
        } else {
            self.coeffs[(i - self.val) as usize]
        }
    }
    /// `(exponent, coefficient)` for every stored nonzero term.
    pub fn terms(&self) -> impl Iterator<Item = (i64, u32)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(move |(i, &c)| (self.val + i as i64, c))
    }
    pub fn raw_coeffs(&self) -> &[u32] {
        &self.coeffs
    }

    fn check_field(&self, other: &PrecSeries) {
        assert!(
            *self.field == *other.field,
            "series over different residue fields: {:?} vs {:?}",
            self.field,
            other.field
        );
    }

    pub fn truncate(&self, prec: i64) -> Self {
        if prec >= self.prec {
            return self.clone();
        }
        Self::from_coeffs(&self.field, self.val, self.coeffs.clone(), prec)
    }

    /// Sets precision to `prec` if the series is already known to at least that precision;
    /// used to declare exactly-known data (polynomials) at a higher precision.
    pub fn with_prec_exact(&self, prec: i64) -> Self {
        let mut s = self.clone();
        if prec < s.prec {
            return s.truncate(prec);
        }
        if s.coeffs.is_empty() {
            s.val = prec;
        }
        s.prec = prec;
        s
    }

    pub fn add(&self, other: &PrecSeries) -> Self {
        self.check_field(other);
        let prec = self.prec.min(other.prec);
        if other.is_zero() {
            return self.truncate(prec);
        }
        if self.is_zero() {
            return other.truncate(prec);
        }
        let lo = self.val.min(other.val);
        let hi = self.end().max(other.end()).min(prec);
        if hi <= lo {
            return Self::zero(&self.field, prec);
        }
        let f = &self.field;
        let coeffs = (lo..hi).map(|i| f.add(self.coeff(i), other.coeff(i))).collect();
        Self::from_coeffs(f, lo, coeffs, prec)
    }

    pub fn neg(&self) -> Self {
        let f = &self.field;
        PrecSeries {
            field: f.clone(),
            val: self.val,
            coeffs: self.coeffs.iter().map(|&c| f.neg(c)).collect(),
            prec: self.prec,
        }
    }

    pub fn sub(&self, other: &PrecSeries) -> Self {
        self.add(&other.neg())
    }

    /// Multiplication by a residue-field scalar.
    pub fn scale(&self, c: u32) -> Self {
        if c == 0 {
            return Self::zero(&self.field, self.prec);
        }
        let f = &self.field;
        PrecSeries {
            field: f.clone(),
            val: self.val,
            coeffs: self.coeffs.iter().map(|&a| f.mul(a, c)).collect(),
            prec: self.prec,
        }
    }

    /// Multiplication by `X^k`.
    pub fn shift(&self, k: i64) -> Self {
        PrecSeries {
            field: self.field.clone(),
            val: self.val + k,
            coeffs: self.coeffs.clone(),
            prec: self.prec + k,
        }
    }

    pub fn mul(&self, other: &PrecSeries) -> Self {
        self.check_field(other);
        let prec = (self.prec.saturating_add(other.val)).min(other.prec.saturating_add(self.val));
        if self.is_zero() || other.is_zero() {
            return Self::zero(&self.field, prec);
        }
        let val = self.val + other.val;
        let max_len = (prec - val).max(0) as usize;
        let len = (self.coeffs.len() + other.coeffs.len() - 1).min(max_len);
        if len == 0 {
            return Self::zero(&self.field, prec);
        }
        let f = &self.field;
        let a = &self.coeffs;
        let b = &other.coeffs;
        let coeffs = if f.degree() == 1 && f.characteristic() < (1 << 15) {
            let p = f.characteristic() as u64;
            let mut acc = vec![0u64; len];
            for (i, &x) in a.iter().enumerate().take(len) {
                if x == 0 {
                    continue;
                }
                let x = x as u64;
                let jmax = b.len().min(len - i);
                for (j, &y) in b[..jmax].iter().enumerate() {
                    acc[i + j] += x * y as u64;
                }
                if i % 4096 == 4095 {
                    acc.iter_mut().for_each(|v| *v %= p);
                }
            }
            acc.into_iter().map(|v| (v % p) as u32).collect()
        } else {
            let mut acc = vec![0u32; len];
            for (i, &x) in a.iter().enumerate().take(len) {
                if x == 0 {
                    continue;
                }
                let jmax = b.len().min(len - i);
                for (j, &y) in b[..jmax].iter().enumerate() {
                    if y != 0 {
                        acc[i + j] = f.add(acc[i + j], f.mul(x, y));
                    }
                }
            }
            acc
        };
        Self::from_coeffs(f, val, coeffs, prec)
    }

    pub fn inv(&self) -> Result<Self> {
        let v = self
            .valuation()
            .ok_or_else(|| Error::precision(self.prec + 1, self.prec, "inverting a series that is zero to its precision"))?;
        let r = self.prec - v;
        if r > MAX_RELATIVE_PRECISION {
            return Err(Error::Usage(format!("relative precision {r} too large to invert")));
        }
        let f = &self.field;
        let r = r as usize;
        let u = &self.coeffs;
        let b0 = f.inv(u[0])?;
        let nb0 = f.neg(b0);
        let mut b = vec![0u32; r];
        b[0] = b0;
        for k in 1..r {
            let mut s = 0u32;
            for i in 1..=k.min(u.len() - 1) {
                s = f.add(s, f.mul(u[i], b[k - i]));
            }
            b[k] = f.mul(nb0, s);
        }
        Ok(Self::from_coeffs(f, -v, b, self.prec - 2 * v))
    }

    pub fn div(&self, other: &PrecSeries) -> Result<Self> {
        Ok(self.mul(&other.inv()?))
    }

    pub fn pow(&self, e: i64) -> Result<Self> {
        if e < 0 {
            return self.inv()?.pow(-e);
        }
        let mut result = Self::one(&self.field, i64::MAX / 4);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        Ok(result)
    }

    /// `x^q` for `q` a power of the characteristic: coefficients raised to the `q`-th
    /// power, exponents dilated by `q`.
    pub fn frobenius_q(&self, q: u64) -> Result<Self> {
        self.frobenius_q_capped(q, None)
    }

    /// As [`frobenius_q`](Self::frobenius_q), truncated at `cap` when given.
    pub fn frobenius_q_capped(&self, q: u64, cap: Option<i64>) -> Result<Self> {
        let p = self.field.characteristic() as u64;
        let mut t = q;
        while t > 1 && t % p == 0 {
            t /= p;
        }
        if t != 1 || q == 0 {
            return Err(Error::Usage(format!("{q} is not a power of the characteristic {p}")));
        }
        let qi = q as i64;
        let overflow = || Error::Usage("exponent overflow in Frobenius".into());
        let full_prec = self.prec.checked_mul(qi).ok_or_else(overflow)?;
        let prec = cap.map_or(full_prec, |c| c.min(full_prec));
        let val = self.val.checked_mul(qi).ok_or_else(overflow)?;
        if self.is_zero() || val >= prec {
            return Ok(Self::zero(&self.field, prec));
        }
        let f = &self.field;
        let len = ((self.end() - 1) * qi - val + 1).min(prec - val) as usize;
        let mut coeffs = vec![0u32; len];
        for (i, &c) in self.coeffs.iter().enumerate() {
            let pos = i * q as usize;
            if pos >= len {
                break;
            }
            coeffs[pos] = f.pow(c, qi)?;
        }
        Ok(Self::from_coeffs(f, val, coeffs, prec))
    }

    /// Formal derivative; the coefficient of `X^i` contributes `i * a_i X^(i-1)`.
    pub fn derivative(&self) -> Self {
        let f = &self.field;
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, &c)| f.mul(f.int_scalar(self.val + i as i64), c))
            .collect();
        Self::from_coeffs(f, self.val - 1, coeffs, self.prec - 1)
    }

    /// `f(g)` where `f = self`. The tail of `f` is unknown, so `g` must have positive valuation.
    pub fn compose(&self, g: &PrecSeries) -> Result<Self> {
        self.check_field(g);
        let vg = match g.valuation() {
            Some(v) if v >= 1 => v,
            Some(v) => {
                return Err(Error::Domain(format!(
                    "cannot substitute a series of valuation {v} into a truncated series"
                )))
            }
            None => {
                return Err(Error::precision(
                    1,
                    g.prec,
                    "substituted series is zero to its precision",
                ))
            }
        };
        let cap = self.prec.saturating_mul(vg);
        let f = &self.field;
        if self.is_zero() {
            return Ok(Self::zero(f, cap));
        }
        // Horner on the shifted series f0 = X^(-val) f.
        let mut acc = Self::zero(f, i64::MAX / 4);
        for i in (0..self.coeffs.len()).rev() {
            acc = acc.mul(g).add(&Self::constant(f, self.coeffs[i], i64::MAX / 4));
            acc = acc.truncate(cap);
        }
        let tail_prec = (self.prec - self.val).saturating_mul(vg);
        acc = acc.truncate(tail_prec);
        let shifted = if self.val == 0 {
            acc
        } else {
            acc.mul(&g.pow(self.val)?)
        };
        Ok(shifted.truncate(cap))
    }

    /// Equality to the shared precision.
    pub fn eq_to_prec(&self, other: &PrecSeries) -> bool {
        self.sub(other).is_zero()
    }

    pub fn format(&self, var: &str) -> String {
        let f = &self.field;
        let mut parts = Vec::new();
        for (i, c) in self.terms() {
            let mono = match i {
                0 => String::new(),
                1 => var.to_string(),
                _ => format!("{var}^{i}"),
            };
            let cs = f.format(c);
            parts.push(if i == 0 {
                cs
            } else if c == 1 {
                mono
            } else {
                format!("{cs}*{mono}")
            });
        }
        if self.prec < i64::MAX / 8 {
            parts.push(format!("O({var}^{})", self.prec));
        }
        if parts.is_empty() {
            "0".into()
        } else {
            parts.join(" + ")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(p: u32) -> Arc<FiniteField> {
        FiniteField::new(p, 1).unwrap()
    }

    fn poly(fld: &Arc<FiniteField>, c: &[u32], prec: i64) -> PrecSeries {
        PrecSeries::from_coeffs(fld, 0, c.to_vec(), prec)
    }

    #[test]
    fn difference_of_squares() {
        let k = f(5);
        let a = poly(&k, &[1, 1], 10);
        let b = poly(&k, &[1, 4], 10);
        assert_eq!(a.mul(&b), poly(&k, &[1, 0, 4], 10));
    }

    #[test]
    fn geometric_inverse_over_f3() {
        let k = f(3);
        let x = poly(&k, &[1, 1], 4);
        assert_eq!(x.inv().unwrap(), poly(&k, &[1, 2, 1, 2], 4));
    }

    #[test]
    fn uniformizer_times_inverse() {
        let k = f(3);
        let t = PrecSeries::monomial(&k, 1, 1, 10);
        let ti = t.inv().unwrap();
        assert_eq!(ti.val(), -1);
        assert_eq!(ti.prec(), 8);
        assert!(t.mul(&ti).eq_to_prec(&PrecSeries::one(&k, 10)));
    }

    #[test]
    fn precision_rules() {
        let k = f(3);
        let x = PrecSeries::from_coeffs(&k, 2, vec![1, 1], 6);
        let y = PrecSeries::from_coeffs(&k, -1, vec![2, 0, 1], 3);
        assert_eq!(x.add(&y).prec(), 3);
        assert_eq!(x.mul(&y).prec(), (6 - 1).min(3 + 2));
        assert_eq!(x.inv().unwrap().prec(), 6 - 4);
        assert_eq!(x.frobenius_q(3).unwrap().prec(), 18);
        assert_eq!(x.derivative().prec(), 5);
    }

    #[test]
    fn frobenius_examples() {
        let k2 = f(2);
        let x = poly(&k2, &[0, 1, 1], 10);
        assert_eq!(x.frobenius_q(2).unwrap(), poly(&k2, &[0, 0, 1, 0, 1], 20));
        let k3 = f(3);
        let at = PrecSeries::monomial(&k3, 2, 1, 5);
        assert_eq!(at.frobenius_q(3).unwrap(), PrecSeries::monomial(&k3, 2, 3, 15));
        let k4 = FiniteField::new(2, 2).unwrap();
        let w = k4.generator();
        let wt = PrecSeries::monomial(&k4, w, 1, 5);
        assert_eq!(wt.frobenius_q(4).unwrap(), PrecSeries::monomial(&k4, w, 4, 20));
        assert!(wt.frobenius_q(3).is_err());
    }

    #[test]
    fn compose_examples() {
        let k = f(5);
        let sq = PrecSeries::monomial(&k, 1, 2, 10);
        let g = poly(&k, &[0, 1, 1], 10);
        assert!(sq.compose(&g).unwrap().eq_to_prec(&poly(&k, &[0, 0, 1, 2, 1], 10)));
        let id = PrecSeries::monomial(&k, 1, 1, 10);
        assert!(id.compose(&g).unwrap().eq_to_prec(&g));
        // 1/(1-X) at X = t to precision 3
        let geo = poly(&k, &[1, 4], 3).inv().unwrap();
        let t = PrecSeries::monomial(&k, 1, 1, 3);
        assert_eq!(geo.compose(&t).unwrap(), poly(&k, &[1, 1, 1], 3));
        let unit = poly(&k, &[1, 1], 3);
        assert!(matches!(geo.compose(&unit), Err(Error::Domain(_))));
    }

    #[test]
    fn derivative_examples() {
        let k3 = f(3);
        let x = poly(&k3, &[1, 0, 0, 1], 10);
        assert!(x.derivative().is_zero());
        let k2 = f(2);
        let c = PrecSeries::monomial(&k2, 1, 3, 10);
        assert_eq!(c.derivative(), PrecSeries::monomial(&k2, 1, 2, 9));
    }

    #[test]
    fn zero_to_precision_is_reported() {
        let k = f(3);
        let z = PrecSeries::zero(&k, 4);
        assert!(z.is_zero());
        assert_eq!(z.val(), 4);
        assert!(matches!(z.inv(), Err(Error::InsufficientPrecision { .. })));
    }
}
