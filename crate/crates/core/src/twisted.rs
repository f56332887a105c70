//! The skew ring `O_H{{tau}}` with `tau * a = a^q * tau`.

use std::fmt;

use crate::error::{Error, Result};
use crate::tower::{FieldElement, TowerField};
use crate::valuation::RationalValuation;

/// A priori lower bound on `mu(a_i)` for coefficients beyond the known ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoeffBound {
    /// `mu(a_i) >= 0`.
    Integral,
    /// `mu(a_i) >= -i`.
    LogType,
}

impl CoeffBound {
    fn at(self, i: usize) -> RationalValuation {
        match self {
            CoeffBound::Integral => RationalValuation::zero(),
            CoeffBound::LogType => RationalValuation::integer(-(i as i64)),
        }
    }
}

/// `sum a_i tau^i` over a tower field. Either an exact polynomial or known up to
/// `tau^D` inclusive.
#[derive(Clone)]
pub struct TwistedSeries {
    field: TowerField,
    coeffs: Vec<FieldElement>,
    known: Option<usize>,
}

impl fmt::Debug for TwistedSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| format!("({})*tau^{i}", c.format("pi")))
            .collect();
        let body = if terms.is_empty() { "0".to_string() } else { terms.join(" + ") };
        match self.known {
            None => write!(f, "{body}"),
            Some(d) => write!(f, "{body} + O(tau^{})", d + 1),
        }
    }
}

fn is_exact_zero(x: &FieldElement) -> bool {
    x.is_zero() && x.prec() >= x.field().prec()
}

impl TwistedSeries {
    /// An exact polynomial in `tau`.
    pub fn polynomial(field: &TowerField, coeffs: Vec<FieldElement>) -> Result<Self> {
        Self::build(field, coeffs, None)
    }

    /// A series known up to `tau^degree`; missing coefficients are zero.
    pub fn truncated(field: &TowerField, mut coeffs: Vec<FieldElement>, degree: usize) -> Result<Self> {
        coeffs.truncate(degree + 1);
        while coeffs.len() < degree + 1 {
            coeffs.push(FieldElement::zero(field));
        }
        Self::build(field, coeffs, Some(degree))
    }

    fn build(field: &TowerField, mut coeffs: Vec<FieldElement>, known: Option<usize>) -> Result<Self> {
        if coeffs.iter().any(|c| c.field() != field) {
            return Err(Error::Usage("twisted series coefficients from another field".into()));
        }
        if known.is_none() {
            while coeffs.last().is_some_and(is_exact_zero) {
                coeffs.pop();
            }
        }
        Ok(TwistedSeries {
            field: field.clone(),
            coeffs,
            known,
        })
    }

    pub fn zero(field: &TowerField) -> Self {
        TwistedSeries {
            field: field.clone(),
            coeffs: Vec::new(),
            known: None,
        }
    }
    pub fn one(field: &TowerField) -> Self {
        Self::constant(&FieldElement::one(field))
    }
    pub fn constant(a: &FieldElement) -> Self {
        Self::build(a.field(), vec![a.clone()], None).unwrap()
    }
    /// `tau^k`.
    pub fn tau_power(field: &TowerField, k: usize) -> Self {
        let mut coeffs = vec![FieldElement::zero(field); k];
        coeffs.push(FieldElement::one(field));
        Self::build(field, coeffs, None).unwrap()
    }

    pub fn field(&self) -> &TowerField {
        &self.field
    }
    pub fn is_exact(&self) -> bool {
        self.known.is_none()
    }
    /// Largest index of a stored coefficient, or the truncation degree.
    pub fn degree_bound(&self) -> usize {
        self.known.unwrap_or(self.coeffs.len().saturating_sub(1))
    }
    /// Known degree: `None` for exact polynomials.
    pub fn known_degree(&self) -> Option<usize> {
        self.known
    }
    pub fn coeffs(&self) -> &[FieldElement] {
        &self.coeffs
    }
    /// The coefficient of `tau^i`, or `None` if beyond the known range.
    pub fn coeff(&self, i: usize) -> Option<FieldElement> {
        match self.coeffs.get(i) {
            Some(c) => Some(c.clone()),
            None if self.known.is_none() => Some(FieldElement::zero(&self.field)),
            None => None,
        }
    }

    /// Index of the lowest coefficient not known to vanish exactly.
    fn tau_valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !is_exact_zero(c))
    }

    /// Drops everything above `tau^degree`.
    pub fn truncate(&self, degree: usize) -> Self {
        if self.known.is_none() && self.coeffs.len() <= degree + 1 {
            return self.clone();
        }
        let d = self.known.map_or(degree, |k| k.min(degree));
        Self::truncated(&self.field, self.coeffs.clone(), d).unwrap()
    }

    fn combine_known(&self, other: &TwistedSeries) -> Option<usize> {
        match (self.known, other.known) {
            (None, None) => None,
            (Some(a), None) => Some(a),
            (None, Some(b)) => Some(b),
            (Some(a), Some(b)) => Some(a.min(b)),
        }
    }

    pub fn add(&self, other: &TwistedSeries) -> Result<Self> {
        self.check(other)?;
        let known = self.combine_known(other);
        let len = self.coeffs.len().max(other.coeffs.len());
        let len = known.map_or(len, |d| d + 1);
        let coeffs = (0..len)
            .map(|i| {
                let a = self.coeff(i).unwrap_or_else(|| FieldElement::zero(&self.field));
                let b = other.coeff(i).unwrap_or_else(|| FieldElement::zero(&self.field));
                &a + &b
            })
            .collect();
        Self::build(&self.field, coeffs, known)
    }

    pub fn neg(&self) -> Self {
        TwistedSeries {
            field: self.field.clone(),
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
            known: self.known,
        }
    }

    pub fn sub(&self, other: &TwistedSeries) -> Result<Self> {
        self.add(&other.neg())
    }

    /// Left multiplication by a field element: `a * f`.
    pub fn scale_left(&self, a: &FieldElement) -> Self {
        TwistedSeries {
            field: self.field.clone(),
            coeffs: self.coeffs.iter().map(|c| a * c).collect(),
            known: self.known,
        }
    }

    fn check(&self, other: &TwistedSeries) -> Result<()> {
        if self.field != other.field {
            return Err(Error::Usage("twisted series over different fields".into()));
        }
        Ok(())
    }

    /// The skew product `self * other`: coefficient of `tau^k` is
    /// `sum_{i+j=k} a_i b_j^(q^i)`.
    pub fn mul(&self, other: &TwistedSeries) -> Result<Self> {
        self.check(other)?;
        let (Some(va), Some(vb)) = (self.tau_valuation(), other.tau_valuation()) else {
            let known = match (self.known, other.known) {
                (None, None) => None,
                _ => Some(self.degree_bound().max(other.degree_bound())),
            };
            return Self::build(&self.field, Vec::new(), known);
        };
        let known = match (self.known, other.known) {
            (None, None) => None,
            (Some(a), None) => Some(a + vb),
            (None, Some(b)) => Some(b + va),
            (Some(a), Some(b)) => Some((a + vb).min(b + va)),
        };
        let full = self.coeffs.len() + other.coeffs.len() - 1;
        let len = known.map_or(full, |d| (d + 1).min(full.max(d + 1)));
        let mut out = vec![FieldElement::zero(&self.field); len];
        // b_j^(q^i), computed by repeated Frobenius
        let mut twisted: Vec<FieldElement> = other.coeffs.clone();
        for (i, a) in self.coeffs.iter().enumerate() {
            if i >= len {
                break;
            }
            if i > 0 {
                for b in twisted.iter_mut() {
                    *b = b.frobenius_q_pow(1)?;
                }
            }
            if is_exact_zero(a) {
                continue;
            }
            for (j, b) in twisted.iter().enumerate() {
                if i + j >= len {
                    break;
                }
                if !is_exact_zero(b) {
                    out[i + j] = &out[i + j] + &(a * b);
                }
            }
        }
        Self::build(&self.field, out, known)
    }

    /// The image over the extension `target` (coefficientwise embedding).
    pub fn embed(&self, target: &TowerField) -> Result<Self> {
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| c.embed(target))
            .collect::<Result<Vec<_>>>()?;
        Self::build(target, coeffs, self.known)
    }

    /// `sum a_i x^(q^i)`, with coefficients embedded into the field of `x`. For truncated
    /// series the unknown tail is bounded by `bound`; the result precision reflects it.
    pub fn evaluate(&self, x: &FieldElement, bound: CoeffBound) -> Result<FieldElement> {
        let target = x.field();
        let coeffs = if *target == self.field {
            self.clone()
        } else {
            self.embed(target)?
        };
        coeffs.evaluate_same_field(x, bound)
    }

    fn evaluate_same_field(&self, x: &FieldElement, bound: CoeffBound) -> Result<FieldElement> {
        let field = x.field();
        let e = field.e() as i64;
        let q = field.base_q() as i64;
        let prec = field.prec();
        if x.is_zero() && x.prec() >= prec {
            return Ok(FieldElement::zero(field));
        }
        let vx = x.valuation_lower_bound();
        if self.known.is_some() {
            let ok = match bound {
                CoeffBound::Integral => vx > RationalValuation::zero(),
                CoeffBound::LogType => vx > RationalValuation::new(1, q - 1),
            };
            if !ok {
                return Err(Error::Domain(format!(
                    "series does not converge at an element of valuation {vx}"
                )));
            }
        }
        let mut acc = FieldElement::zero(field);
        let mut xp = x.clone();
        for (i, a) in self.coeffs.iter().enumerate() {
            if i > 0 {
                xp = xp.frobenius_q_pow(1)?;
            }
            if !is_exact_zero(a) {
                acc = &acc + &(a * &xp);
            }
            if self.known.is_some() {
                // remaining known terms already below precision
                let rest = bound.at(i + 1) + vx * q.pow((i + 1).min(40) as u32);
                if rest.ceil_scaled(e) >= prec && i + 1 < self.coeffs.len() {
                    let tail_ok = self.coeffs[i + 1..]
                        .iter()
                        .all(|c| c.valuation_lower_bound() >= bound.at(i + 1));
                    if tail_ok {
                        return Ok(acc);
                    }
                }
            }
        }
        if let Some(d) = self.known {
            let exp = (d + 1).min(40) as u32;
            let tail = bound.at(d + 1) + vx * q.saturating_pow(exp);
            let tail_prec = tail.ceil_scaled(e);
            if tail_prec < prec {
                return Ok(acc.truncate(tail_prec));
            }
        }
        Ok(acc)
    }

    /// Two-sided inverse to `tau^degree`; requires a unit constant coefficient.
    pub fn invert(&self, degree: usize) -> Result<Self> {
        let a0 = self.coeff(0).unwrap_or_else(|| FieldElement::zero(&self.field));
        if !a0.is_unit() {
            return Err(Error::Domain("constant coefficient is not a unit".into()));
        }
        let a0_inv = a0.inv()?;
        let degree = self.known.map_or(degree, |d| d.min(degree));
        let mut g: Vec<FieldElement> = vec![a0_inv.clone()];
        for k in 1..=degree {
            // a_0 g_k = - sum_{i>=1} a_i g_{k-i}^(q^i)
            let mut s = FieldElement::zero(&self.field);
            for i in 1..=k {
                let Some(ai) = self.coeffs.get(i) else { break };
                if is_exact_zero(ai) {
                    continue;
                }
                s = &s + &(ai * &g[k - i].frobenius_q_pow(i as u32)?);
            }
            g.push(-&(&a0_inv * &s));
        }
        Self::truncated(&self.field, g, degree)
    }

    /// Solves `r * g = self` for `r` up to `tau^degree`.
    ///
    /// When both sides are exact polynomials and `g` has a unit leading coefficient the
    /// quotient is found from the top down and the remainder is checked to vanish;
    /// otherwise it is solved from the lowest degree up.
    pub fn left_divide(&self, g: &TwistedSeries, degree: usize) -> Result<Self> {
        self.check(g)?;
        if self.is_exact() && g.is_exact() {
            if let Some(lead) = g.coeffs.last().filter(|c| c.is_unit()) {
                return self.left_divide_top_down(g, lead);
            }
        }
        self.left_divide_bottom_up(g, degree)
    }

    fn left_divide_top_down(&self, g: &TwistedSeries, lead: &FieldElement) -> Result<Self> {
        let gd = g.coeffs.len() - 1;
        let pd = self.coeffs.len();
        if pd == 0 {
            return Ok(Self::zero(&self.field));
        }
        if pd - 1 < gd {
            return Err(Error::Domain("dividend has lower tau-degree than the divisor".into()));
        }
        let rd = pd - 1 - gd;
        let mut rem = self.coeffs.clone();
        let mut r = vec![FieldElement::zero(&self.field); rd + 1];
        for k in (0..=rd).rev() {
            let lk = lead.frobenius_q_pow(k as u32)?;
            let rk = rem[k + gd].div(&lk)?;
            for (j, gj) in g.coeffs.iter().enumerate() {
                if !is_exact_zero(gj) {
                    let term = &rk * &gj.frobenius_q_pow(k as u32)?;
                    rem[k + j] = &rem[k + j] - &term;
                }
            }
            r[k] = rk;
        }
        if let Some((i, c)) = rem.iter().enumerate().find(|(_, c)| !c.is_zero()) {
            return Err(Error::Domain(format!(
                "not a left multiple: remainder at tau^{i} is {}",
                c.format("pi")
            )));
        }
        Self::build(&self.field, r, None)
    }

    fn left_divide_bottom_up(&self, g: &TwistedSeries, degree: usize) -> Result<Self> {
        let g0 = g
            .coeff(0)
            .filter(|c| !c.is_zero())
            .ok_or_else(|| Error::Domain("divisor has no constant term".into()))?;
        let mut r: Vec<FieldElement> = Vec::with_capacity(degree + 1);
        for k in 0..=degree {
            // r_k g_0^(q^k) = P_k - sum_{i<k} r_i g_{k-i}^(q^i)
            let mut s = self.coeff(k).ok_or_else(|| {
                Error::precision(k as i64, self.degree_bound() as i64, "dividend tau-degree")
            })?;
            for (i, ri) in r.iter().enumerate() {
                let Some(gj) = g.coeff(k - i) else {
                    return Err(Error::precision(k as i64, g.degree_bound() as i64, "divisor tau-degree"));
                };
                if !is_exact_zero(&gj) && !is_exact_zero(ri) {
                    s = &s - &(ri * &gj.frobenius_q_pow(i as u32)?);
                }
            }
            r.push(s.div(&g0.frobenius_q_pow(k as u32)?)?);
        }
        Self::truncated(&self.field, r, degree)
    }

    /// Coefficients reduced to the residue field; requires integral coefficients.
    pub fn reduce_mod_p(&self) -> Result<Vec<u32>> {
        self.coeffs
            .iter()
            .map(|c| {
                if c.valuation_lower_bound() < RationalValuation::zero() {
                    return Err(Error::Domain("reduction of a non-integral coefficient".into()));
                }
                if c.prec() < 1 {
                    return Err(Error::precision(1, c.prec(), "reduction mod p"));
                }
                Ok(c.repr().coeff(0))
            })
            .collect()
    }

    /// Equality of every coefficient up to the smaller known degree, to precision.
    pub fn eq_to_prec(&self, other: &TwistedSeries) -> bool {
        let d = match self.combine_known(other) {
            Some(d) => d + 1,
            None => self.coeffs.len().max(other.coeffs.len()),
        };
        (0..d).all(|i| match (self.coeff(i), other.coeff(i)) {
            (Some(a), Some(b)) => a.eq_to_prec(&b),
            _ => true,
        })
    }
}
