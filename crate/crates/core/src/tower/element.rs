use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use rand::Rng;

use crate::error::{Error, Result};
use crate::series::PrecSeries;
use crate::valuation::RationalValuation;

use super::{LayerKind, TowerField};

/// An element of a tower field: a Laurent series in the top uniformizer.
#[derive(Clone)]
pub struct FieldElement {
    field: TowerField,
    repr: PrecSeries,
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.repr.format("pi"))
    }
}

impl FieldElement {
    /// Wraps a series in the top uniformizer, capped at the field's working precision.
    pub fn new(field: &TowerField, repr: PrecSeries) -> Result<Self> {
        if **repr.field() != **field.residue() {
            return Err(Error::Usage(format!(
                "series over {:?} is not over the residue field {:?}",
                repr.field(),
                field.residue()
            )));
        }
        Ok(Self::wrap(field, repr))
    }

    pub(crate) fn wrap(field: &TowerField, repr: PrecSeries) -> Self {
        let cap = field.prec();
        FieldElement {
            field: field.clone(),
            repr: repr.truncate(cap),
        }
    }

    pub fn zero(field: &TowerField) -> Self {
        Self::wrap(field, PrecSeries::zero(field.residue(), field.prec()))
    }
    pub fn one(field: &TowerField) -> Self {
        Self::constant(field, 1)
    }
    /// A residue-field constant (Teichmüller-style lift: the constant series).
    pub fn constant(field: &TowerField, c: u32) -> Self {
        Self::wrap(field, PrecSeries::constant(field.residue(), c, field.prec()))
    }
    pub fn from_int(field: &TowerField, n: i64) -> Self {
        Self::constant(field, field.residue().from_int(n))
    }
    /// The top uniformizer.
    pub fn uniformizer(field: &TowerField) -> Self {
        Self::wrap(field, PrecSeries::monomial(field.residue(), 1, 1, field.prec()))
    }
    /// `c * pi^k`.
    pub fn monomial(field: &TowerField, c: u32, k: i64) -> Self {
        Self::wrap(field, PrecSeries::monomial(field.residue(), c, k, field.prec()))
    }

    /// A random element `sum_{k >= min_val} a_k pi^k` with uniform residue digits up to the
    /// working precision. The leading digit is forced nonzero when `exact_val` is set.
    pub fn random<R: Rng + ?Sized>(field: &TowerField, rng: &mut R, min_val: i64, exact_val: bool) -> Self {
        let prec = field.prec();
        let q = field.residue().order();
        let len = (prec - min_val).max(0) as usize;
        let mut coeffs: Vec<u32> = (0..len).map(|_| rng.gen_range(0..q)).collect();
        if exact_val && !coeffs.is_empty() {
            coeffs[0] = rng.gen_range(1..q);
        }
        Self::wrap(field, PrecSeries::from_coeffs(field.residue(), min_val, coeffs, prec))
    }

    pub fn field(&self) -> &TowerField {
        &self.field
    }
    pub fn repr(&self) -> &PrecSeries {
        &self.repr
    }
    pub fn prec(&self) -> i64 {
        self.repr.prec()
    }
    pub fn is_zero(&self) -> bool {
        self.repr.is_zero()
    }
    /// Valuation in the top uniformizer (`e * mu`).
    pub fn int_valuation(&self) -> Option<i64> {
        self.repr.valuation()
    }
    /// `mu(x)` normalized by `mu(t) = 1`.
    pub fn valuation(&self) -> Option<RationalValuation> {
        self.repr
            .valuation()
            .map(|v| RationalValuation::new(v, self.field.e() as i64))
    }
    /// Valuation, or the precision when zero to precision (a lower bound in that case).
    pub fn valuation_lower_bound(&self) -> RationalValuation {
        RationalValuation::new(self.repr.val(), self.field.e() as i64)
    }
    pub fn is_unit(&self) -> bool {
        self.repr.valuation() == Some(0)
    }

    fn check(&self, other: &FieldElement) {
        assert!(
            self.field == other.field,
            "arithmetic between elements of different fields: {:?} vs {:?}",
            self.field,
            other.field
        );
    }

    pub fn try_add(&self, other: &FieldElement) -> Result<Self> {
        if self.field != other.field {
            return Err(Error::Usage("adding elements of different fields".into()));
        }
        Ok(self + other)
    }

    pub fn inv(&self) -> Result<Self> {
        if self.repr.is_zero() {
            return Err(Error::precision(
                self.repr.prec() + 1,
                self.repr.prec(),
                "inverting an element that is zero to precision",
            ));
        }
        Ok(Self::wrap(&self.field, self.repr.inv()?))
    }
    pub fn div(&self, other: &FieldElement) -> Result<Self> {
        self.check(other);
        Ok(self * &other.inv()?)
    }
    pub fn pow(&self, e: i64) -> Result<Self> {
        if e < 0 {
            return self.inv()?.pow(-e);
        }
        let mut result = Self::one(&self.field);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        Ok(result)
    }
    /// `x^(q^i)` for the base `q`, truncated at the working precision.
    pub fn frobenius_q_pow(&self, i: u32) -> Result<Self> {
        let cap = self.field.prec();
        let q = self.field.base_q().checked_pow(i).filter(|&q| q <= cap.max(1) as u64);
        let Some(q) = q else {
            // only the constant term survives below the working precision
            if self.repr.val() < 0 {
                return Err(Error::Usage("Frobenius exponent overflow".into()));
            }
            let s = self.field.layers[0].residue.degree();
            let c = self.field.residue().frobenius_pow(self.repr.coeff(0), s * i);
            return Ok(Self::constant(&self.field, c).truncate(self.repr.prec().min(1).max(0) * cap));
        };
        Ok(Self::wrap(
            &self.field,
            self.repr.frobenius_q_capped(q, Some(self.field.prec()))?,
        ))
    }
    /// Multiplication by a residue constant.
    pub fn scale(&self, c: u32) -> Self {
        Self::wrap(&self.field, self.repr.scale(c))
    }
    /// Multiplication by `pi^k`.
    pub fn shift(&self, k: i64) -> Self {
        Self::wrap(&self.field, self.repr.shift(k))
    }
    pub fn truncate(&self, prec: i64) -> Self {
        Self::wrap(&self.field, self.repr.truncate(prec))
    }
    /// Formal derivative of the representing series in the top uniformizer.
    pub fn d_uniformizer(&self) -> Self {
        Self::wrap(&self.field, self.repr.derivative())
    }
    /// Equality to the shared precision.
    pub fn eq_to_prec(&self, other: &FieldElement) -> bool {
        self.field == other.field && self.repr.eq_to_prec(&other.repr)
    }
    /// Writes `x = u * pi^k` with `u` a unit.
    pub fn unit_part(&self) -> Result<(FieldElement, i64)> {
        let k = self.repr.valuation().ok_or_else(|| {
            Error::Domain("element is zero to its precision; no unit decomposition".into())
        })?;
        Ok((Self::wrap(&self.field, self.repr.shift(-k)), k))
    }

    /// The image of `self` in the extension `target`, which must contain this field as a
    /// prefix.
    pub fn embed(&self, target: &TowerField) -> Result<FieldElement> {
        if !self.field.is_prefix_of(target) {
            return Err(Error::Usage(format!(
                "{:?} is not a sub-tower of {:?}",
                self.field, target
            )));
        }
        let mut repr = self.repr.clone();
        for layer in &target.layers[self.field.depth()..] {
            repr = match &layer.kind {
                LayerKind::Base { .. } => unreachable!(),
                LayerKind::Unramified { .. } => {
                    let map = layer.residue_map.as_ref().unwrap();
                    let coeffs = repr.raw_coeffs().iter().map(|&c| map.apply(c)).collect();
                    PrecSeries::from_coeffs(&layer.residue, repr.val(), coeffs, repr.prec())
                }
                LayerKind::Eisenstein { degree, .. } => {
                    compose_with_layer(&repr, layer, *degree as i64)?
                }
            };
            repr = repr.truncate(layer.prec);
        }
        Ok(Self::wrap(target, repr))
    }

    pub fn format(&self, var: &str) -> String {
        self.repr.format(var)
    }
}

/// `sum a_i y^i + O(y^prec)` with `y` the layer's lower uniformizer.
fn compose_with_layer(x: &PrecSeries, layer: &super::field::Layer, d: i64) -> Result<PrecSeries> {
    let f = &layer.residue;
    let mut prec = x.prec().saturating_mul(d).min(layer.prec * 4);
    if x.is_zero() {
        return Ok(PrecSeries::zero(f, prec));
    }
    let terms: Vec<(i64, u32)> = x.terms().collect();
    let mut powers = Vec::with_capacity(terms.len());
    for &(i, _) in &terms {
        let p = layer.lower_power(i)?;
        prec = prec.min(p.prec());
        powers.push(p);
    }
    let lo = x.val() * d;
    if prec <= lo {
        return Ok(PrecSeries::zero(f, prec));
    }
    let mut acc = vec![0u32; (prec - lo) as usize];
    for ((_, a), p) in terms.iter().zip(powers.iter()) {
        for (k, c) in p.terms() {
            if k >= prec {
                break;
            }
            let idx = (k - lo) as usize;
            acc[idx] = f.add(acc[idx], f.mul(*a, c));
        }
    }
    Ok(PrecSeries::from_coeffs(f, lo, acc, prec))
}

impl<'a> Add<&'a FieldElement> for &'a FieldElement {
    type Output = FieldElement;
    fn add(self, other: &FieldElement) -> FieldElement {
        self.check(other);
        FieldElement::wrap(&self.field, self.repr.add(&other.repr))
    }
}
impl<'a> Sub<&'a FieldElement> for &'a FieldElement {
    type Output = FieldElement;
    fn sub(self, other: &FieldElement) -> FieldElement {
        self.check(other);
        FieldElement::wrap(&self.field, self.repr.sub(&other.repr))
    }
}
impl<'a> Mul<&'a FieldElement> for &'a FieldElement {
    type Output = FieldElement;
    fn mul(self, other: &FieldElement) -> FieldElement {
        self.check(other);
        FieldElement::wrap(&self.field, self.repr.mul(&other.repr))
    }
}
impl Neg for &FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        FieldElement::wrap(&self.field, self.repr.neg())
    }
}
impl Add for FieldElement {
    type Output = FieldElement;
    fn add(self, other: FieldElement) -> FieldElement {
        &self + &other
    }
}
impl Sub for FieldElement {
    type Output = FieldElement;
    fn sub(self, other: FieldElement) -> FieldElement {
        &self - &other
    }
}
impl Mul for FieldElement {
    type Output = FieldElement;
    fn mul(self, other: FieldElement) -> FieldElement {
        &self * &other
    }
}
