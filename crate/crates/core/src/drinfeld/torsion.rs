use crate::error::{Error, Result};
use crate::series::PrecSeries;
use crate::tower::{FieldElement, TowerField};
use crate::twisted::{CoeffBound, TwistedSeries};

use super::{base_t, DrinfeldModule, Origin};

/// One level `E^k` of a torsion tower.
#[derive(Clone, Debug)]
pub struct TorsionLevel {
    /// `E^k`, whose top uniformizer is the generator `v_k`.
    pub field: TowerField,
    /// Monic Eisenstein polynomial adjoined at this level (lowest degree first), when the
    /// level was built by adjunction.
    pub minpoly: Option<Vec<FieldElement>>,
    /// For transported levels: the parent generator `v_k` as a series in `v'_k`.
    pub(crate) transport: Option<PrecSeries>,
}

/// Which symmetric function the Galois oracle computes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Symmetric {
    Trace,
    Norm,
}

/// Ordinary polynomial long division `num / den` with a unit leading coefficient in `den`.
fn poly_divide(num: &[FieldElement], den: &[FieldElement]) -> Result<Vec<FieldElement>> {
    let dn = den.len() - 1;
    let lead_inv = den[dn].inv()?;
    if num.len() < den.len() {
        return Err(Error::Domain("dividend degree below divisor degree".into()));
    }
    let mut rem = num.to_vec();
    let mut quot = vec![FieldElement::zero(num[0].field()); num.len() - dn];
    for k in (0..quot.len()).rev() {
        let c = &rem[k + dn] * &lead_inv;
        for (j, dj) in den.iter().enumerate() {
            rem[k + j] = &rem[k + j] - &(&c * dj);
        }
        quot[k] = c;
    }
    if let Some(i) = rem.iter().position(|c| !c.is_zero()) {
        return Err(Error::Domain(format!(
            "polynomial division leaves a remainder at X^{i}"
        )));
    }
    Ok(quot)
}

/// The ordinary polynomial `sum a_i X^(q^i)`.
fn additive_to_poly(f: &TwistedSeries, q: u64) -> Result<Vec<FieldElement>> {
    let deg = q.pow(f.coeffs().len().saturating_sub(1) as u32) as usize;
    if deg > 1 << 12 {
        return Err(Error::Unsupported("additive polynomial degree too large".into()));
    }
    let mut out = vec![FieldElement::zero(f.field()); deg + 1];
    for (i, c) in f.coeffs().iter().enumerate() {
        out[q.pow(i as u32) as usize] = c.clone();
    }
    Ok(out)
}

fn make_monic(mut poly: Vec<FieldElement>) -> Result<Vec<FieldElement>> {
    let lead = poly.last().unwrap().clone();
    if !lead.is_unit() {
        return Err(Error::Domain(format!(
            "torsion polynomial has non-unit leading coefficient {}; its Eisenstein factor is not \
             extracted (rho_t must have a unit top coefficient)",
            lead.format("pi")
        )));
    }
    let inv = lead.inv()?;
    for c in poly.iter_mut() {
        *c = &*c * &inv;
    }
    let d = poly.len() - 1;
    poly[d] = FieldElement::one(lead.field());
    Ok(poly)
}

fn newton_diagnostics(poly: &[FieldElement]) -> String {
    let vals: Vec<String> = poly
        .iter()
        .map(|c| match c.valuation() {
            Some(v) => v.to_string(),
            None => "inf".into(),
        })
        .collect();
    format!("coefficient valuations [{}]", vals.join(", "))
}

impl DrinfeldModule {
    /// Builds `E^1, ..., E^n` (cached) and returns level `n`.
    pub fn torsion_level(&self, n: usize) -> Result<TorsionLevel> {
        if n == 0 {
            return Ok(TorsionLevel {
                field: self.base().clone(),
                minpoly: None,
                transport: None,
            });
        }
        let mut levels = self.inner.levels.lock().unwrap();
        while levels.len() < n {
            let k = levels.len() + 1;
            let prev = if k == 1 { self.base().clone() } else { levels[k - 2].field.clone() };
            let level = match &self.inner.origin {
                Origin::Direct => self.adjoin_level(k, &prev)?,
                Origin::Twisted { parent, r, degree } => {
                    self.transport_level(k, &prev, parent, r, *degree)?
                }
            };
            levels.push(level);
        }
        Ok(levels[n - 1].clone())
    }

    /// `E^n`.
    pub fn torsion_field(&self, n: usize) -> Result<TowerField> {
        Ok(self.torsion_level(n)?.field)
    }

    /// The generator `v_n` in `E^n` (`v_0 = 0`).
    pub fn generator(&self, n: usize) -> Result<FieldElement> {
        let f = self.torsion_field(n)?;
        if n == 0 {
            return Ok(FieldElement::zero(&f));
        }
        Ok(FieldElement::uniformizer(&f))
    }

    /// The polynomial whose root is `v_k` over `E^(k-1)`.
    pub fn level_polynomial(&self, k: usize) -> Result<Vec<FieldElement>> {
        let prev = self.torsion_field(k - 1)?;
        self.level_polynomial_over(k, &prev)
    }

    fn level_polynomial_over(&self, k: usize, prev: &TowerField) -> Result<Vec<FieldElement>> {
        let q = self.q();
        let rho_eta = self.rho_of(&self.eta_digits())?;
        if k == 1 {
            let num = additive_to_poly(&rho_eta, q)?;
            let mut lower = vec![0u32; self.m0() as usize];
            lower[self.m0() as usize - 1] = 1;
            let den = additive_to_poly(&self.rho_of(&lower)?, q)?;
            make_monic(poly_divide(&num, &den)?)
        } else {
            let v = FieldElement::uniformizer(prev);
            let emb = rho_eta.embed(prev)?;
            let mut poly = additive_to_poly(&emb, q)?;
            poly[0] = &poly[0] - &v;
            make_monic(poly)
        }
    }

    fn adjoin_level(&self, k: usize, prev: &TowerField) -> Result<TorsionLevel> {
        let poly = self.level_polynomial_over(k, prev)?;
        let field = prev.extend_eisenstein(&poly).map_err(|e| match e {
            Error::Domain(msg) => Error::Domain(format!(
                "level {k} torsion polynomial rejected: {msg}; {}",
                newton_diagnostics(&poly)
            )),
            other => other,
        })?;
        let expected = self.q().pow(self.m0() * k as u32 - 1) * (self.q() - 1);
        if field.e() as u64 != expected * prev.base_field().e() as u64 {
            return Err(Error::Inconsistency(format!(
                "level {k} has ramification {} instead of {expected}",
                field.e()
            )));
        }
        Ok(TorsionLevel {
            field,
            minpoly: Some(poly),
            transport: None,
        })
    }

    /// Torsion points of level `n` as `(digits of a, rho_a(v_n))`, `a` running over
    /// polynomials of degree `< n*m0` in a fixed order.
    pub fn torsion_points(&self, n: usize) -> Result<Vec<(Vec<u32>, FieldElement)>> {
        let field = self.torsion_field(n)?;
        let len = n * self.m0() as usize;
        let basis = self.torsion_basis(n)?;
        let q = self.q() as u32;
        let count = (q as usize).pow(len as u32);
        let res = field.base_field();
        let mut out = Vec::with_capacity(count);
        for idx in 0..count {
            let mut digits = Vec::with_capacity(len);
            let mut r = idx;
            for _ in 0..len {
                digits.push((r % q as usize) as u32);
                r /= q as usize;
            }
            let mut pt = FieldElement::zero(&field);
            for (d, b) in digits.iter().zip(&basis) {
                if *d != 0 {
                    let c = FieldElement::constant(&res, *d).embed(&field)?;
                    pt = &pt + &(&c * b);
                }
            }
            out.push((digits, pt));
        }
        Ok(out)
    }

    /// `rho_(t^i)(v_n)` for `i < n*m0`.
    pub fn torsion_basis(&self, n: usize) -> Result<Vec<FieldElement>> {
        let v = self.generator(n)?;
        let len = n * self.m0() as usize;
        let mut out = vec![v.clone()];
        let rho_t = self.rho_t().embed(v.field())?;
        for _ in 1..len {
            let next = rho_t.evaluate(out.last().unwrap(), CoeffBound::Integral)?;
            out.push(next);
        }
        Ok(out)
    }

    /// `rho_a(v_n)` for `a` given by digits (read modulo `t^(n*m0)`).
    pub fn point(&self, n: usize, a: &[u32]) -> Result<FieldElement> {
        let basis = self.torsion_basis(n)?;
        let field = self.torsion_field(n)?;
        let res = field.base_field();
        let mut pt = FieldElement::zero(&field);
        for (d, b) in a.iter().zip(&basis) {
            if *d != 0 {
                pt = &pt + &(&FieldElement::constant(&res, *d).embed(&field)? * b);
            }
        }
        Ok(pt)
    }

    /// `prod_{w in W^n} (X - w)` as an additive polynomial over `H`, from the expanded
    /// product of linear factors.
    pub fn kernel_product(&self, n: usize) -> Result<TwistedSeries> {
        let field = self.torsion_field(n)?;
        let points = self.torsion_points(n)?;
        // coefficients lowest degree first
        let mut poly = vec![FieldElement::one(&field)];
        for (_, w) in &points {
            let mut next = vec![FieldElement::zero(&field); poly.len() + 1];
            for (i, c) in poly.iter().enumerate() {
                next[i + 1] = &next[i + 1] + c;
                next[i] = &next[i] - &(c * w);
            }
            poly = next;
        }
        let q = self.q() as usize;
        let h = self.base();
        let mut coeffs = Vec::new();
        let mut qi = 1usize;
        for (i, c) in poly.iter().enumerate() {
            if i == qi {
                coeffs.push(c.descend(h).map_err(|_| {
                    Error::Inconsistency(format!("kernel product coefficient of X^{i} is not in H"))
                })?);
                qi *= q;
            } else if !c.is_zero() {
                return Err(Error::Inconsistency(format!(
                    "kernel product is not additive: X^{i} has coefficient {}",
                    c.format("v")
                )));
            }
        }
        for (i, c) in coeffs.iter().enumerate() {
            if c.valuation_lower_bound() < crate::valuation::RationalValuation::zero() {
                return Err(Error::Inconsistency(format!("kernel product coefficient {i} is not integral")));
            }
        }
        TwistedSeries::polynomial(h, coeffs)
    }

    /// The series `r_n` with `prod (X - w) = r_n o rho_(eta^n)`, up to `tau^degree`.
    pub fn compute_r(&self, n: usize, degree: usize) -> Result<TwistedSeries> {
        let p = self.kernel_product(n)?;
        let mut eta_n = vec![0u32; n * self.m0() as usize + 1];
        eta_n[n * self.m0() as usize] = 1;
        let g = self.rho_of(&eta_n)?;
        let r = p.left_divide(&g, degree)?;
        if !r.coeff(0).is_some_and(|c| c.is_unit()) {
            return Err(Error::Inconsistency("r_n has a non-unit constant term".into()));
        }
        Ok(r)
    }

    /// Trace or norm of `x in E^n` to `K` as the sum or product of the conjugates
    /// `f(rho_u(v_n))`, `u` over units mod `t^(n*m0)`, where `x = f(v_n)`.
    pub fn galois_oracle(&self, x: &FieldElement, n: usize, which: Symmetric) -> Result<FieldElement> {
        if self.base().depth() != 1 {
            return Err(Error::Usage("the Galois oracle needs H = K".into()));
        }
        let field = self.torsion_field(n)?;
        if *x.field() != field {
            return Err(Error::Usage("element does not lie in the torsion field".into()));
        }
        let mut acc: Option<FieldElement> = None;
        for (digits, conj_v) in self.torsion_points(n)? {
            if digits[0] == 0 {
                continue;
            }
            let img = FieldElement::new(&field, x.repr().compose(conj_v.repr())?)?;
            acc = Some(match (acc, which) {
                (None, _) => img,
                (Some(a), Symmetric::Trace) => &a + &img,
                (Some(a), Symmetric::Norm) => &a * &img,
            });
        }
        acc.unwrap().descend(&field.base_field())
    }

    /// `t` in `E^n`.
    pub fn t_in(&self, field: &TowerField) -> Result<FieldElement> {
        base_t(field)
    }
}

impl DrinfeldModule {
    /// Seeds the torsion tower with levels `1..=levels.len()` restored from storage.
    pub(crate) fn install_levels(&self, levels: Vec<TorsionLevel>) -> Result<()> {
        if !matches!(self.inner.origin, Origin::Direct) {
            return Err(Error::Unsupported("stored towers are only used for directly built modules".into()));
        }
        let mut slot = self.inner.levels.lock().unwrap();
        if !slot.is_empty() {
            return Err(Error::Usage("torsion tower already built".into()));
        }
        *slot = levels;
        Ok(())
    }
}
