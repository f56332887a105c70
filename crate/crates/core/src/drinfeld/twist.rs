use crate::error::{Error, Result};
use crate::tower::{FieldElement, TowerField};
use crate::twisted::{CoeffBound, TwistedSeries};

use super::torsion::TorsionLevel;
use super::{DrinfeldModule, Origin};

impl DrinfeldModule {
    /// The module `rho'_a = r rho_a r^{-1}` for an invertible integral `r`.
    ///
    /// A constant `r` gives a polynomial `rho'_t` with its own torsion towers. Otherwise
    /// `rho'_t` is known up to `tau^degree`, and the towers are transported: `E'^k = E^k`
    /// presented with the generator `v'_k = r(v_k)`.
    pub fn twist(&self, r: &TwistedSeries, degree: usize) -> Result<DrinfeldModule> {
        let h = self.base();
        if r.field() != h {
            return Err(Error::Usage("twisting series lives over another field".into()));
        }
        if r.coeffs().iter().any(|c| c.valuation_lower_bound() < crate::valuation::RationalValuation::zero()) {
            return Err(Error::Domain("twisting series must be integral".into()));
        }
        let r0 = r
            .coeff(0)
            .filter(|c| c.is_unit())
            .ok_or_else(|| Error::Domain("twisting series is not invertible".into()))?;
        let label = format!("twist({}, r = {r:?})", self.label());
        if r.is_exact() && r.coeffs().len() <= 1 {
            let c = TwistedSeries::constant(&r0);
            let c_inv = TwistedSeries::constant(&r0.inv()?);
            let rho = c.mul(self.rho_t())?.mul(&c_inv)?;
            return DrinfeldModule::new(&label, h, rho, self.m0());
        }
        let r_inv = r.invert(degree)?;
        let rho = r.mul(self.rho_t())?.mul(&r_inv)?.truncate(degree);
        let module = DrinfeldModule::assemble(
            &label,
            h,
            rho,
            self.m0(),
            self.eta().clone(),
            Origin::Twisted {
                parent: self.clone(),
                r: r.truncate(degree),
                degree,
            },
        );
        module.check_normalized()?;
        Ok(module)
    }

    /// The twisting series and parent module of a transported twist.
    pub fn twist_data(&self) -> Option<(&DrinfeldModule, &TwistedSeries)> {
        match &self.inner.origin {
            Origin::Twisted { parent, r, .. } => Some((parent, r)),
            Origin::Direct => None,
        }
    }

    pub(super) fn transport_level(
        &self,
        k: usize,
        prev: &TowerField,
        parent: &DrinfeldModule,
        r: &TwistedSeries,
        _degree: usize,
    ) -> Result<TorsionLevel> {
        let e_k = parent.torsion_field(k)?;
        let e_prev = parent.torsion_field(k - 1)?;
        let v = FieldElement::uniformizer(&e_k);
        let v_new = r.evaluate(&v, CoeffBound::Integral)?;
        if v_new.prec() < e_k.prec() {
            return Err(Error::precision(
                e_k.prec(),
                v_new.prec(),
                "r(v_k): the twisting series is truncated too early",
            ));
        }
        // v_k as a series in v'_k
        let repar = e_k.reparametrize(&v_new)?;
        let s = repar.embedding_series().unwrap().clone();
        // lower uniformizer of E'^(k-1), as a series in v_k
        let lower = if k == 1 {
            FieldElement::uniformizer(&e_prev).embed(&e_k)?
        } else {
            let vp = FieldElement::uniformizer(&e_prev).embed(&e_k)?;
            r.evaluate(&vp, CoeffBound::Integral)?
        };
        let y = lower.repr().compose(&s)?;
        let degree = e_k.e() / e_prev.e();
        let different = e_k.different_valuation().ceil_scaled(e_k.e() as i64);
        let field = prev.extend_by_embedding(degree, y, different, None)?;
        Ok(TorsionLevel {
            field,
            minpoly: None,
            transport: Some(s),
        })
    }

    /// For a transported twist: the element of `E'^k` equal to `x in E^k` (parent tower).
    pub fn from_parent(&self, k: usize, x: &FieldElement) -> Result<FieldElement> {
        let level = self.torsion_level(k)?;
        let s = level
            .transport
            .ok_or_else(|| Error::Usage("module is not a transported twist".into()))?;
        let Origin::Twisted { parent, .. } = &self.inner.origin else { unreachable!() };
        if *x.field() != parent.torsion_field(k)? {
            return Err(Error::Usage("element is not in the parent torsion field".into()));
        }
        FieldElement::new(&level.field, x.repr().compose(&s)?)
    }
}
