//! Formal Drinfeld modules of stable reduction height one.

mod class;
mod parse;
mod torsion;
mod twist;

use std::fmt;
use std::sync::{Arc, Mutex};

use crate::error::{Error, Result};
use crate::tower::{FieldElement, TowerField};
use crate::twisted::{CoeffBound, TwistedSeries};
use crate::valuation::RationalValuation;

pub use class::{ClassRecord, TorsionClass};
pub use parse::{parse_twisted, ModuleKind, ModuleSpec};
pub(crate) use parse::{base_t, tokenize, Token};
pub use torsion::{Symmetric, TorsionLevel};

/// A formal Drinfeld module `rho: O_K -> O_H{{tau}}`.
#[derive(Clone)]
pub struct DrinfeldModule {
    inner: Arc<Inner>,
}

struct Inner {
    label: String,
    base: TowerField,
    rho_t: TwistedSeries,
    m0: u32,
    eta: FieldElement,
    rho_powers: Mutex<Vec<TwistedSeries>>,
    log: Mutex<Option<TwistedSeries>>,
    levels: Mutex<Vec<TorsionLevel>>,
    origin: Origin,
}

enum Origin {
    /// Torsion towers come from Eisenstein adjunction.
    Direct,
    /// `rho' = r rho r^{-1}` for a non-constant `r`; towers and logarithm are transported.
    Twisted {
        parent: DrinfeldModule,
        r: TwistedSeries,
        degree: usize,
    },
}

impl fmt::Debug for DrinfeldModule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DrinfeldModule({}, rho_t = {:?})", self.inner.label, self.inner.rho_t)
    }
}

impl DrinfeldModule {
    /// The Carlitz module `rho_t = t + tau` over `F_q((t))`, `q = p^s`, at `t`-precision `prec`.
    pub fn carlitz(p: u32, s: u32, prec: i64) -> Result<Self> {
        let k = TowerField::base(p, s, prec)?;
        let rho = TwistedSeries::polynomial(&k, vec![FieldElement::uniformizer(&k), FieldElement::one(&k)])?;
        Self::new(&format!("carlitz(p={p},s={s})"), &k, rho, 1)
    }

    /// Builds a module from a spec string (see [`ModuleSpec`]). `p`, `s`, `m0` given in the
    /// spec must agree with the arguments.
    pub fn from_spec(spec: &str, p: u32, s: u32, m0: u32, prec: i64) -> Result<Self> {
        let parsed = ModuleSpec::parse(spec)?;
        for (name, given, want) in [("p", parsed.p, p), ("s", parsed.s, s), ("m0", parsed.m0, m0)] {
            if given.is_some_and(|g| g != want) {
                return Err(Error::Usage(format!("module spec sets {name}={} but run uses {want}", given.unwrap())));
            }
        }
        let k = TowerField::base(p, s, prec)?;
        let rho = match &parsed.kind {
            ModuleKind::Carlitz => {
                TwistedSeries::polynomial(&k, vec![FieldElement::uniformizer(&k), FieldElement::one(&k)])?
            }
            ModuleKind::Custom { rho_t } => parse_twisted(rho_t, &k)?,
        };
        let label = match &parsed.kind {
            ModuleKind::Carlitz => format!("carlitz(p={p},s={s})"),
            ModuleKind::Custom { rho_t } => format!("custom(p={p},s={s},rho_t=\"{rho_t}\")"),
        };
        Self::new(&label, &k, rho, m0)
    }

    /// A module over `base` (an unramified tower over `K`) with `eta = t^m0`.
    ///
    /// Checks that `rho_t` has constant term `t`, integral coefficients, and that
    /// `rho_eta` reduces to `tau^m0`.
    pub fn new(label: &str, base: &TowerField, rho_t: TwistedSeries, m0: u32) -> Result<Self> {
        if base.e() != 1 {
            return Err(Error::Usage("the base of a Drinfeld module must be unramified over K".into()));
        }
        if m0 == 0 {
            return Err(Error::Usage("m0 must be positive".into()));
        }
        if rho_t.field() != base {
            return Err(Error::Usage("rho_t has coefficients outside the base field".into()));
        }
        if !rho_t.is_exact() {
            return Err(Error::Unsupported("rho_t must be a polynomial in tau".into()));
        }
        let t = base_t(base)?;
        let c0 = rho_t.coeff(0).unwrap();
        if !c0.eq_to_prec(&t) || c0.prec() < base.prec() {
            return Err(Error::Domain("the constant term of rho_t must be t".into()));
        }
        let eta = t.pow(m0 as i64)?;
        let module = Self::assemble(label, base, rho_t, m0, eta, Origin::Direct);
        module.check_normalized()?;
        Ok(module)
    }

    fn assemble(
        label: &str,
        base: &TowerField,
        rho_t: TwistedSeries,
        m0: u32,
        eta: FieldElement,
        origin: Origin,
    ) -> Self {
        DrinfeldModule {
            inner: Arc::new(Inner {
                label: label.to_string(),
                base: base.clone(),
                rho_powers: Mutex::new(vec![TwistedSeries::one(base), rho_t.clone()]),
                rho_t,
                m0,
                eta,
                log: Mutex::new(None),
                levels: Mutex::new(Vec::new()),
                origin,
            }),
        }
    }

    fn check_normalized(&self) -> Result<()> {
        let red = self.rho_t().reduce_mod_p()?;
        let lead = red.get(1).copied().unwrap_or(0);
        if red.iter().enumerate().any(|(i, &c)| i != 1 && c != 0) || lead == 0 {
            return Err(Error::Domain(format!(
                "rho_t does not have stable reduction of height one (reduction {red:?})"
            )));
        }
        let eta_digits = self.eta_digits();
        let red = self.rho_of(&eta_digits)?.reduce_mod_p()?;
        let m0 = self.m0() as usize;
        if red.iter().enumerate().any(|(i, &c)| c != if i == m0 { 1 } else { 0 }) || red.len() <= m0 {
            return Err(Error::Domain(format!(
                "rho_eta does not reduce to tau^{m0} (reduction {red:?})"
            )));
        }
        Ok(())
    }

    pub fn label(&self) -> &str {
        &self.inner.label
    }
    /// The coefficient field `H`.
    pub fn base(&self) -> &TowerField {
        &self.inner.base
    }
    pub fn rho_t(&self) -> &TwistedSeries {
        &self.inner.rho_t
    }
    pub fn m0(&self) -> u32 {
        self.inner.m0
    }
    pub fn q(&self) -> u64 {
        self.inner.base.base_q()
    }
    /// `eta` as an element of `H`.
    pub fn eta(&self) -> &FieldElement {
        &self.inner.eta
    }
    /// `t`-digits of `eta` (here `t^m0`).
    pub fn eta_digits(&self) -> Vec<u32> {
        let mut d = vec![0; self.m0() as usize + 1];
        d[self.m0() as usize] = 1;
        d
    }
    pub fn is_twisted(&self) -> bool {
        matches!(self.inner.origin, Origin::Twisted { .. })
    }

    /// `rho_t^i` (composition power), cached.
    fn rho_t_power(&self, i: usize) -> Result<TwistedSeries> {
        let mut cache = self.inner.rho_powers.lock().unwrap();
        while cache.len() <= i {
            let next = cache.last().unwrap().mul(&self.inner.rho_t)?;
            cache.push(next);
        }
        Ok(cache[i].clone())
    }

    /// `rho_a` for `a = sum a_i t^i` given by its digits over `F_q`.
    pub fn rho_of(&self, a: &[u32]) -> Result<TwistedSeries> {
        let h = self.base();
        let k = h.base_field();
        let mut acc = TwistedSeries::zero(h);
        for (i, &ai) in a.iter().enumerate() {
            if ai == 0 {
                continue;
            }
            let c = FieldElement::constant(&k, ai).embed(h)?;
            acc = acc.add(&self.rho_t_power(i)?.scale_left(&c))?;
        }
        Ok(acc)
    }

    /// `rho_a` for an integral element `a` of `K`, using its known digits.
    pub fn rho_of_element(&self, a: &FieldElement) -> Result<TwistedSeries> {
        if a.field().depth() != 1 {
            return Err(Error::Usage("rho_a needs a in K".into()));
        }
        if a.valuation_lower_bound() < RationalValuation::zero() {
            return Err(Error::Domain("rho_a needs integral a".into()));
        }
        let digits: Vec<u32> = (0..a.prec()).map(|i| a.repr().coeff(i)).collect();
        self.rho_of(&digits)
    }

    /// `rho_a(x)` for `x` in an extension of `H` with positive valuation.
    pub fn act(&self, a: &[u32], x: &FieldElement) -> Result<FieldElement> {
        self.rho_of(a)?.evaluate(x, CoeffBound::Integral)
    }

    /// The logarithm `sum c_i tau^i` up to `tau^degree`.
    pub fn logarithm(&self, degree: usize) -> Result<TwistedSeries> {
        if let Some(l) = self.inner.log.lock().unwrap().as_ref() {
            if l.degree_bound() >= degree {
                return Ok(l.truncate(degree));
            }
        }
        let log = match &self.inner.origin {
            Origin::Direct => self.log_recursion(degree)?,
            Origin::Twisted { parent, r, .. } => {
                let lam = parent.logarithm(degree)?;
                let r_inv = r.invert(degree)?;
                let r0 = r.coeff(0).unwrap();
                lam.mul(&r_inv)?.scale_left(&r0).truncate(degree)
            }
        };
        *self.inner.log.lock().unwrap() = Some(log.clone());
        Ok(log)
    }

    /// Seeds the logarithm cache with coefficients restored from storage.
    pub(crate) fn install_logarithm(&self, log: TwistedSeries) -> Result<()> {
        if log.field() != self.base() {
            return Err(Error::Usage("logarithm coefficients live outside the base".into()));
        }
        *self.inner.log.lock().unwrap() = Some(log);
        Ok(())
    }

    /// `c_k (t - t^(q^k)) = sum_{j>=1} c_(k-j) a_j^(q^(k-j))`, from `lambda rho_t = t lambda`.
    fn log_recursion(&self, degree: usize) -> Result<TwistedSeries> {
        let h = self.base();
        let t = base_t(h)?;
        let rho = self.rho_t();
        let mut c = vec![FieldElement::one(h)];
        for k in 1..=degree {
            let mut s = FieldElement::zero(h);
            for j in 1..=k {
                let Some(aj) = rho.coeff(j) else { break };
                if aj.is_zero() && aj.prec() >= h.prec() {
                    continue;
                }
                s = &s + &(&c[k - j] * &aj.frobenius_q_pow((k - j) as u32)?);
            }
            let denom = &t - &t.frobenius_q_pow(k as u32)?;
            c.push(s.div(&denom)?);
        }
        TwistedSeries::truncated(h, c, degree)
    }

    /// `lambda(x)` for `mu(x) > 1/(q-1)`, with enough terms for the field's precision.
    pub fn log_value(&self, x: &FieldElement) -> Result<FieldElement> {
        let field = x.field();
        let q = self.q() as i64;
        if x.is_zero() {
            return Ok(FieldElement::zero(field).truncate(x.prec()));
        }
        let v = x.valuation_lower_bound();
        if v <= RationalValuation::new(1, q - 1) {
            return Err(Error::Domain(format!("logarithm diverges at valuation {v}")));
        }
        let e = field.e() as i64;
        let vi = v.ceil_scaled(e);
        // first D with e*(-(D+1)) + q^(D+1) vi >= prec
        let mut d = 0usize;
        let mut qp = q;
        while -(e * (d as i64 + 1)) + qp.saturating_mul(vi) < field.prec() {
            d += 1;
            qp = qp.saturating_mul(q);
        }
        self.logarithm(d)?.evaluate(x, CoeffBound::LogType)
    }
}

#[cfg(test)]
mod tests;
