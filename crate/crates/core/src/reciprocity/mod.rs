//! Explicit reciprocity: the derivation `D` on `E^m`, its logarithmic derivative, and the
//! Kummer pairing by the trace route and by the norm character.

mod campaign;
mod verify;

use serde::{Deserialize, Serialize};

use crate::drinfeld::{DrinfeldModule, TorsionClass};
use crate::error::{Error, Result};
use crate::tower::{FieldElement, TowerField};
use crate::valuation::RationalValuation;

pub use campaign::{
    check_budget, run_suite, run_suite_with, sample_alpha, suite_plan, sample_beta, sample_unit, working_precision, CampaignConfig, CheckRecord, Suite,
    WORK_BUDGET,
};
pub use verify::{
    derivation_uniqueness_probe, threshold_probe, verify_chi_twist_invariance, verify_corollary_cong,
    verify_functoriality, verify_steinberg, Check, FunctorialSample, ProbeOutcome,
};

/// Valuation bounds attached to `L = E^m` and a level `n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Thresholds {
    /// `y` lies in `X_{L,1}` iff `mu(y) >= x_l1`.
    pub x_l1: RationalValuation,
    /// `y` lies in `X^(n)` iff `mu(y) >= x_n`.
    pub x_n: RationalValuation,
    /// Pairing formula holds for `mu(alpha) > alpha`.
    pub alpha: RationalValuation,
    /// Admissible units: `mu(1 - u) > unit`.
    pub unit: RationalValuation,
}

/// `max{n m0 / q, 1/(q-1)}`.
fn gamma(q: u64, m0: u32, n: usize) -> RationalValuation {
    let q = q as i64;
    RationalValuation::new(n as i64 * m0 as i64, q).max(RationalValuation::new(1, q - 1))
}

pub fn thresholds(field: &TowerField, q: u64, m0: u32, n: usize) -> Thresholds {
    let e = field.e() as i64;
    let inv_q1 = RationalValuation::new(1, q as i64 - 1);
    let inv_e = RationalValuation::new(1, e);
    let g = gamma(q, m0, n);
    let x_l1 = -inv_q1 - inv_e - field.different_valuation();
    Thresholds {
        x_n: RationalValuation::integer(n as i64 * m0 as i64) - g + x_l1,
        x_l1,
        alpha: g + inv_q1 + inv_e,
        unit: g + inv_q1,
    }
}

/// The derivation `D(x) = f'(pi) D(pi)` on `L = E^m` for a chosen uniformizer `pi`,
/// where `x = f(pi)`.
#[derive(Clone, Debug)]
pub struct DerivationContext {
    module: DrinfeldModule,
    m: usize,
    n: usize,
    field: TowerField,
    frame: TowerField,
    pi: FieldElement,
    dbar_pi: FieldElement,
    thresholds: Thresholds,
}

impl DerivationContext {
    /// `pi = v_m` and `D(v_m) = 1/eta^m`.
    pub fn new(module: &DrinfeldModule, m: usize, n: usize) -> Result<Self> {
        let field = module.torsion_field(m)?;
        let pi = module.generator(m)?;
        let eta_m = module.eta().pow(m as i64)?.embed(&field)?;
        Self::with_value(module, m, n, pi, eta_m.inv()?)
    }

    /// A context with an externally supplied uniformizer `pi` of `E^m` and value `D(pi)`.
    pub fn with_value(
        module: &DrinfeldModule,
        m: usize,
        n: usize,
        pi: FieldElement,
        dbar_pi: FieldElement,
    ) -> Result<Self> {
        if n == 0 || n > m {
            return Err(Error::Usage(format!("levels must satisfy 1 <= n <= m (n={n}, m={m})")));
        }
        let field = module.torsion_field(m)?;
        if *pi.field() != field || *dbar_pi.field() != field {
            return Err(Error::Usage("uniformizer and value must lie in E^m".into()));
        }
        let frame = if pi.eq_to_prec(&FieldElement::uniformizer(&field)) {
            field.clone()
        } else {
            field.reparametrize(&pi)?
        };
        let thresholds = thresholds(&field, module.q(), module.m0(), n);
        Ok(DerivationContext {
            module: module.clone(),
            m,
            n,
            field,
            frame,
            pi,
            dbar_pi,
            thresholds,
        })
    }

    pub fn module(&self) -> &DrinfeldModule {
        &self.module
    }
    pub fn field(&self) -> &TowerField {
        &self.field
    }
    pub fn levels(&self) -> (usize, usize) {
        (self.n, self.m)
    }
    pub fn uniformizer(&self) -> &FieldElement {
        &self.pi
    }
    pub fn value_at_uniformizer(&self) -> &FieldElement {
        &self.dbar_pi
    }
    pub fn thresholds(&self) -> &Thresholds {
        &self.thresholds
    }

    fn lift(&self, x: &FieldElement) -> Result<FieldElement> {
        if x.field() == &self.field {
            Ok(x.clone())
        } else {
            x.embed(&self.field)
        }
    }

    /// `f'(pi)` for `x = f(pi)`, as an element of `L`.
    fn d_pi(&self, x: &FieldElement) -> Result<FieldElement> {
        let y = self.lift(x)?.embed(&self.frame)?;
        y.d_uniformizer().descend(&self.field)
    }

    /// `D(x)` for integral `x`, a representative of its class modulo `X^(n)`.
    pub fn derivation(&self, x: &FieldElement) -> Result<FieldElement> {
        if x.valuation_lower_bound() < RationalValuation::zero() {
            return Err(Error::Domain("the derivation is defined on integral elements".into()));
        }
        Ok(&self.d_pi(x)? * &self.dbar_pi)
    }

    /// `u^-1 D(u) + k pi^-1 D(pi)` for `beta = u pi^k`, modulo `pi^-1 X^(n)`.
    pub fn dlog(&self, beta: &FieldElement) -> Result<FieldElement> {
        let beta = self.lift(beta)?;
        if beta.is_zero() {
            if beta.prec() < self.field.prec() {
                return Err(Error::precision(self.field.prec(), beta.prec(), "dlog: argument vanishes to its precision"));
            }
            return Err(Error::Domain("dlog of zero".into()));
        }
        let (u, k) = beta.embed(&self.frame)?.unit_part()?;
        let u = u.descend(&self.field)?;
        let mut out = &self.d_pi(&u)?.div(&u)? * &self.dbar_pi;
        if k != 0 {
            let term = self.dbar_pi.div(&self.pi)?;
            out = &out + &(&FieldElement::from_int(&self.field, k) * &term);
        }
        Ok(out)
    }

    /// Whether `a - b` lies in `X^(n)`.
    pub fn congruent(&self, a: &FieldElement, b: &FieldElement) -> Result<bool> {
        self.within(&(&self.lift(a)? - &self.lift(b)?), self.thresholds.x_n.clone())
    }

    /// Whether `a - b` lies in `pi^-1 X^(n)`.
    pub fn congruent_dlog(&self, a: &FieldElement, b: &FieldElement) -> Result<bool> {
        let bound = self.thresholds.x_n.clone() - RationalValuation::new(1, self.field.e() as i64);
        self.within(&(&self.lift(a)? - &self.lift(b)?), bound)
    }

    fn within(&self, d: &FieldElement, bound: RationalValuation) -> Result<bool> {
        match d.valuation() {
            Some(v) => Ok(v >= bound),
            None => {
                if d.valuation_lower_bound() < bound {
                    return Err(Error::precision(
                        bound.ceil_scaled(self.field.e() as i64),
                        d.prec(),
                        "deciding a congruence modulo X^(n)",
                    ));
                }
                Ok(true)
            }
        }
    }

    /// `T_{L|K}(lambda(alpha) dlog(beta))`.
    pub fn pairing_trace(&self, alpha: &FieldElement, beta: &FieldElement) -> Result<FieldElement> {
        let alpha = self.lift(alpha)?;
        if !alpha.is_zero() {
            let v = alpha.valuation().unwrap();
            if v <= self.thresholds.alpha {
                return Err(Error::Domain(format!(
                    "pairing needs mu(alpha) > {}, got {v}",
                    self.thresholds.alpha
                )));
            }
        }
        let lam = self.module.log_value(&alpha)?;
        let z = &lam * &self.dlog(beta)?;
        z.trace()
    }

    /// `(alpha, beta)_{L,n}` as the class `a` with pairing `rho_a(v_n)`.
    pub fn pairing_via_derivation(&self, alpha: &FieldElement, beta: &FieldElement) -> Result<TorsionClass> {
        let tr = self.pairing_trace(alpha, beta)?;
        if tr.int_valuation().is_some_and(|v| v < 0) {
            return Err(Error::Inconsistency(format!(
                "trace {} of lambda(alpha) dlog(beta) is not integral",
                tr.format("t")
            )));
        }
        TorsionClass::from_element(&tr, self.n, self.module.m0())
    }

    /// `T((1-u)/u (1 - (g'(pi)/u) / (f'(pi)/v_m)) c)` with `c` standing for `D(v_m)`
    /// (the context's own value when `candidate` is `None`).
    pub fn conguniq_trace(&self, u: &FieldElement, candidate: Option<&FieldElement>) -> Result<FieldElement> {
        let u = self.lift(u)?;
        check_admissible(&u, &self.thresholds)?;
        let one = FieldElement::one(&self.field);
        let v = self.module.generator(self.m)?;
        let ratio = self.d_pi(&u)?.div(&u)?.div(&self.d_pi(&v)?.div(&v)?)?;
        let c = match candidate {
            Some(c) => self.lift(c)?,
            None => self.derivation(&v)?,
        };
        let w = &(&(&one - &u).div(&u)? * &(&one - &ratio)) * &c;
        w.trace()
    }

    /// `chi(u)` from the trace side: `conguniq_trace` reduced modulo `t^(n m0)`.
    pub fn chi_via_trace(&self, u: &FieldElement) -> Result<TorsionClass> {
        let tr = self.conguniq_trace(u, None)?;
        TorsionClass::from_element(&tr, self.n, self.module.m0())
    }
}

fn check_admissible(u: &FieldElement, th: &Thresholds) -> Result<()> {
    let d = &FieldElement::one(u.field()) - u;
    if let Some(v) = d.valuation() {
        if v <= th.unit {
            return Err(Error::Domain(format!("unit needs mu(1 - u) > {}, got {v}", th.unit)));
        }
    }
    Ok(())
}

/// `chi(u) = (N_{L|K}(u^-1) - 1) / eta^m mod t^(n m0)` for a unit `u` of a field `L`
/// containing `E^m`.
pub fn chi_via_norm(module: &DrinfeldModule, m: usize, n: usize, u: &FieldElement) -> Result<TorsionClass> {
    let d = norm_minus_one(u)?;
    let mm = (m * module.m0() as usize) as i64;
    let need = mm + (n * module.m0() as usize) as i64;
    if d.prec() < need {
        return Err(Error::precision(need, d.prec(), "N(u^-1) - 1 for chi"));
    }
    if let Some(v) = d.int_valuation() {
        if v < mm {
            return Err(Error::Inconsistency(format!(
                "N(u^-1) - 1 = {} is not divisible by eta^{m}",
                d.format("t")
            )));
        }
    }
    TorsionClass::from_element(&d.shift(-mm), n, module.m0())
}

/// `N_{L|K}(u^-1) - 1`.
pub fn norm_minus_one(u: &FieldElement) -> Result<FieldElement> {
    if !u.is_unit() {
        return Err(Error::Domain("expected a unit".into()));
    }
    let nm = u.inv()?.norm()?;
    Ok(&nm - &FieldElement::one(nm.field()))
}

/// `(v, beta)_{L,n} = (a chi(beta)) . v_n` for the level-`m` point `v = rho_a(v_m)`.
pub fn pairing_via_chi(
    module: &DrinfeldModule,
    m: usize,
    n: usize,
    point: &TorsionClass,
    beta: &FieldElement,
) -> Result<TorsionClass> {
    if point.level() != m {
        return Err(Error::Usage("torsion point must have level m".into()));
    }
    if !beta.is_unit() {
        return Err(Error::Unsupported(
            "the norm route is implemented for units beta only".into(),
        ));
    }
    let chi = chi_via_norm(module, m, n, beta)?;
    Ok(chi.scale(point.digits()))
}

#[cfg(test)]
mod tests;
