use serde::{Deserialize, Serialize};

use crate::drinfeld::{DrinfeldModule, TorsionClass};
use crate::error::{Error, Result};
use crate::tower::FieldElement;
use crate::twisted::{CoeffBound, TwistedSeries};

use super::{chi_via_norm, norm_minus_one, DerivationContext};

/// Outcome of one check: both sides as printed residues and the verdict.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub lhs: String,
    pub rhs: String,
    pub pass: bool,
}

impl Check {
    fn classes(name: &str, lhs: &TorsionClass, rhs: &TorsionClass) -> Check {
        Check {
            name: name.into(),
            lhs: lhs.format(),
            rhs: rhs.format(),
            pass: lhs == rhs,
        }
    }
}

/// `N(u^-1) - 1 == T((1-u)/u (1 - g'(v_m) v_m / u))` modulo `t^((n+m) m0)`.
pub fn verify_corollary_cong(module: &DrinfeldModule, m: usize, n: usize, u: &FieldElement) -> Result<Check> {
    let ctx = DerivationContext::new(module, m, n)?;
    let one = FieldElement::one(ctx.field());
    let rhs = ctx.conguniq_trace(u, Some(&one))?;
    let lhs = norm_minus_one(u)?;
    let level = n + m;
    let lhs = TorsionClass::from_element(&lhs, level, module.m0())?;
    let rhs = TorsionClass::from_element(&rhs, level, module.m0()).map_err(|e| match e {
        Error::Inconsistency(msg) => Error::Inconsistency(format!("trace side: {msg}")),
        other => other,
    })?;
    Ok(Check::classes("corollary", &lhs, &rhs))
}

/// `(x, r(x))_{L,n} = 0`; with `r = None` this is `(x, x)_{L,n} = 0`.
pub fn verify_steinberg(ctx: &DerivationContext, x: &FieldElement, r: Option<&TwistedSeries>) -> Result<Check> {
    let y = match r {
        Some(r) => r.embed(x.field())?.evaluate(x, CoeffBound::Integral)?,
        None => x.clone(),
    };
    if y.is_zero() {
        return Err(Error::Domain("r(x) vanishes".into()));
    }
    let class = ctx.pairing_via_derivation(x, &y)?;
    Ok(Check {
        name: if r.is_some() { "steinberg" } else { "steinberg-self" }.into(),
        lhs: class.format(),
        rhs: "0".into(),
        pass: class.is_zero(),
    })
}

/// One sample for the functoriality and linearity identities of the pairing.
#[derive(Debug, Clone)]
pub enum FunctorialSample {
    /// `(a1 + a2, b) = (a1, b) + (a2, b)`, all in `E^m`.
    AddAlpha { alpha1: FieldElement, alpha2: FieldElement, beta: FieldElement },
    /// `(a, b1 b2) = (a, b1) + (a, b2)`.
    MulBeta { alpha: FieldElement, beta1: FieldElement, beta2: FieldElement },
    /// `(rho_a(alpha), b) = a (alpha, b)` for `a` given by `t`-digits.
    Linear { a: Vec<u32>, alpha: FieldElement, beta: FieldElement },
    /// `(alpha, beta)_{L,n} = (rho_(eta^(m-n))(alpha), beta)_{L,m}`, read at level `n`.
    Level { alpha: FieldElement, beta: FieldElement },
    /// `(alpha, beta)_{M,n} = (alpha, N_{M|L}(beta))_{L,n}`: `alpha` in `E^m`, `beta` in `E^m'`.
    Norm { alpha: FieldElement, beta: FieldElement },
    /// `(alpha, beta)_{M,n} = (T_{M|L}(alpha), beta)_{L,n}`: `alpha` in `E^m'`, `beta` in `E^m`.
    Trace { alpha: FieldElement, beta: FieldElement },
}

/// Checks one identity of the pairing between `L = E^m` and `M = E^m_big`.
pub fn verify_functoriality(
    module: &DrinfeldModule,
    n: usize,
    m: usize,
    m_big: usize,
    sample: &FunctorialSample,
) -> Result<Check> {
    let ctx = DerivationContext::new(module, m, n)?;
    match sample {
        FunctorialSample::AddAlpha { alpha1, alpha2, beta } => {
            let lhs = ctx.pairing_via_derivation(&(alpha1 + alpha2), beta)?;
            let rhs = ctx
                .pairing_via_derivation(alpha1, beta)?
                .add(&ctx.pairing_via_derivation(alpha2, beta)?)?;
            Ok(Check::classes("bilinear-alpha", &lhs, &rhs))
        }
        FunctorialSample::MulBeta { alpha, beta1, beta2 } => {
            let lhs = ctx.pairing_via_derivation(alpha, &(beta1 * beta2))?;
            let rhs = ctx
                .pairing_via_derivation(alpha, beta1)?
                .add(&ctx.pairing_via_derivation(alpha, beta2)?)?;
            Ok(Check::classes("bilinear-beta", &lhs, &rhs))
        }
        FunctorialSample::Linear { a, alpha, beta } => {
            let lhs = ctx.pairing_via_derivation(&module.act(a, alpha)?, beta)?;
            let rhs = ctx.pairing_via_derivation(alpha, beta)?.scale(a);
            Ok(Check::classes("linearity", &lhs, &rhs))
        }
        FunctorialSample::Level { alpha, beta } => {
            if n >= m {
                return Err(Error::Usage("level compatibility needs n < m".into()));
            }
            let top = DerivationContext::new(module, m, m)?;
            let mut shift = vec![0u32; (m - n) * module.m0() as usize + 1];
            *shift.last_mut().unwrap() = 1;
            let lifted = module.act(&shift, alpha)?;
            let lhs = ctx.pairing_via_derivation(alpha, beta)?;
            let rhs = match top.pairing_via_derivation(&lifted, beta)?.as_level(n) {
                Ok(c) => c,
                Err(Error::Domain(msg)) => {
                    return Ok(Check {
                        name: "level".into(),
                        lhs: lhs.format(),
                        rhs: msg,
                        pass: false,
                    })
                }
                Err(e) => return Err(e),
            };
            let mut check = Check::classes("level", &lhs, &rhs);
            // rho_(eta^(m-n)) of the level-m pairing, when alpha is also admissible there
            if alpha.valuation().is_some_and(|v| v > top.thresholds().alpha) {
                check.pass &= top.pairing_via_derivation(alpha, beta)?.lower(n)? == lhs;
            }
            Ok(check)
        }
        FunctorialSample::Norm { alpha, beta } => {
            let big = DerivationContext::new(module, m_big, n)?;
            let lhs = big.pairing_via_derivation(alpha, beta)?;
            let rhs = ctx.pairing_via_derivation(alpha, &beta.norm_to(ctx.field())?)?;
            Ok(Check::classes("norm-functoriality", &lhs, &rhs))
        }
        FunctorialSample::Trace { alpha, beta } => {
            let big = DerivationContext::new(module, m_big, n)?;
            let lhs = big.pairing_via_derivation(alpha, beta)?;
            let rhs = ctx.pairing_via_derivation(&alpha.trace_to(ctx.field())?, beta)?;
            Ok(Check::classes("trace-functoriality", &lhs, &rhs))
        }
    }
}

/// `chi` of `module` (norm route) against `chi'` of a transported twist (trace route in
/// the twisted tower, uniformizer `v'_m`) and the norm route in the twisted tower.
pub fn verify_chi_twist_invariance(
    module: &DrinfeldModule,
    twisted: &DrinfeldModule,
    m: usize,
    n: usize,
    u: &FieldElement,
) -> Result<Check> {
    let lhs = chi_via_norm(module, m, n, u)?;
    let u2 = twisted.from_parent(m, u)?;
    let ctx = DerivationContext::new(twisted, m, n)?;
    let rhs = ctx.chi_via_trace(&u2)?;
    let norm_side = chi_via_norm(twisted, m, n, &u2)?;
    let mut check = Check::classes("chi-twist", &lhs, &rhs);
    check.pass &= norm_side == lhs;
    Ok(check)
}

/// Result of testing a candidate value of `D(v_m)` against sampled units.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProbeOutcome {
    /// Whether the candidate is congruent to `1/eta^m` modulo `X^(n)`.
    pub in_class: bool,
    /// Number of units tested.
    pub tested: usize,
    /// Index of the first unit where `chi(u)` and the candidate formula differ.
    pub first_failure: Option<usize>,
    /// Whether the sampled verdict matches `in_class`.
    pub agrees: bool,
}

/// Tests `chi(u) == T((1-u)/u (1 - g'(v_m) v_m / u) c) mod t^(n m0)` for the candidate `c`
/// over `units`, stopping at the first failure.
pub fn derivation_uniqueness_probe(
    ctx: &DerivationContext,
    candidate: &FieldElement,
    units: &[FieldElement],
) -> Result<ProbeOutcome> {
    let (n, m) = ctx.levels();
    let module = ctx.module();
    let canonical = ctx.derivation(&module.generator(m)?)?;
    let in_class = ctx.congruent(candidate, &canonical)?;
    let mut first_failure = None;
    let mut tested = 0;
    for (i, u) in units.iter().enumerate() {
        tested += 1;
        let chi = chi_via_norm(module, m, n, u)?;
        let ok = match TorsionClass::from_element(&ctx.conguniq_trace(u, Some(candidate))?, n, module.m0()) {
            Ok(c) => c == chi,
            Err(Error::Inconsistency(_)) => false,
            Err(e) => return Err(e),
        };
        if !ok {
            first_failure = Some(i);
            break;
        }
    }
    Ok(ProbeOutcome {
        in_class,
        tested,
        first_failure,
        agrees: in_class == first_failure.is_none(),
    })
}

/// Whether `T(lambda(alpha) pi^k)` is integral for every `alpha` given; returns the index
/// of the first non-integral trace.
pub fn threshold_probe(ctx: &DerivationContext, k: i64, alphas: &[FieldElement]) -> Result<Option<usize>> {
    let field = ctx.field();
    let y = ctx.uniformizer().pow(k)?;
    for (i, alpha) in alphas.iter().enumerate() {
        let lam = ctx.module().log_value(&alpha.embed(field)?)?;
        let tr = (&lam * &y).trace()?;
        match tr.int_valuation() {
            Some(v) if v < 0 => return Ok(Some(i)),
            Some(_) => {}
            None if tr.prec() < 0 => {
                return Err(Error::precision(0, tr.prec(), "integrality of a trace"));
            }
            None => {}
        }
    }
    Ok(None)
}
