use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::drinfeld::{parse_twisted, DrinfeldModule};
use crate::error::{Error, Result};
use crate::tower::{FieldElement, TowerField};
use crate::valuation::RationalValuation;

use super::verify::{
    derivation_uniqueness_probe, threshold_probe, verify_chi_twist_invariance, verify_corollary_cong,
    verify_functoriality, verify_steinberg, Check, FunctorialSample,
};
use super::DerivationContext;

/// Upper limit for `q^(m m0) * prec`.
pub const WORK_BUDGET: u64 = 100_000;

/// Negative controls of the uniqueness and threshold probes draw at most this many samples.
const PROBE_LIMIT: usize = 200;

/// Twisting series for the `chi-twist` suite.
const TWIST: &str = "1 + t*tau";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Corollary,
    Steinberg,
    Functorial,
    ChiTwist,
    Uniqueness,
    All,
}

impl Suite {
    fn parts(self) -> Vec<Suite> {
        use Suite::*;
        match self {
            All => vec![Corollary, Steinberg, Functorial, ChiTwist, Uniqueness],
            s => vec![s],
        }
    }
    fn id(self) -> u64 {
        self as u64 + 1
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Suite::Corollary => "corollary",
            Suite::Steinberg => "steinberg",
            Suite::Functorial => "functorial",
            Suite::ChiTwist => "chi-twist",
            Suite::Uniqueness => "uniqueness",
            Suite::All => "all",
        };
        f.write_str(s)
    }
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Suite> {
        Ok(match s {
            "corollary" => Suite::Corollary,
            "steinberg" => Suite::Steinberg,
            "functorial" => Suite::Functorial,
            "chi-twist" => Suite::ChiTwist,
            "uniqueness" => Suite::Uniqueness,
            "all" => Suite::All,
            _ => return Err(Error::Parse(format!("unknown suite {s:?}"))),
        })
    }
}

/// Parameters of a verification campaign.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CampaignConfig {
    pub module: String,
    pub p: u32,
    pub s: u32,
    pub m0: u32,
    pub n: usize,
    pub m: usize,
    /// `t`-precision; the working precision of the suite when absent.
    pub prec: Option<i64>,
    pub samples: usize,
    pub seed: u64,
}

/// One line of a JSONL report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub check: String,
    pub module: String,
    pub q: u64,
    pub m0: u32,
    pub n: usize,
    pub m: usize,
    pub seed: u64,
    pub sample: usize,
    pub input: String,
    pub lhs: String,
    pub rhs: String,
    pub verdict: String,
    pub t_prec: i64,
}

impl CheckRecord {
    pub fn passed(&self) -> bool {
        self.verdict == "pass"
    }
}

/// `(n + m) m0` for the congruences, `m m0` more for the division by `eta^m`, and two
/// guard digits. `m` is the highest level the suite touches.
pub fn working_precision(m0: u32, n: usize, m: usize) -> i64 {
    ((n + 2 * m) * m0 as usize + 2) as i64
}

/// Refuses runs with `q^(m m0) * prec` above [`WORK_BUDGET`].
pub fn check_budget(q: u64, m: usize, m0: u32, prec: i64) -> Result<()> {
    let size = q.saturating_pow(m as u32 * m0).saturating_mul(prec.max(1) as u64);
    if size > WORK_BUDGET {
        return Err(Error::precision(
            prec,
            (WORK_BUDGET / q.saturating_pow(m as u32 * m0)) as i64,
            format!("work budget q^(m m0) * prec <= {WORK_BUDGET}"),
        ));
    }
    Ok(())
}

fn first_above(field: &TowerField, bound: &RationalValuation) -> i64 {
    bound.floor_scaled(field.e() as i64) + 1
}

/// `1 + x` with `mu(x) > bound` and random digits.
pub fn sample_unit<R: Rng + ?Sized>(field: &TowerField, bound: &RationalValuation, rng: &mut R) -> FieldElement {
    let k = first_above(field, bound);
    &FieldElement::one(field) + &FieldElement::random(field, rng, k, false)
}

/// A random element with `mu > bound`, its valuation at most two steps above the bound.
pub fn sample_alpha<R: Rng + ?Sized>(field: &TowerField, bound: &RationalValuation, rng: &mut R) -> FieldElement {
    let k = first_above(field, bound) + rng.gen_range(0..3);
    FieldElement::random(field, rng, k, true)
}

/// A random `u pi^k` with `u` a unit and `-2 <= k <= 2e`.
pub fn sample_beta<R: Rng + ?Sized>(field: &TowerField, rng: &mut R) -> FieldElement {
    let k = rng.gen_range(-2..=2 * field.e() as i64);
    FieldElement::random(field, rng, 0, true).shift(k)
}

fn digest(x: &FieldElement) -> String {
    x.format("v")
}

struct Runner<'a> {
    config: &'a CampaignConfig,
    module: DrinfeldModule,
    prec: i64,
    records: Vec<CheckRecord>,
}

impl Runner<'_> {
    fn rng(&self, suite: Suite, sample: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed);
        rng.set_stream((suite.id() << 32) | sample as u64);
        rng
    }

    fn push(&mut self, sample: usize, input: String, check: Check) {
        let c = self.config;
        self.records.push(CheckRecord {
            check: check.name,
            module: c.module.clone(),
            q: self.module.q(),
            m0: c.m0,
            n: c.n,
            m: c.m,
            seed: c.seed,
            sample,
            input,
            lhs: check.lhs,
            rhs: check.rhs,
            verdict: if check.pass { "pass" } else { "fail" }.into(),
            t_prec: self.prec,
        });
    }

    fn corollary(&mut self) -> Result<()> {
        let (n, m) = (self.config.n, self.config.m);
        let ctx = DerivationContext::new(&self.module, m, n)?;
        for i in 0..self.config.samples {
            let u = sample_unit(ctx.field(), &ctx.thresholds().unit, &mut self.rng(Suite::Corollary, i));
            let check = verify_corollary_cong(&self.module, m, n, &u)?;
            self.push(i, digest(&u), check);
        }
        Ok(())
    }

    fn steinberg(&mut self) -> Result<()> {
        let (n, m) = (self.config.n, self.config.m);
        let q = self.module.q();
        let ctx = DerivationContext::new(&self.module, m, n)?;
        // enough tau-terms for r to converge on p_{L,1}
        let e = ctx.field().e() as u64;
        let mut degree = 1;
        while q.saturating_pow(degree as u32 + 1) < e * self.prec as u64 * (q - 1) + 1 {
            degree += 1;
        }
        let r = self.module.compute_r(n, degree)?;
        let twisted = self.module.twist(&r, degree)?;
        let ctx2 = DerivationContext::new(&twisted, m, n)?;
        for i in 0..self.config.samples {
            let mut rng = self.rng(Suite::Steinberg, i);
            let x = sample_alpha(ctx.field(), &ctx.thresholds().alpha, &mut rng);
            let check = verify_steinberg(&ctx, &x, Some(&r))?;
            self.push(i, digest(&x), check);
            let x2 = sample_alpha(ctx2.field(), &ctx2.thresholds().alpha, &mut rng);
            let mut check = verify_steinberg(&ctx2, &x2, None)?;
            check.name = "steinberg-twisted".into();
            self.push(i, digest(&x2), check);
        }
        Ok(())
    }

    fn functorial(&mut self) -> Result<()> {
        let (n, m) = (self.config.n, self.config.m);
        let big_m = m + 1;
        let module = self.module.clone();
        let ctx = DerivationContext::new(&module, m, n)?;
        let big = DerivationContext::new(&module, big_m, n)?;
        let l = ctx.field().clone();
        let big_field = big.field().clone();
        let bound = ctx.thresholds().alpha.clone();
        let q = self.module.q() as u32;
        for i in 0..self.config.samples {
            let mut rng = self.rng(Suite::Functorial, i);
            let mut samples = vec![
                FunctorialSample::AddAlpha {
                    alpha1: sample_alpha(&l, &bound, &mut rng),
                    alpha2: sample_alpha(&l, &bound, &mut rng),
                    beta: sample_beta(&l, &mut rng),
                },
                FunctorialSample::MulBeta {
                    alpha: sample_alpha(&l, &bound, &mut rng),
                    beta1: sample_beta(&l, &mut rng),
                    beta2: sample_beta(&l, &mut rng),
                },
                FunctorialSample::Linear {
                    a: (0..(n * module.m0() as usize + 1)).map(|_| rng.gen_range(0..q)).collect(),
                    alpha: sample_alpha(&l, &bound, &mut rng),
                    beta: sample_beta(&l, &mut rng),
                },
            ];
            if n < m {
                samples.push(FunctorialSample::Level {
                    alpha: sample_alpha(&l, &bound, &mut rng),
                    beta: sample_beta(&l, &mut rng),
                });
            }
            // small valuation: the norm to L multiplies it by q
            let k = rng.gen_range(-1..=2);
            samples.push(FunctorialSample::Norm {
                alpha: sample_alpha(&l, &bound, &mut rng),
                beta: FieldElement::random(&big_field, &mut rng, 0, true).shift(k),
            });
            // keep T_{M|L}(alpha) above the bound of L
            let trace_bound = bound.clone() + RationalValuation::new(1, l.e() as i64);
            samples.push(FunctorialSample::Trace {
                alpha: sample_alpha(&big_field, &trace_bound, &mut rng),
                beta: sample_beta(&l, &mut rng),
            });
            for s in &samples {
                let input = match s {
                    FunctorialSample::AddAlpha { alpha1, .. } => digest(alpha1),
                    FunctorialSample::MulBeta { alpha, .. }
                    | FunctorialSample::Linear { alpha, .. }
                    | FunctorialSample::Level { alpha, .. }
                    | FunctorialSample::Norm { alpha, .. }
                    | FunctorialSample::Trace { alpha, .. } => digest(alpha),
                };
                let check = verify_functoriality(&module, n, m, big_m, s)?;
                self.push(i, input, check);
            }
        }
        Ok(())
    }

    fn chi_twist(&mut self) -> Result<()> {
        let (n, m) = (self.config.n, self.config.m);
        let r = parse_twisted(TWIST, self.module.base())?;
        let twisted = self.module.twist(&r, 8)?;
        let l = self.module.torsion_field(m)?;
        let th = super::thresholds(&l, self.module.q(), self.module.m0(), n);
        for i in 0..self.config.samples {
            let u = sample_unit(&l, &th.unit, &mut self.rng(Suite::ChiTwist, i));
            let check = verify_chi_twist_invariance(&self.module, &twisted, m, n, &u)?;
            self.push(i, digest(&u), check);
        }
        Ok(())
    }

    fn uniqueness(&mut self) -> Result<()> {
        let (n, m) = (self.config.n, self.config.m);
        let ctx = DerivationContext::new(&self.module, m, n)?;
        let l = ctx.field().clone();
        let e = l.e() as i64;
        let th = ctx.thresholds().clone();
        let canonical = ctx.derivation(&self.module.generator(m)?)?;
        let count = self.config.samples.max(PROBE_LIMIT);
        let units: Vec<FieldElement> = (0..count)
            .map(|i| sample_unit(&l, &th.unit, &mut self.rng(Suite::Uniqueness, i)))
            .collect();
        let k_in = th.x_n.ceil_scaled(e);
        let candidates = [
            ("uniqueness-canonical", canonical.clone(), &units[..self.config.samples]),
            ("uniqueness-same-class", &canonical + &ctx.uniformizer().pow(k_in)?, &units[..self.config.samples]),
            ("uniqueness-perturbed", &canonical + &ctx.uniformizer().pow(k_in - 1)?, &units[..]),
        ];
        for (name, cand, us) in candidates {
            let out = derivation_uniqueness_probe(&ctx, &cand, us)?;
            let check = Check {
                name: name.into(),
                lhs: format!("in_class={}", out.in_class),
                rhs: match out.first_failure {
                    Some(i) => format!("fails at sample {i}"),
                    None => format!("holds on {} samples", out.tested),
                },
                pass: out.agrees,
            };
            self.push(0, digest(&cand), check);
        }
        // membership bound of X_{L,1}: inclusive at the bound, exclusive one step below
        let k0 = th.x_l1.ceil_scaled(e);
        let p1 = RationalValuation::new(1, self.module.q() as i64 - 1);
        let alphas: Vec<FieldElement> = (0..count)
            .map(|i| {
                let mut rng = self.rng(Suite::Uniqueness, PROBE_LIMIT + i);
                let k = first_above(&l, &p1);
                FieldElement::random(&l, &mut rng, k, true)
            })
            .collect();
        let inclusive = threshold_probe(&ctx, k0, &alphas[..self.config.samples])?;
        self.push(
            0,
            format!("pi^{k0}"),
            Check {
                name: "threshold-inclusive".into(),
                lhs: format!("bound {}", th.x_l1),
                rhs: match inclusive {
                    Some(i) => format!("non-integral at sample {i}"),
                    None => "all traces integral".into(),
                },
                pass: inclusive.is_none(),
            },
        );
        let exclusive = threshold_probe(&ctx, k0 - 1, &alphas)?;
        self.push(
            0,
            format!("pi^{}", k0 - 1),
            Check {
                name: "threshold-exclusive".into(),
                lhs: format!("bound {}", th.x_l1),
                rhs: match exclusive {
                    Some(i) => format!("non-integral at sample {i}"),
                    None => "all traces integral".into(),
                },
                pass: exclusive.is_some(),
            },
        );
        Ok(())
    }
}

/// Runs a suite and returns its records in sample order.
pub fn run_suite(config: &CampaignConfig, suite: Suite) -> Result<Vec<CheckRecord>> {
    let (_, prec) = suite_plan(config, suite)?;
    let module = DrinfeldModule::from_spec(&config.module, config.p, config.s, config.m0, prec)?;
    run_suite_with(&module, config, suite)
}

/// Validates `config` and returns the top tower level and the `t`-precision the suite
/// runs at.
pub fn suite_plan(config: &CampaignConfig, suite: Suite) -> Result<(usize, i64)> {
    let (n, m) = (config.n, config.m);
    if n == 0 || n > m {
        return Err(Error::Usage(format!("levels must satisfy 1 <= n <= m (n={n}, m={m})")));
    }
    if config.samples == 0 {
        return Err(Error::Usage("sample count must be positive".into()));
    }
    let top = if suite.parts().contains(&Suite::Functorial) { m + 1 } else { m };
    let prec = config.prec.unwrap_or_else(|| working_precision(config.m0, n, top));
    let q = (config.p as u64).pow(config.s);
    check_budget(q, top, config.m0, prec)?;
    Ok((top, prec))
}

/// Runs `suite` on an already constructed module, which must match `config`.
pub fn run_suite_with(module: &DrinfeldModule, config: &CampaignConfig, suite: Suite) -> Result<Vec<CheckRecord>> {
    let (_, prec) = suite_plan(config, suite)?;
    let base = module.base();
    if base.p() != config.p || base.base_q() != (config.p as u64).pow(config.s) || module.m0() != config.m0 {
        return Err(Error::Usage("module does not match the campaign configuration".into()));
    }
    if base.prec() != prec {
        return Err(Error::Usage(format!(
            "module has t-precision {} but the campaign runs at {prec}",
            base.prec()
        )));
    }
    let module = module.clone();
    let parts = suite.parts();
    let mut runner = Runner {
        config,
        module,
        prec,
        records: Vec::new(),
    };
    for part in parts {
        match part {
            Suite::Corollary => runner.corollary()?,
            Suite::Steinberg => runner.steinberg()?,
            Suite::Functorial => runner.functorial()?,
            Suite::ChiTwist => runner.chi_twist()?,
            Suite::Uniqueness => runner.uniqueness()?,
            Suite::All => unreachable!(),
        }
    }
    Ok(runner.records)
}
