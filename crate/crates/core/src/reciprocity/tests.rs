use super::*;
use crate::drinfeld::{Symmetric, TorsionClass};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn carlitz(p: u32, prec: i64) -> DrinfeldModule {
    DrinfeldModule::carlitz(p, 1, prec).unwrap()
}

fn t_in(f: &TowerField) -> FieldElement {
    FieldElement::uniformizer(&f.base_field()).embed(f).unwrap()
}

#[test]
fn thresholds_for_q3_level_one() {
    let m = carlitz(3, 10);
    let th = thresholds(&m.torsion_field(1).unwrap(), 3, 1, 1);
    assert_eq!(th.x_l1, RationalValuation::new(-3, 2));
    assert_eq!(th.x_n, RationalValuation::integer(-1));
    assert_eq!(th.alpha, RationalValuation::new(3, 2));
    assert_eq!(th.unit, RationalValuation::integer(1));
}

#[test]
fn derivation_values() {
    let m = carlitz(3, 10);
    for lvl in 1..=2 {
        let ctx = DerivationContext::new(&m, lvl, 1).unwrap();
        let l = ctx.field();
        let v = m.generator(lvl).unwrap();
        let want = t_in(l).pow(-(lvl as i64)).unwrap();
        assert!(ctx.derivation(&v).unwrap().eq_to_prec(&want));
        assert!(ctx.derivation(&FieldElement::constant(l, 2)).unwrap().is_zero());
        let cube = &FieldElement::one(l) + &v.pow(3).unwrap();
        assert!(ctx.derivation(&cube).unwrap().is_zero());
        assert!(ctx.derivation(&v.inv().unwrap()).is_err());
    }
}

#[test]
fn dlog_values() {
    let m = carlitz(3, 10);
    let ctx = DerivationContext::new(&m, 1, 1).unwrap();
    let l = ctx.field();
    let v = m.generator(1).unwrap();
    let want = (&t_in(l) * &v).inv().unwrap();
    assert!(ctx.dlog(&v).unwrap().eq_to_prec(&want));
    assert!(ctx.dlog(&FieldElement::constant(l, 2)).unwrap().is_zero());
    assert!(matches!(ctx.dlog(&FieldElement::zero(l)), Err(Error::Domain(_))));
}

#[test]
fn chi_examples() {
    let m = carlitz(3, 10);
    let l = m.torsion_field(1).unwrap();
    let one = FieldElement::one(&l);
    assert!(chi_via_norm(&m, 1, 1, &one).unwrap().is_zero());
    let v = m.generator(1).unwrap();
    let u = &one + &v.pow(3).unwrap();
    // v -> -v is the other conjugate, so N(u) = 1 - t^2 v^2 = 1 + t^3
    let t = t_in(&l.base_field());
    assert!(u.norm().unwrap().eq_to_prec(&(&FieldElement::one(&t.field().clone()) + &t.pow(3).unwrap())));
    assert!(chi_via_norm(&m, 1, 1, &u).unwrap().is_zero());
    assert!(chi_via_norm(&m, 1, 1, &v).is_err());
}

#[test]
fn corollary_examples() {
    let m = carlitz(3, 10);
    let l = m.torsion_field(1).unwrap();
    let one = FieldElement::one(&l);
    let v = m.generator(1).unwrap();
    for u in [one.clone(), &one + &v.pow(3).unwrap()] {
        let c = verify_corollary_cong(&m, 1, 1, &u).unwrap();
        assert!(c.pass);
        assert_eq!((c.lhs.as_str(), c.rhs.as_str()), ("0", "0"));
    }
    // 1 + v is not admissible
    assert!(matches!(verify_corollary_cong(&m, 1, 1, &(&one + &v)), Err(Error::Domain(_))));
}

#[test]
fn corollary_nonzero_residue() {
    // q=3, L=E^2, n=1: a unit whose congruence class is nonzero on both sides
    let m = carlitz(3, 8);
    let l = m.torsion_field(2).unwrap();
    let v = m.generator(2).unwrap();
    let u = &FieldElement::one(&l) + &v.pow(8).unwrap();
    let c = verify_corollary_cong(&m, 2, 1, &u).unwrap();
    assert!(c.pass, "{c:?}");
    assert_eq!(c.lhs, "2*t^2");
}

#[test]
fn pairing_at_uniformizer() {
    let m = carlitz(3, 8);
    let ctx = DerivationContext::new(&m, 2, 1).unwrap();
    let l = ctx.field().clone();
    let v = m.generator(2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let t2 = t_in(&l).pow(2).unwrap();
    for _ in 0..5 {
        let alpha = sample_alpha(&l, &ctx.thresholds().alpha, &mut rng);
        let direct = (&m.log_value(&alpha).unwrap() * &(&t2 * &v).inv().unwrap()).trace().unwrap();
        let got = ctx.pairing_via_derivation(&alpha, &v).unwrap();
        assert_eq!(got, TorsionClass::from_element(&direct, 1, 1).unwrap());
        // the same trace from the conjugates
        let z = &m.log_value(&alpha).unwrap() * &ctx.dlog(&v).unwrap();
        assert!(m.galois_oracle(&z, 2, Symmetric::Trace).unwrap().eq_to_prec(&z.trace().unwrap()));
    }
    let small = v.pow(3).unwrap();
    assert!(matches!(ctx.pairing_via_derivation(&small, &v), Err(Error::Domain(_))));
}

#[test]
fn pairing_via_chi_examples() {
    let m = carlitz(3, 8);
    let l = m.torsion_field(2).unwrap();
    let v = m.generator(2).unwrap();
    let u = &FieldElement::one(&l) + &v.pow(7).unwrap();
    let f = l.residue().clone();
    let chi = chi_via_norm(&m, 2, 2, &u).unwrap();
    assert!(!chi.is_zero());
    let at = |digits: Vec<u32>| pairing_via_chi(&m, 2, 2, &TorsionClass::new(&f, 2, 1, digits), &u).unwrap();
    assert_eq!(at(vec![1]), chi);
    assert!(at(vec![]).is_zero());
    assert_eq!(at(vec![0, 1]), chi.scale(&[0, 1]));
    assert!(matches!(
        pairing_via_chi(&m, 2, 2, &TorsionClass::new(&f, 2, 1, vec![1]), &v),
        Err(Error::Unsupported(_))
    ));
}

#[test]
fn chi_through_unramified_extension() {
    let m = carlitz(3, 8);
    let l = m.torsion_field(1).unwrap();
    let big = l.extend_unramified(2).unwrap();
    let th = thresholds(&big, 3, 1, 1);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..5 {
        let u = sample_unit(&big, &th.unit, &mut rng);
        let down = u.norm_to(&l).unwrap();
        assert_eq!(chi_via_norm(&m, 1, 1, &u).unwrap(), chi_via_norm(&m, 1, 1, &down).unwrap());
    }
}

#[test]
fn steinberg_for_carlitz_and_unit_twist() {
    let m = carlitz(3, 8);
    let ctx = DerivationContext::new(&m, 2, 1).unwrap();
    let r = m.compute_r(1, 6).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..5 {
        let x = sample_alpha(ctx.field(), &ctx.thresholds().alpha, &mut rng);
        assert!(verify_steinberg(&ctx, &x, Some(&r)).unwrap().pass);
    }
    let m = DrinfeldModule::from_spec(r#"custom(rho_t = "t + (1+t)*tau")"#, 3, 1, 1, 8).unwrap();
    let r = m.compute_r(1, 6).unwrap();
    let ctx = DerivationContext::new(&m, 2, 1).unwrap();
    let twisted = m.twist(&r, 6).unwrap();
    let ctx2 = DerivationContext::new(&twisted, 2, 1).unwrap();
    for _ in 0..5 {
        let x = sample_alpha(ctx.field(), &ctx.thresholds().alpha, &mut rng);
        assert!(verify_steinberg(&ctx, &x, Some(&r)).unwrap().pass);
        let x = sample_alpha(ctx2.field(), &ctx2.thresholds().alpha, &mut rng);
        assert!(verify_steinberg(&ctx2, &x, None).unwrap().pass);
    }
}

#[test]
fn uniqueness_probe_controls() {
    let m = carlitz(3, 8);
    let ctx = DerivationContext::new(&m, 2, 1).unwrap();
    let l = ctx.field().clone();
    let e = l.e() as i64;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let units: Vec<_> = (0..40).map(|_| sample_unit(&l, &ctx.thresholds().unit, &mut rng)).collect();
    let canonical = t_in(&l).pow(-2).unwrap();
    let out = derivation_uniqueness_probe(&ctx, &canonical, &units).unwrap();
    assert!(out.in_class && out.first_failure.is_none() && out.agrees);
    let k = ctx.thresholds().x_n.ceil_scaled(e);
    let same = &canonical + &ctx.uniformizer().pow(k).unwrap();
    assert!(derivation_uniqueness_probe(&ctx, &same, &units).unwrap().agrees);
    let off = &canonical + &ctx.uniformizer().pow(k - 1).unwrap();
    let out = derivation_uniqueness_probe(&ctx, &off, &units).unwrap();
    assert!(!out.in_class && out.first_failure.is_some() && out.agrees);
}

#[test]
fn threshold_is_sharp() {
    let m = carlitz(3, 8);
    let ctx = DerivationContext::new(&m, 1, 1).unwrap();
    let l = ctx.field().clone();
    let k0 = ctx.thresholds().x_l1.ceil_scaled(l.e() as i64);
    assert_eq!(k0, -3);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let alphas: Vec<_> = (0..20).map(|_| FieldElement::random(&l, &mut rng, 2, true)).collect();
    assert_eq!(threshold_probe(&ctx, k0, &alphas).unwrap(), None);
    assert!(threshold_probe(&ctx, k0 - 1, &alphas).unwrap().is_some());
}

#[test]
fn campaigns_are_deterministic() {
    let cfg = CampaignConfig {
        module: "carlitz".into(),
        p: 3,
        s: 1,
        m0: 1,
        n: 1,
        m: 2,
        prec: None,
        samples: 3,
        seed: 42,
    };
    let a = run_suite(&cfg, Suite::Corollary).unwrap();
    assert_eq!(a, run_suite(&cfg, Suite::Corollary).unwrap());
    assert_eq!(a.len(), 3);
    assert!(a.iter().all(|r| r.passed() && r.t_prec == working_precision(1, 1, 2)));
    let b = run_suite(&CampaignConfig { seed: 43, ..cfg.clone() }, Suite::Corollary).unwrap();
    assert_ne!(a, b);
    assert!(run_suite(&CampaignConfig { n: 3, ..cfg.clone() }, Suite::All).is_err());
    assert!(run_suite(&CampaignConfig { samples: 0, ..cfg.clone() }, Suite::All).is_err());
    assert!(matches!(
        run_suite(&CampaignConfig { prec: Some(1 << 20), ..cfg }, Suite::All),
        Err(Error::InsufficientPrecision { .. })
    ));
    assert_eq!("chi-twist".parse::<Suite>().unwrap(), Suite::ChiTwist);
    assert!("nope".parse::<Suite>().is_err());
}

#[test]
fn too_little_precision_is_reported() {
    let cfg = CampaignConfig {
        module: "carlitz".into(),
        p: 3,
        s: 1,
        m0: 1,
        n: 2,
        m: 2,
        prec: Some(3),
        samples: 2,
        seed: 1,
    };
    assert!(matches!(run_suite(&cfg, Suite::Corollary), Err(Error::InsufficientPrecision { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn dlog_is_a_homomorphism(seed in any::<u64>()) {
        let m = carlitz(3, 8);
        let ctx = DerivationContext::new(&m, 2, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = sample_beta(ctx.field(), &mut rng);
        let b = sample_beta(ctx.field(), &mut rng);
        let lhs = ctx.dlog(&(&a * &b)).unwrap();
        let rhs = &ctx.dlog(&a).unwrap() + &ctx.dlog(&b).unwrap();
        prop_assert!(ctx.congruent_dlog(&lhs, &rhs).unwrap());
    }

    #[test]
    fn dlog_does_not_depend_on_uniformizer(seed in any::<u64>()) {
        let m = carlitz(3, 8);
        let ctx = DerivationContext::new(&m, 2, 1).unwrap();
        let l = ctx.field().clone();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u0 = FieldElement::random(&l, &mut rng, 0, true);
        let pi = &u0 * &m.generator(2).unwrap();
        let other = DerivationContext::with_value(&m, 2, 1, pi.clone(), ctx.derivation(&pi).unwrap()).unwrap();
        let beta = sample_beta(&l, &mut rng);
        prop_assert!(ctx.congruent_dlog(&ctx.dlog(&beta).unwrap(), &other.dlog(&beta).unwrap()).unwrap());
    }

    #[test]
    fn chi_is_a_homomorphism(seed in any::<u64>()) {
        let m = carlitz(3, 8);
        let l = m.torsion_field(2).unwrap();
        let th = thresholds(&l, 3, 1, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = sample_unit(&l, &th.unit, &mut rng);
        let b = FieldElement::random(&l, &mut rng, 0, true);
        let lhs = chi_via_norm(&m, 2, 2, &(&a * &b)).unwrap();
        let rhs = chi_via_norm(&m, 2, 2, &a).unwrap().add(&chi_via_norm(&m, 2, 2, &b).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn pairing_is_bilinear(seed in any::<u64>()) {
        let m = carlitz(3, 8);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ctx = DerivationContext::new(&m, 2, 1).unwrap();
        let l = ctx.field().clone();
        let bound = ctx.thresholds().alpha.clone();
        let sample = FunctorialSample::AddAlpha {
            alpha1: sample_alpha(&l, &bound, &mut rng),
            alpha2: sample_alpha(&l, &bound, &mut rng),
            beta: sample_beta(&l, &mut rng),
        };
        prop_assert!(verify_functoriality(&m, 1, 2, 3, &sample).unwrap().pass);
        let sample = FunctorialSample::MulBeta {
            alpha: sample_alpha(&l, &bound, &mut rng),
            beta1: sample_beta(&l, &mut rng),
            beta2: sample_beta(&l, &mut rng),
        };
        prop_assert!(verify_functoriality(&m, 1, 2, 3, &sample).unwrap().pass);
    }
}

