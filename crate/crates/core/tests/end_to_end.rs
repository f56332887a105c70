use drinfeld_core::cache::TowerCache;
use drinfeld_core::drinfeld::DrinfeldModule;
use drinfeld_core::eval::{evaluate, Value};
use drinfeld_core::reciprocity::{chi_via_norm, sample_unit, thresholds, DerivationContext};
use drinfeld_core::tower::FieldElement;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn chi_by_trace_and_by_norm_agree() {
    for (spec, p, n, m) in [
        ("carlitz", 3, 1, 2),
        ("carlitz", 3, 2, 2),
        ("carlitz", 2, 2, 2),
        (r#"custom(rho_t = "t + (1+t)*tau")"#, 3, 1, 2),
    ] {
        let module = DrinfeldModule::from_spec(spec, p, 1, 1, 10).unwrap();
        let ctx = DerivationContext::new(&module, m, n).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mut nonzero = 0;
        for _ in 0..15 {
            let u = sample_unit(ctx.field(), &ctx.thresholds().unit, &mut rng);
            let by_norm = chi_via_norm(&module, m, n, &u).unwrap();
            assert_eq!(ctx.chi_via_trace(&u).unwrap(), by_norm, "{spec} n={n} m={m}");
            nonzero += !by_norm.is_zero() as usize;
        }
        assert!(nonzero > 0, "{spec} n={n} m={m}: all values trivial");
    }
}

#[test]
fn trace_and_norm_are_transitive() {
    let module = DrinfeldModule::carlitz(3, 1, 8).unwrap();
    let e3 = module.torsion_field(3).unwrap();
    let e1 = module.torsion_field(1).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..5 {
        let x = FieldElement::random(&e3, &mut rng, 0, true);
        assert!(x.trace().unwrap().eq_to_prec(&x.trace_to(&e1).unwrap().trace().unwrap()));
        assert!(x.norm().unwrap().eq_to_prec(&x.norm_to(&e1).unwrap().norm().unwrap()));
    }
}

#[test]
fn cache_survives_a_trip_through_disk() {
    let module = DrinfeldModule::from_spec("carlitz", 2, 1, 1, 9).unwrap();
    let cache = TowerCache::build(&module, "carlitz", 1, 3, 6).unwrap();
    let path = std::env::temp_dir().join(format!("drinfeld-e2e-{}.cache", std::process::id()));
    cache.write(&path).unwrap();
    let back = TowerCache::read(&path).unwrap();
    std::fs::remove_file(&path).unwrap();
    assert_eq!(back.to_bytes(), cache.to_bytes());
    let restored = back.restore().unwrap();
    // separate instances of K, so compare the series themselves
    for expr in ["norm(1 + v3)", "trace(v3^-3)", "log(v2^3)", "trace(log(v2^3) / (t^2 * v2))"] {
        let a = evaluate(&restored, 3, 1, expr).unwrap();
        let b = evaluate(&module, 3, 1, expr).unwrap();
        let (Value::Element { x: a, .. }, Value::Element { x: b, .. }) = (a, b) else { panic!() };
        assert!(!a.repr().is_zero(), "{expr}");
        assert_eq!(a.repr(), b.repr(), "{expr}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn norm_is_multiplicative_and_trace_additive(seed in any::<u64>()) {
        let module = DrinfeldModule::carlitz(3, 1, 8).unwrap();
        let f = module.torsion_field(2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = FieldElement::random(&f, &mut rng, -1, false);
        let y = FieldElement::random(&f, &mut rng, 0, false);
        prop_assert!((&x * &y).norm().unwrap().eq_to_prec(&(&x.norm().unwrap() * &y.norm().unwrap())));
        prop_assert!((&x + &y).trace().unwrap().eq_to_prec(&(&x.trace().unwrap() + &y.trace().unwrap())));
    }

    #[test]
    fn admissible_units_have_integral_chi(seed in any::<u64>()) {
        let module = DrinfeldModule::carlitz(2, 1, 9).unwrap();
        let f = module.torsion_field(2).unwrap();
        let th = thresholds(&f, 2, 1, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = sample_unit(&f, &th.unit, &mut rng);
        prop_assert!(chi_via_norm(&module, 2, 2, &u).is_ok());
    }
}
