use super::*;
use proptest::prelude::*;

fn t_of(f: &TowerField) -> FieldElement {
    base_t(f).unwrap()
}

#[test]
fn carlitz_rho_of_t_squared() {
    let m = DrinfeldModule::carlitz(3, 1, 12).unwrap();
    let k = m.base().clone();
    let t = t_of(&k);
    let r = m.rho_of(&[0, 0, 1]).unwrap();
    assert_eq!(r.coeffs().len(), 3);
    assert!(r.coeffs()[0].eq_to_prec(&t.pow(2).unwrap()));
    assert!(r.coeffs()[1].eq_to_prec(&(&t + &t.pow(3).unwrap())));
    assert!(r.coeffs()[2].eq_to_prec(&FieldElement::one(&k)));
}

#[test]
fn carlitz_log_coefficients() {
    let m = DrinfeldModule::carlitz(2, 1, 30).unwrap();
    let k = m.base().clone();
    let t = t_of(&k);
    let lam = m.logarithm(3).unwrap();
    let c1 = (&t - &t.pow(2).unwrap()).inv().unwrap();
    let c2 = c1.div(&(&t - &t.pow(4).unwrap())).unwrap();
    assert!(lam.coeffs()[0].eq_to_prec(&FieldElement::one(&k)));
    assert!(lam.coeffs()[1].eq_to_prec(&c1));
    assert!(lam.coeffs()[2].eq_to_prec(&c2));
    for (i, c) in lam.coeffs().iter().enumerate() {
        assert!(c.int_valuation().unwrap() >= -(i as i64));
    }
}

#[test]
fn log_intertwines_rho_t() {
    for spec in ["carlitz", r#"custom(rho_t = "t + (1+t)*tau + t*tau^2")"#] {
        let m = DrinfeldModule::from_spec(spec, 3, 1, 1, 20).unwrap();
        let k = m.base().clone();
        let lam = m.logarithm(4).unwrap();
        assert!(lam.coeffs()[0].eq_to_prec(&FieldElement::one(&k)));
        let lhs = lam.mul(m.rho_t()).unwrap();
        let rhs = lam.scale_left(&t_of(&k));
        for i in 0..=4 {
            let (a, b) = (lhs.coeff(i).unwrap(), rhs.coeff(i).unwrap());
            assert!(a.eq_to_prec(&b), "{spec} tau^{i}");
        }
    }
}

#[test]
fn level_one_polynomial_q3() {
    let m = DrinfeldModule::carlitz(3, 1, 20).unwrap();
    let poly = m.level_polynomial(1).unwrap();
    let k = m.base().clone();
    assert_eq!(poly.len(), 3);
    assert!(poly[0].eq_to_prec(&t_of(&k)));
    assert!(poly[1].is_zero());
    let e1 = m.torsion_field(1).unwrap();
    assert_eq!(e1.e(), 2);
    let v = m.generator(1).unwrap();
    assert!(m.act(&[0, 1], &v).unwrap().is_zero());
}

#[test]
fn q2_levels() {
    let m = DrinfeldModule::carlitz(2, 1, 20).unwrap();
    assert_eq!(m.torsion_field(1).unwrap().e(), 1);
    let poly = m.level_polynomial(2).unwrap();
    let e1 = m.torsion_field(1).unwrap();
    let t = t_of(&e1);
    assert!(poly[0].eq_to_prec(&t));
    assert!(poly[1].eq_to_prec(&t));
    assert_eq!(m.torsion_field(2).unwrap().e(), 2);
    assert_eq!(m.torsion_field(3).unwrap().e(), 4);
}

#[test]
fn torsion_points_are_killed() {
    let m = DrinfeldModule::carlitz(3, 1, 12).unwrap();
    let pts = m.torsion_points(2).unwrap();
    assert_eq!(pts.len(), 9);
    for (_, w) in &pts {
        let z = m.act(&[0, 0, 1], w).unwrap();
        assert!(z.is_zero(), "{}", z.format("v"));
    }
    // rho_t of a level-2 point lands in level 1
    let w = m.point(2, &[1]).unwrap();
    let low = m.act(&[0, 1], &w).unwrap();
    let v1 = m.generator(1).unwrap().embed(w.field()).unwrap();
    assert!(low.eq_to_prec(&v1));
}

#[test]
fn r_for_carlitz_is_one() {
    for (p, n) in [(2, 2), (3, 1), (3, 2)] {
        let m = DrinfeldModule::carlitz(p, 1, 16).unwrap();
        let r = m.compute_r(n, 4).unwrap();
        assert!(r.eq_to_prec(&TwistedSeries::one(m.base())), "q={p} n={n}");
    }
}

#[test]
fn r_for_unit_twist() {
    let m = DrinfeldModule::from_spec(r#"custom(rho_t = "t + (1+t)*tau")"#, 3, 1, 1, 16).unwrap();
    let r = m.compute_r(1, 4).unwrap();
    let k = m.base().clone();
    let expect = (&FieldElement::one(&k) + &t_of(&k)).inv().unwrap();
    assert!(r.coeffs()[0].eq_to_prec(&expect));
    assert!(r.coeffs()[1..].iter().all(|c| c.is_zero()));
}

#[test]
fn non_unit_lead_is_rejected() {
    let m = DrinfeldModule::from_spec(r#"custom(rho_t = "t + tau + t*tau^2")"#, 3, 1, 1, 12).unwrap();
    assert!(matches!(m.torsion_field(1), Err(Error::Domain(_))));
}

#[test]
fn oracle_matches_tower_trace_and_norm() {
    let m = DrinfeldModule::carlitz(3, 1, 12).unwrap();
    let v = m.generator(2).unwrap();
    let x = &(&v + &v.pow(3).unwrap()) + &FieldElement::one(v.field());
    let tr = m.galois_oracle(&x, 2, Symmetric::Trace).unwrap();
    let nm = m.galois_oracle(&x, 2, Symmetric::Norm).unwrap();
    assert!(tr.eq_to_prec(&x.trace().unwrap()));
    assert!(nm.eq_to_prec(&x.norm().unwrap()));
}

#[test]
fn constant_twist_is_direct() {
    let m = DrinfeldModule::carlitz(3, 1, 12).unwrap();
    let k = m.base().clone();
    let c = &FieldElement::one(&k) + &t_of(&k);
    let tw = m.twist(&TwistedSeries::constant(&c), 4).unwrap();
    assert!(!tw.is_twisted());
    assert_eq!(tw.torsion_field(1).unwrap().e(), 2);
    assert!(m.twist(&TwistedSeries::constant(&t_of(&k)), 4).is_err());
}

#[test]
fn transported_twist_tower() {
    let m = DrinfeldModule::carlitz(3, 1, 12).unwrap();
    let k = m.base().clone();
    let r = parse_twisted("1 + t*tau", &k).unwrap();
    let tw = m.twist(&r, 12).unwrap();
    assert!(tw.is_twisted());
    for n in 1..=2 {
        let f = tw.torsion_field(n).unwrap();
        assert_eq!(f.e(), m.torsion_field(n).unwrap().e());
        let v = tw.generator(n).unwrap();
        // rho'_t(v'_1) = 0 and rho'_t(v'_2) = v'_1
        let img = tw.act(&[0, 1], &v).unwrap();
        let want = tw.generator(n - 1).unwrap().embed(&f).unwrap();
        assert!(img.eq_to_prec(&want), "level {n}: {}", (&img - &want).format("v"));
        // v'_n = r(v_n)
        let old = m.generator(n).unwrap();
        let moved = tw.from_parent(n, &r.evaluate(&old, CoeffBound::Integral).unwrap()).unwrap();
        assert!(moved.eq_to_prec(&v));
    }
    // traces agree through the transport
    let x = m.generator(2).unwrap().pow(2).unwrap();
    let y = tw.from_parent(2, &x).unwrap();
    assert!(x.trace().unwrap().eq_to_prec(&y.trace().unwrap()));
    assert!(x.norm().unwrap().eq_to_prec(&y.norm().unwrap()));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn rho_is_a_ring_map(a in proptest::collection::vec(0u32..3, 0..4), b in proptest::collection::vec(0u32..3, 0..4)) {
        let m = DrinfeldModule::carlitz(3, 1, 10).unwrap();
        let f = m.base().residue().clone();
        let mut sum = vec![0u32; a.len().max(b.len())];
        let mut prod = vec![0u32; a.len() + b.len()];
        for (i, &x) in a.iter().enumerate() {
            sum[i] = f.add(sum[i], x);
            for (j, &y) in b.iter().enumerate() {
                prod[i + j] = f.add(prod[i + j], f.mul(x, y));
            }
        }
        for (i, &y) in b.iter().enumerate() {
            sum[i] = f.add(sum[i], y);
        }
        let (ra, rb) = (m.rho_of(&a).unwrap(), m.rho_of(&b).unwrap());
        prop_assert!(ra.add(&rb).unwrap().eq_to_prec(&m.rho_of(&sum).unwrap()));
        prop_assert!(ra.mul(&rb).unwrap().eq_to_prec(&m.rho_of(&prod).unwrap()));
    }

    #[test]
    fn points_form_a_module(a in proptest::collection::vec(0u32..3, 2), b in proptest::collection::vec(0u32..3, 2)) {
        let m = DrinfeldModule::carlitz(3, 1, 10).unwrap();
        let f = m.base().residue().clone();
        let s: Vec<u32> = a.iter().zip(&b).map(|(&x, &y)| f.add(x, y)).collect();
        let pa = m.point(2, &a).unwrap();
        let pb = m.point(2, &b).unwrap();
        prop_assert!((&pa + &pb).eq_to_prec(&m.point(2, &s).unwrap()));
        // rho_b(rho_a(v)) is rho_(ab)(v)
        let ab = m.act(&b, &pa).unwrap();
        let prod = [f.mul(a[0], b[0]), f.add(f.mul(a[0], b[1]), f.mul(a[1], b[0]))];
        prop_assert!(ab.eq_to_prec(&m.point(2, &prod).unwrap()));
    }
}
