use super::*;
use crate::algebra::{random::random_point, TensorForm};
use crate::expr::parse;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[test]
fn lg_examples() {
    let w = parse("z1^3/3 - z1", 1).unwrap();
    let sc = lg_scene("cubic", w, 1, Expr::one(), vec![vec![c(1.0, 0.0)], vec![c(-1.0, 0.0)]]).unwrap();
    assert_eq!(sc.section(0)[0], parse("z1^2 - 1", 1).unwrap());
    sc.validate().unwrap();
    let q = lg_scene("quad", parse("z1^2/2", 1).unwrap(), 1, Expr::one(), vec![vec![c(0.0, 0.0)]]).unwrap();
    assert_eq!(q.section(0)[0], Expr::z(0));
    let f = fermat_scene(2, 5, Expr::one());
    assert_eq!(f.section(0).to_vec(), vec![Expr::z(0).powi(4), Expr::z(1).powi(4)]);
    f.validate().unwrap();
    assert!(lg_scene("bad", parse("z1*zb1", 1).unwrap(), 1, Expr::one(), vec![]).is_err());
}

#[test]
fn xi_examples() {
    let sc = monomial_scene(&[1], Expr::one());
    assert_eq!(sc.xi(0), TensorForm::es(1, 0).scale(&Expr::zb(0)).neg());
    let d = Scene::affine("diag", vec![Expr::z(0), Expr::z(1)], Expr::one()).with_metric(0, HermitianMetric::diagonal(&[2.0, 1.0]));
    let expect = TensorForm::cosection(&[Expr::zb(0).scale(c(-2.0, 0.0)), Expr::zb(1).neg()]);
    assert_eq!(d.xi(0), expect);
    // <s, ξ> = -|s|² exactly for constant metrics
    for sc in [monomial_scene(&[2, 3], Expr::one()), d] {
        let p = sc.section_form(0).pairing(&sc.xi(0)).unwrap();
        assert_eq!(p, TensorForm::scalar(2, sc.norm_sq_s(0).neg()));
    }
}

#[test]
fn s_bar_examples() {
    let sc = monomial_scene(&[1], Expr::one());
    let sb = sc.s_bar(0);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let z = random_point(&mut rng, 1, 2.0);
        let v = sb.coeff(crate::algebra::Blade::generator(crate::algebra::Family::Es, 0)).eval(&z).unwrap();
        assert!((v - z[0].inv()).norm() < 1e-12);
    }
    assert!(sb.max_abs_at(&[c(0.0, 0.0)]).is_err());
    let s2 = Scene::affine("id2", vec![Expr::z(0), Expr::z(1)], Expr::one());
    let expect = TensorForm::cosection(&[Expr::zb(0), Expr::zb(1)]).scale(&parse("(z1*zb1 + z2*zb2)^-1", 2).unwrap());
    assert_eq!(s2.s_bar(0), expect);
}

#[test]
fn action_examples() {
    let sc = monomial_scene(&[1], Expr::one());
    let s = sc.action_s(0, 1.0);
    let dzb_es = crate::algebra::Blade::from_indices(&[], &[0], &[], &[0]);
    let expect = TensorForm::from_terms(1, [(crate::algebra::Blade::ONE, parse("-z1*zb1", 1).unwrap()), (dzb_es, Expr::real(-1.0))]);
    assert_eq!(s, expect);
    let s2 = sc.action_s(0, 2.0);
    let expect2 = TensorForm::from_terms(1, [(crate::algebra::Blade::ONE, parse("-4*z1*zb1", 1).unwrap()), (dzb_es, Expr::real(-2.0))]);
    assert_eq!(s2, expect2);
    // (∂̄ + ι_s) S = 0
    for sc in [monomial_scene(&[2, 1], Expr::one()), monomial_scene(&[1, 2, 2], Expr::one())] {
        let s = sc.action_s(0, 1.0);
        let closed = s.dbar().add(&TensorForm::iota_section(&sc.section_form(0), &s).unwrap()).unwrap();
        assert!(closed.is_zero(), "{closed}");
    }
}

#[test]
fn holomorphy_is_enforced() {
    let sc = Scene::affine("bad", vec![Expr::zb(0)], Expr::one());
    assert!(matches!(sc.validate(), Err(SceneError::NotHolomorphic { .. })));
    let sc = Scene::affine("bad", vec![Expr::z(0)], Expr::zb(0));
    assert!(matches!(sc.validate(), Err(SceneError::NotHolomorphic { .. })));
}

#[test]
fn declared_zeros_are_checked() {
    let sc = affine_scene("off", vec![Expr::z(0)], Expr::one(), vec![vec![c(0.5, 0.0)]]);
    assert!(matches!(sc.validate(), Err(SceneError::NotAZero { .. })));
}

#[test]
fn plane_scene_is_consistent_on_overlaps() {
    let ell = [c(1.0, 0.0), c(0.5, -0.25), c(-2.0, 1.0)];
    for t in [0.3, 0.0] {
        let sc = plane_example(t, ell);
        assert_eq!(sc.charts.len(), 3);
        assert_eq!(sc.transitions.len(), 6);
        sc.validate().unwrap();
    }
    // a weight with the wrong sign in one chart breaks consistency
    let mut sc = plane_example(0.3, ell);
    sc.data[1].weight = sc.data[1].weight.neg();
    assert!(matches!(sc.validate(), Err(SceneError::Overlap { .. })));
}

#[test]
fn growth_probe_examples() {
    let radii = [4.0, 8.0, 16.0, 32.0];
    let lin = Scene::affine("lin", vec![Expr::z(0), Expr::z(1)], Expr::one());
    let r = growth_probe(&lin, &radii).unwrap();
    assert!(r.passed());
    assert!((r.c0 - 16.0 / 17.0).abs() < 1e-9, "{}", r.c0);
    let sq = Scene::affine("sq", vec![Expr::z(0).powi(2), Expr::z(1).powi(2)], Expr::one());
    let r = growth_probe(&sq, &radii).unwrap();
    assert!(r.passed() && r.c0 > 1.0);
    let bad = Scene::affine("bad", vec![Expr::z(0).mul(&Expr::z(1)), Expr::z(1)], Expr::one());
    let r = growth_probe(&bad, &radii).unwrap();
    assert!(!r.passed());
}

#[test]
fn growth_probe_finds_narrow_valleys() {
    // |s| = 1 along z1 = -1, which no sampled direction hits exactly.
    let valley = Scene::affine("valley", vec![parse("z1", 2).unwrap(), parse("(1 + z1)*z2", 2).unwrap()], Expr::one());
    let r = growth_probe(&valley, &[4.0, 8.0, 16.0, 32.0]).unwrap();
    assert!(!r.passed(), "{:?}", r.shells);
    assert!(r.shells[3].infimum < 1.1 / (1.0 + 32.0 * 32.0), "{:?}", r.shells);
}
