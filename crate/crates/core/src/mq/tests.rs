use super::*;
use crate::expr::{parse, Expr};
use crate::scene::{lg_scene, monomial_scene};
use std::f64::consts::PI;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn sample_points(n: usize) -> Vec<Vec<Complex64>> {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
    (0..50).map(|_| crate::algebra::random::random_point(&mut rng, n, 1.5)).collect()
}

fn line() -> Scene {
    Scene::affine("z", vec![Expr::z(0)], Expr::one())
}

#[test]
fn exp_terms_for_the_line() {
    let e = exp_s(&line(), 2.0).unwrap();
    assert_eq!(e.terms.len(), 2);
    assert_eq!(e.terms[1], TensorForm::dzb(1, 0).wedge(&TensorForm::es(1, 0)).unwrap().neg());
    let g = e.gauss.eval(&[c(0.5, 0.5)]).unwrap();
    assert!((g - c((-1.0f64).exp(), 0.0)).norm() < 1e-15);
}

#[test]
fn exp_terms_are_wedge_powers() {
    let sc = Scene::affine("mix", vec![parse("z1^2 + z2", 2).unwrap(), parse("z1*z2 - 1", 2).unwrap()], Expr::z(0));
    let e = exp_s(&sc, 0.7).unwrap();
    let dxi = sc.xi(0).dbar();
    for k in 0..sc.n {
        let lhs = e.terms[k + 1].scale(&Expr::real((k + 1) as f64));
        let rhs = dxi.wedge(&e.terms[k]).unwrap();
        assert!(lhs.sub(&rhs).unwrap().is_zero() || max_abs(&lhs.sub(&rhs).unwrap(), &sample_points(2)).unwrap() < 1e-12);
    }
    let pts = sample_points(2);
    assert!(closedness_residual(&sc, &e, &pts).unwrap() <= 1e-10);
    let m = mq_integrand(&sc, 0.7).unwrap();
    assert!(integrand_closedness(&sc, &m, &pts).unwrap() <= 1e-10);
}

#[test]
fn zero_weight_gives_zero_integrand() {
    let sc = Scene::affine("z", vec![Expr::z(0)], Expr::zero());
    assert!(mq_integrand(&sc, 1.0).unwrap().full.is_zero());
}

#[test]
fn line_integral_and_residue() {
    let q = MqIntegrator::default_for(1);
    let m = mq_integrand(&line(), 1.0).unwrap();
    // Gaussian oracle: the density is a constant times e^{-|z|^2}
    let d0 = m.density().eval(&[c(0.0, 0.0)]).unwrap();
    assert!((d0 * PI - c(0.0, -2.0 * PI)).norm() < 1e-12);
    let raw = integral_mq(&line(), 1.0, &q).unwrap();
    assert!((raw.result.value - c(0.0, -2.0 * PI)).norm() < 1e-9, "{:?}", raw.result);
    assert!((raw.result.value * c(0.0, -1.0 / (2.0 * PI)) - c(-1.0, 0.0)).norm() < 1e-9);
    let r = residue_mq(&line(), 1.0, &q).unwrap();
    assert!((r.value - c(1.0, 0.0)).norm() < 1e-6);
}

#[test]
fn double_zero_residue() {
    let sc = Scene::affine("z^2", vec![parse("z1^2", 1).unwrap()], Expr::z(0));
    let r = residue_mq(&sc, 1.0, &MqIntegrator::default_for(1)).unwrap();
    assert!((r.value - c(1.0, 0.0)).norm() < 1e-4, "{}", r.value);
}

#[test]
fn plane_residue_by_monte_carlo() {
    let sc = monomial_scene(&[1, 1], Expr::one());
    let spec = MCSpec::new(1_000_000, 3);
    let r = residue_mq(&sc, 1.0, &MqIntegrator::MonteCarlo(spec)).unwrap();
    assert!((r.value - c(1.0, 0.0)).norm() < 1e-3, "{:?}", r);
}

#[test]
fn t_independence_on_the_line() {
    let q = MqIntegrator::default_for(1);
    let chk = t_independence(&line(), &[0.5, 1.0, 2.0], &q).unwrap();
    assert!(chk.max_deviation <= 2e-6 && chk.passed, "{chk:?}");
    for v in &chk.values {
        assert!((v.value - c(1.0, 0.0)).norm() < 1e-6);
    }
    assert_eq!(t_independence(&line(), &[1.0], &q).unwrap().max_deviation, 0.0);
    assert!(matches!(t_independence(&line(), &[1.0, 0.0], &q), Err(MqError::BadT(_))));
}

#[test]
fn scaling_on_the_line() {
    let q = MqIntegrator::default_for(1);
    let one = scaling_check(&line(), 1.0, &q).unwrap();
    assert_eq!(one.scaled.value, one.reference.value);
    let two = scaling_check(&line(), 2.0, &q).unwrap();
    let want = c(0.0, -2.0 * PI) * 0.5;
    assert!((two.scaled.value - want).norm() < 1e-5 && (two.reference.value - want).norm() < 1e-5, "{two:?}");
    assert!(two.passed);
    // the same number read as a residue of ψ/(2s)
    let half = Scene::affine("2z", vec![parse("2*z1", 1).unwrap()], Expr::one());
    let r = residue_mq(&half, 1.0, &q).unwrap();
    assert!((r.value - c(0.5, 0.0)).norm() < 1e-6);
}

#[test]
fn scaling_in_the_plane() {
    let sc = monomial_scene(&[1, 1], Expr::one());
    let q = MqIntegrator::MonteCarlo(MCSpec::new(64_000, 5));
    let chk = scaling_check(&sc, 3.0, &q).unwrap();
    assert!(chk.passed, "{chk:?}");
    let ratio = chk.scaled.value / (chk.reference.value * 9.0);
    assert!((ratio - c(1.0 / 9.0, 0.0)).norm() < 0.01, "{ratio}");
}

#[test]
fn superpotential_residues_match_critical_point_sum() {
    let w = parse("z1^3/3 - z1", 1).unwrap();
    for (f, want) in [("1", 0.0), ("z1", 1.0), ("z1^2", 0.0)] {
        let sc = lg_scene("cubic", w.clone(), 1, parse(f, 1).unwrap(), vec![vec![c(1.0, 0.0)], vec![c(-1.0, 0.0)]]).unwrap();
        let r = residue_mq(&sc, 1.0, &MqIntegrator::default_for(1)).unwrap();
        assert!((r.value - c(want, 0.0)).norm() < 1e-6, "{f}: {}", r.value);
    }
}

#[test]
fn decay_examples() {
    let sc = line();
    let radii = [1.0, 2.0, 4.0, 8.0];
    let orders = [-2, -1, 0, 1, 2];
    let gauss = TensorForm::scalar(1, sc.norm_sq_s(0).neg().exp());
    let rep = decay_probe(&gauss, &sc, &radii, &orders).unwrap();
    assert_eq!(rep.verdict, DecayVerdict::RapidlyDecreasing);
    for j in 0..orders.len() {
        assert!(rep.sups.windows(2).all(|w| w[1][j] < w[0][j]));
    }
    let rep = decay_probe(&sc.xi(0), &sc, &radii, &orders).unwrap();
    assert_eq!(rep.verdict, DecayVerdict::Tempered { order: 1 });
    let blowup = TensorForm::scalar(1, sc.norm_sq_s(0).exp());
    assert_eq!(decay_probe(&blowup, &sc, &radii, &orders).unwrap().verdict, DecayVerdict::Violation);
}

#[test]
fn growth_violation_is_rejected() {
    // s = z1 z2 vanishes along both axes
    let sc = Scene::affine("cross", vec![parse("z1*z2", 2).unwrap(), parse("z1*z2", 2).unwrap()], Expr::one());
    assert!(matches!(residue_mq(&sc, 1.0, &MqIntegrator::default_for(2)), Err(MqError::Growth(_))));
}

#[test]
fn tail_fit_is_finite() {
    let fit = tail_bound_fit(&monomial_scene(&[1, 2], Expr::one()), 1.0, 2.0).unwrap();
    assert!(fit.c1.is_finite() && fit.c1 > 0.0 && fit.mu.is_finite() && fit.samples > 100, "{fit:?}");
}
