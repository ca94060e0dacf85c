use super::*;
use crate::algebra::random::{random_form, random_point, Shape};
use crate::expr::parse;
use crate::scene::monomial_scene;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn q() -> QuadratureSpec {
    QuadratureSpec::new(24)
}

#[test]
fn cauchy_calibration_in_every_dimension() {
    for n in 1..=3 {
        let sc = monomial_scene(&vec![1; n], Expr::one());
        let r = residue_boundary(&sc, "p0", 1.0, &QuadratureSpec::new(12)).unwrap();
        assert!((r.value - c(1.0, 0.0)).norm() < 1e-10, "n={n}: {}", r.value);
    }
}

#[test]
fn first_chain_element_for_the_identity() {
    let sc = monomial_scene(&[1], Expr::one());
    let chain = beta_chain(&sc, 0).unwrap();
    let expect = TensorForm::term(1, Blade::from_indices(&[0], &[], &[], &[]), parse("-z1^-1", 1).unwrap());
    assert_eq!(chain.betas[0], expect);
}

fn ladder_holds(sc: &Scene, chart: usize) {
    let chain = beta_chain(sc, chart).unwrap();
    let defects = ladder_defects(sc, chart, &chain).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for d in &defects {
        if d.is_zero() {
            continue;
        }
        for _ in 0..50 {
            let z = random_point(&mut rng, sc.n, 1.5);
            assert!(d.max_abs_at(&z).unwrap() <= 1e-10, "{}", sc.name);
        }
    }
    let total = dbar_s(sc, chart, &chain.total()).unwrap().sub(&sc.weight_form(chart)).unwrap();
    for _ in 0..50 {
        let z = random_point(&mut rng, sc.n, 1.5);
        assert!(total.max_abs_at(&z).unwrap() <= 1e-10);
    }
}

#[test]
fn ladder_identities() {
    ladder_holds(&monomial_scene(&[3], parse("z1^2", 1).unwrap()), 0);
    ladder_holds(&monomial_scene(&[2, 1], parse("z1 + 3*z2", 2).unwrap()), 0);
    ladder_holds(&monomial_scene(&[1, 2, 2], parse("z1*z2*z3 - 2", 3).unwrap()), 0);
    let mixed = Scene::affine("mixed", vec![parse("z1 + z2^2", 2).unwrap(), parse("z2 - z1^2", 2).unwrap()], parse("1 + z1", 2).unwrap());
    ladder_holds(&mixed, 0);
    let plane = crate::scene::plane_example(0.3, [c(1.0, 0.0), c(2.0, 0.0), c(-1.0, 0.5)]);
    for chart in 0..3 {
        ladder_holds(&plane, chart);
    }
}

#[test]
fn boundary_examples() {
    let sc = monomial_scene(&[2, 4], parse("z1*z2^3", 2).unwrap());
    let r = residue_boundary(&sc, "p0", 1.0, &QuadratureSpec::new(24)).unwrap();
    assert!((r.value - c(1.0, 0.0)).norm() < 1e-9, "{}", r.value);
    let sc = monomial_scene(&[2, 4], parse("z1*z2^2", 2).unwrap());
    let r = residue_boundary(&sc, "p0", 1.0, &QuadratureSpec::new(24)).unwrap();
    assert!(r.value.norm() < 1e-9, "{}", r.value);
}

#[test]
fn contour_examples() {
    let origin = Point::new(0, vec![c(0.0, 0.0); 2]);
    let cases = [("z1; z2", "1", 1.0), ("z1^2; z2^2", "z1*z2", 1.0), ("z1^2; z2", "z1", 1.0), ("z1^2; z2", "1", 0.0), ("z2; z1", "1", -1.0), ("2*z1; 3*z2", "1", 1.0 / 6.0)];
    for (s, g, want) in cases {
        let sec: Vec<Expr> = s.split(';').map(|p| parse(p, 2).unwrap()).collect();
        let sc = Scene::affine("c", sec, parse(g, 2).unwrap());
        let r = residue_contour(&sc, &origin, &[1.0, 1.0], &QuadratureSpec::new(16)).unwrap();
        assert!((r.value - c(want, 0.0)).norm() < 1e-12, "{s} / {g}: {}", r.value);
    }
}

#[test]
fn contour_needs_a_separating_torus() {
    let sc = Scene::affine("c", vec![parse("z1 + z2", 2).unwrap(), parse("z1 - z2", 2).unwrap()], Expr::one());
    let origin = Point::new(0, vec![c(0.0, 0.0); 2]);
    assert!(residue_contour(&sc, &origin, &[1.0, 1.0], &q()).is_err());
    assert!(matches!(residue_contour(&sc, &origin, &[1.0, 0.5], &q()), Err(KoszulError::NotSeparating { .. })));
}

#[test]
fn batched_weights_match_single_runs() {
    let sc = monomial_scene(&[2, 3], Expr::one());
    let ws = vec![parse("z1*z2^2", 2).unwrap(), parse("1 + z1^2*z2^2", 2).unwrap(), parse("(2 - i)*z1*z2^2 + z2", 2).unwrap()];
    let batch = residue_boundary_batch(&sc, "p0", 1.0, &ws, &q()).unwrap();
    for (w, b) in ws.iter().zip(&batch) {
        let single = residue_boundary(&sc.clone().with_weight(0, w.clone()), "p0", 1.0, &q()).unwrap();
        assert!((single.value - b.value).norm() < 1e-12);
    }
    assert!((batch[2].value - c(2.0, -1.0)).norm() < 1e-9);
}

#[test]
fn radius_independence_on_monomials() {
    let sc = monomial_scene(&[2, 1], parse("z1", 2).unwrap());
    let chk = radius_independence(&sc, "p0", &[0.5, 1.0, 2.0], &QuadratureSpec::new(32)).unwrap();
    assert!(chk.max_deviation < 1e-8, "{chk:?}");
    assert!(chk.passed);
    let single = radius_independence(&sc, "p0", &[1.0], &q()).unwrap();
    assert_eq!(single.max_deviation, 0.0);
}

#[test]
fn plane_residues_sum_to_zero() {
    let ell = [c(1.0, 0.0), c(0.5, 0.0), c(-1.0, 2.0)];
    let sc = crate::scene::plane_example(0.3, ell);
    let mut total = c(0.0, 0.0);
    for comp in &sc.components {
        let p = comp.as_point().unwrap();
        let r = residue_contour_adapted(&sc, p, 0.05, &[sc.weight(p.chart).clone()], &q()).unwrap().remove(0);
        let b = residue_boundary(&sc, &comp.label, 0.1, &q()).unwrap();
        assert!((r.value - b.value).norm() < 1e-8, "{}: {} vs {}", comp.label, r.value, b.value);
        total += r.value;
    }
    assert!(total.norm() < 1e-8, "{total}");
}

#[test]
fn plane_line_residue_balances_the_point() {
    let ell = [c(1.0, 0.0), c(0.5, 0.0), c(-1.0, 2.0)];
    let sc = crate::scene::plane_example(0.0, ell);
    let p = sc.component("[1,0,0]").unwrap().as_point().unwrap().clone();
    let point = residue_contour(&sc, &p, &[0.2, 0.2], &q()).unwrap();
    assert!((point.value - c(1.0, 0.0)).norm() < 1e-10, "{}", point.value);
    let line = residue_boundary(&sc, "L0", 0.05, &QuadratureSpec::new(24)).unwrap();
    assert!((line.value + point.value).norm() < 1e-3, "{} vs {}", line.value, point.value);
}

#[test]
fn trace_examples() {
    let g = TensorForm::term(1, Blade::from_indices(&[0], &[0], &[], &[]), parse("exp(-z1*zb1)", 1).unwrap());
    let r = trace(&g, &[c(0.0, 0.0)], 7.0, &QuadratureSpec::new(32)).unwrap();
    assert!((r.value - c(0.0, -2.0 * PI)).norm() < 1e-10);
    let nothing = TensorForm::term(1, Blade::from_indices(&[0], &[], &[], &[]), Expr::one());
    assert_eq!(trace(&nothing, &[c(0.0, 0.0)], 1.0, &q()).unwrap().value, c(0.0, 0.0));
    assert_eq!(top_blade_measure(1), c(0.0, -2.0));
}

#[test]
fn trace_kills_dbar_exact_forms() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for n in 1..=2 {
        for _ in 0..3 {
            let gamma = random_form(&mut rng, n, Shape::exact(n as u32, n as u32 - 1, 0, 0), 3, false);
            let cut = CutoffFn::new(vec![c(0.2, -0.1); n], 0.6, 1.4).unwrap();
            let r = trace_with_cutoff(&cut, |rho| gamma.scale(rho).dbar(), &QuadratureSpec::new(16)).unwrap();
            assert!(r.value.norm() < 1e-8, "{}", r.value);
        }
    }
}

#[test]
fn cutoff_profile() {
    let cut = CutoffFn::new(vec![c(0.0, 0.0)], 1.0, 2.0).unwrap();
    assert_eq!(cut.value(&[c(0.5, 0.0)]), 1.0);
    assert_eq!(cut.value(&[c(0.0, 2.5)]), 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..50 {
        let z = random_point(&mut rng, 1, 2.5);
        let v = cut.value(&z);
        assert!((0.0..=1.0).contains(&v));
        let e = cut.expr(cut.region(&z)).eval(&z).unwrap();
        assert!((e.re - v).abs() < 1e-12 && e.im.abs() < 1e-12);
    }
    assert!(CutoffFn::new(vec![c(0.0, 0.0)], 2.0, 1.0).is_err());
}

#[test]
fn quasi_isomorphism_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for (n, sc) in [(1, monomial_scene(&[2], Expr::one())), (2, monomial_scene(&[1, 2], Expr::one()))] {
        let cut = CutoffFn::new(vec![c(0.0, 0.0); n], 0.8, 1.6).unwrap();
        for _ in 0..3 {
            let alpha = random_form(&mut rng, n, Shape::new(Some(n as u32), None, None, Some(0)), 3, false);
            let pts: Vec<Vec<Complex64>> = (0..12).map(|k| {
                let mut z = random_point(&mut rng, n, 1.0);
                let norm = z.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
                let target = 0.5 + 0.12 * k as f64;
                for a in &mut z {
                    *a *= target / norm;
                }
                z
            }).collect();
            let res = quasi_iso_check(&sc, 0, &alpha, &cut, &pts).unwrap();
            assert!(res <= 1e-8, "n={n}: {res}");
        }
    }
}
