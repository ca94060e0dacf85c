use super::*;
use crate::expr::parse;
use crate::scene::{lg_scene, plane_example, Scene};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[test]
fn coefficient_examples() {
    assert_eq!(coeff_oracle(&parse("z1*z2^3", 2).unwrap(), &[2, 4]).unwrap(), c(1.0, 0.0));
    assert_eq!(coeff_oracle(&Expr::one(), &[1, 1]).unwrap(), c(1.0, 0.0));
    assert_eq!(coeff_oracle(&parse("z1^2", 2).unwrap(), &[2, 1]).unwrap(), c(0.0, 0.0));
    assert_eq!(coeff_oracle(&parse("3*z1 + (2-i)*z1*z2 - z2^5", 2).unwrap(), &[2, 2]).unwrap(), c(2.0, -1.0));
    assert!(coeff_oracle(&parse("zb1", 1).unwrap(), &[1]).is_err());
    assert!(coeff_oracle(&parse("z1^-1", 1).unwrap(), &[1]).is_err());
}

#[test]
fn newton_examples() {
    let w = parse("z1^3/3 - z1", 1).unwrap();
    let r = newton_critical_points(&w, 1, &[vec![c(1.2, 0.0)], vec![c(-1.2, 0.0)], vec![c(0.9, 0.1)]], 1e-12).unwrap();
    assert_eq!(r.points.len(), 2);
    let mut hs: Vec<f64> = r.points.iter().map(|p| p.hessian.re).collect();
    hs.sort_by(f64::total_cmp);
    assert!((hs[0] + 2.0).abs() < 1e-10 && (hs[1] - 2.0).abs() < 1e-10);
    let r = newton_critical_points(&parse("z1^2/2", 1).unwrap(), 1, &[vec![c(0.5, 0.0)]], 1e-12).unwrap();
    assert!(r.points[0].location.coords[0].norm() < 1e-12 && (r.points[0].hessian - 1.0).norm() < 1e-12);
    let r = newton_critical_points(&parse("z1^5/5", 1).unwrap(), 1, &[vec![c(0.1, 0.0)]], 1e-10).unwrap();
    assert_eq!(r.points.len(), 1);
    assert!(!r.points[0].nondegenerate);
    // no critical point at all
    let r = newton_critical_points(&parse("z1", 1).unwrap(), 1, &[vec![c(0.1, 0.0)]], 1e-10).unwrap();
    assert!(r.points.is_empty() && r.warnings.len() == 1);
}

#[test]
fn vafa_examples() {
    let w = parse("z1^3/3 - z1", 1).unwrap();
    let sc = lg_scene("cubic", w.clone(), 1, Expr::one(), vec![]).unwrap();
    let pts = newton_critical_points(&w, 1, &[vec![c(1.2, 0.0)], vec![c(-1.2, 0.0)]], 1e-13).unwrap().points;
    for (f, want) in [("1", 0.0), ("z1", 1.0), ("z1^2", 0.0)] {
        let v = vafa_sum(&sc, &parse(f, 1).unwrap(), &pts).unwrap();
        assert!((v - c(want, 0.0)).norm() < 1e-12, "{f}: {v}");
    }
    let flat = lg_scene("quintic", parse("z1^5/5", 1).unwrap(), 1, Expr::one(), vec![]).unwrap();
    let deg = newton_critical_points(&parse("z1^5/5", 1).unwrap(), 1, &[vec![c(0.1, 0.0)]], 1e-10).unwrap().points;
    assert!(matches!(vafa_sum(&flat, &Expr::one(), &deg), Err(OracleError::Degenerate { .. })));
}

#[test]
fn nondegenerate_point_residues() {
    let origin = Point::new(0, vec![c(0.0, 0.0); 2]);
    let sc = Scene::affine("id", vec![Expr::z(0), Expr::z(1)], Expr::one());
    assert_eq!(point_residue_nondegenerate(&sc, &origin).unwrap(), c(1.0, 0.0));
    let sc = Scene::affine("diag", vec![parse("2*z1", 2).unwrap(), parse("3*z2", 2).unwrap()], Expr::one());
    assert!((point_residue_nondegenerate(&sc, &origin).unwrap() - c(1.0 / 6.0, 0.0)).norm() < 1e-15);
    let plane = plane_example(0.3, [c(1.0, 0.0), c(0.5, 0.0), c(-1.0, 2.0)]);
    let total: Complex64 = plane.point_components().map(|(_, p)| point_residue_nondegenerate(&plane, p).unwrap()).sum();
    assert!(total.norm() < 1e-12, "{total}");
    let fat = Scene::affine("fat", vec![parse("z1^2", 1).unwrap()], Expr::one());
    assert!(point_residue_nondegenerate(&fat, &Point::new(0, vec![c(0.0, 0.0)])).is_err());
}
