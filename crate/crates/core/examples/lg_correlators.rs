//! Landau-Ginzburg correlators of W = z^3/3 - z as sums over critical
//! points, by contours and by the exponential integral.

use virtual_residue::cycles::QuadratureSpec;
use virtual_residue::expr::parse;
use virtual_residue::koszul::residue_contour;
use virtual_residue::mq::{residue_mq, MqIntegrator};
use virtual_residue::oracles::{newton_critical_points, vafa_sum};
use virtual_residue::scene::{fermat_scene, lg_scene};
use virtual_residue::Complex64;

fn main() {
    let w = parse("z1^3/3 - z1", 1).unwrap();
    let seeds = [vec![Complex64::new(1.3, 0.1)], vec![Complex64::new(-1.2, -0.1)]];
    let crit = newton_critical_points(&w, 1, &seeds, 1e-13).unwrap();
    for p in &crit.points {
        println!("critical point {:.6}, hessian {:.3}", p.location.coords[0], p.hessian);
    }
    for f in ["1", "z1", "z1^2"] {
        let fe = parse(f, 1).unwrap();
        let zeros = crit.points.iter().map(|p| p.location.coords.clone()).collect();
        let sc = lg_scene("cubic", w.clone(), 1, fe.clone(), zeros).unwrap();
        let sum = vafa_sum(&sc, &fe, &crit.points).unwrap();
        let contour: Complex64 = crit.points.iter().map(|p| residue_contour(&sc, &p.location, &[0.5], &QuadratureSpec::new(32)).unwrap().value).sum();
        let mq = residue_mq(&sc, 1.0, &MqIntegrator::default_for(1)).unwrap();
        println!("<{f}>: sum {:.8}, contour {:.8}, exponential {:.8}", sum, contour, mq.value);
    }
    let fermat = fermat_scene(2, 3, parse("z1*z2", 2).unwrap());
    println!("{}: {} component(s)", fermat.name, fermat.components.len());
}
