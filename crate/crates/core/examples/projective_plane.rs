//! A section of O(2)+O(2) on the projective plane: point residues sum to
//! zero, and at t=0 a line of zeros absorbs the residue of a point.

use virtual_residue::cycles::QuadratureSpec;
use virtual_residue::koszul::{radius_independence, residue_boundary, residue_contour};
use virtual_residue::scene::plane_example;
use virtual_residue::Complex64;

fn main() {
    let ell = [Complex64::new(1.0, 0.0), Complex64::new(0.5, 0.0), Complex64::new(-1.0, 2.0)];
    let sc = plane_example(0.3, ell);
    let mut total = Complex64::new(0.0, 0.0);
    for comp in &sc.components {
        let r = residue_boundary(&sc, &comp.label, 0.1, &QuadratureSpec::new(24)).unwrap();
        println!("{:<10} {:.10} ± {:.1e}", comp.label, r.value, r.error);
        total += r.value;
    }
    println!("sum {:.2e}", total.norm());

    let sc = plane_example(0.0, ell);
    let p = sc.component("[1,0,0]").and_then(|c| c.as_point()).unwrap().clone();
    let point = residue_contour(&sc, &p, &[0.2, 0.2], &QuadratureSpec::new(24)).unwrap();
    let line = radius_independence(&sc, "L0", &[0.05, 0.025], &QuadratureSpec::new(24)).unwrap();
    println!("t=0: point {:.8}, line {:.8} and {:.8}", point.value, line.values[0].value, line.values[1].value);
}
