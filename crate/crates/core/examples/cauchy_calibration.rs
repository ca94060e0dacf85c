//! The residue of dz/z by a torus and by the Koszul boundary form.

use virtual_residue::cycles::QuadratureSpec;
use virtual_residue::expr::{Expr, Point};
use virtual_residue::koszul::{calibration_sign, residue_boundary, residue_contour};
use virtual_residue::scene::monomial_scene;
use virtual_residue::Complex64;

fn main() {
    for n in 1..=3 {
        let sc = monomial_scene(&vec![1; n], Expr::one());
        let origin = Point::new(0, vec![Complex64::new(0.0, 0.0); n]);
        let torus = residue_contour(&sc, &origin, &vec![1.0; n], &QuadratureSpec::new(16)).unwrap();
        let sphere = residue_boundary(&sc, "p0", 1.0, &QuadratureSpec::new(12)).unwrap();
        println!("n={n}: sign {:+}, torus {:.12} ± {:.1e}, sphere {:.12} ± {:.1e}", calibration_sign(n), torus.value, torus.error, sphere.value, sphere.error);
    }
}
