//! Residues of z^a against polynomial weights: the torus and sphere
//! integrals recover the coefficient of z^(a-1).

use virtual_residue::cycles::QuadratureSpec;
use virtual_residue::expr::{parse, Point};
use virtual_residue::koszul::{residue_boundary_batch, residue_contour_batch};
use virtual_residue::oracles::coeff_oracle;
use virtual_residue::scene::monomial_scene;
use virtual_residue::Complex64;

fn main() {
    let a = [2u32, 3];
    let weights: Vec<_> = ["z1*z2^2", "3 + z1*z2^2 - 2i*z1", "z2^2 + (1+i)*z1*z2^2"].iter().map(|w| parse(w, 2).unwrap()).collect();
    let sc = monomial_scene(&a, parse("1", 2).unwrap());
    let origin = Point::new(0, vec![Complex64::new(0.0, 0.0); 2]);
    let periodic: Vec<usize> = a.iter().map(|&k| (k as usize + 2).max(4)).collect();
    let torus = residue_contour_batch(&sc, &origin, &[1.0, 1.0], &weights, &QuadratureSpec::new(4).periodic(periodic.clone())).unwrap();
    let sphere = residue_boundary_batch(&sc, "p0", 1.0, &weights, &QuadratureSpec::new(16).panels(2).periodic(periodic)).unwrap();
    for (k, w) in weights.iter().enumerate() {
        let want = coeff_oracle(w, &a).unwrap();
        println!("weight {k}: coefficient {want:.3}, torus {:.12}, sphere {:.12}", torus[k].value, sphere[k].value);
    }
}
