//! The Koszul chain β_0..β_{n-1} of a section and the defects of the
//! ladder ∂̄β_k = ι_s β_{k+1}, evaluated away from the zero locus.

use virtual_residue::checks::{check_calibration, check_ladder, check_radius_independence};
use virtual_residue::expr::parse;
use virtual_residue::koszul::{beta_chain, ladder_defects};
use virtual_residue::scene::monomial_scene;
use virtual_residue::Complex64;

fn main() {
    let sc = monomial_scene(&[2, 1], parse("1 + z1*z2", 2).unwrap());
    let chain = beta_chain(&sc, 0).unwrap();
    for (k, b) in chain.betas.iter().enumerate() {
        println!("beta_{k}: {} terms", b.len());
    }
    let z = [Complex64::new(0.4, -0.3), Complex64::new(-0.2, 0.7)];
    for (k, d) in ladder_defects(&sc, 0, &chain).unwrap().iter().enumerate() {
        println!("defect {k}: max |coefficient| {:.2e}", d.max_abs_at(&z).unwrap());
    }
    for o in [check_ladder(1), check_calibration(), check_radius_independence()] {
        println!("{}", o.line());
    }
}
