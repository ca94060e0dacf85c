//! The exponential integral ∫ψ⌟e^{tS} against the contour residue, its
//! independence of t and its agreement with the rescaled section t·s.

use virtual_residue::cycles::{MCSpec, QuadratureSpec};
use virtual_residue::expr::{parse, Point};
use virtual_residue::koszul::residue_contour;
use virtual_residue::mq::{growth_constant, residue_mq, scaling_check, t_independence, MqIntegrator};
use virtual_residue::scene::monomial_scene;
use virtual_residue::Complex64;

fn main() {
    let sc = monomial_scene(&[3], parse("z1^2 + 2", 1).unwrap());
    let ball = MqIntegrator::default_for(1);
    let contour = residue_contour(&sc, &Point::new(0, vec![Complex64::new(0.0, 0.0)]), &[1.0], &QuadratureSpec::new(32)).unwrap();
    println!("growth constant {:.3}", growth_constant(&sc).unwrap());
    println!("contour {:.10}", contour.value);
    let chk = t_independence(&sc, &[0.5, 1.0, 2.0], &ball).unwrap();
    for (t, v) in chk.ts.iter().zip(&chk.values) {
        println!("e^(tS), t={t}: {:.10} ± {:.1e}", v.value, v.error);
    }
    let s = scaling_check(&sc, 2.0, &ball).unwrap();
    println!("section 2s against e^(2S): difference {:.1e} within {:.1e}: {}", s.difference, s.tolerance, s.passed);

    let sc2 = monomial_scene(&[2, 1], parse("z1", 2).unwrap());
    let mc = residue_mq(&sc2, 1.0, &MqIntegrator::MonteCarlo(MCSpec::new(200_000, 5))).unwrap();
    println!("n=2 monte carlo: {:.4} ± {:.1e} ({} samples)", mc.value, mc.error, mc.count);
}
