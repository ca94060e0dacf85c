use super::{dist, CheckOutcome, Tally};
use crate::algebra::random::{random_form, random_point, random_poly, Shape};
use crate::cycles::{MCSpec, QuadratureSpec};
use crate::expr::{parse, Expr, Point};
use crate::koszul::{
    beta_chain, dbar_s, ladder_defects, quasi_iso_check, radius_independence, residue_boundary, residue_contour, trace_with_cutoff, CutoffFn,
};
use crate::mq::{closedness_residual, exp_s, integrand_closedness, mq_integrand, residue_mq, scaling_check, t_independence, MqIntegrator};
use crate::oracles::{coeff_oracle, newton_critical_points, point_residue_nondegenerate, vafa_sum};
use crate::scene::{fermat_scene, lg_scene, monomial_scene, plane_example, Scene};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn p(text: &str, n: usize) -> Expr {
    parse(text, n).expect("built-in expression parses")
}

/// The scenes every structural invariant is checked on: monomial
/// sections up to dimension three, a non-monomial section, Landau–Ginzburg
/// gradients with simple and fat critical points, and the projective
/// plane example.
pub fn suite_scenes() -> Vec<Scene> {
    let mut out = vec![
        monomial_scene(&[1], Expr::one()),
        monomial_scene(&[2], Expr::z(0)),
        monomial_scene(&[3], p("1 + z1^2", 1)),
        monomial_scene(&[1, 1], Expr::one()),
        monomial_scene(&[2, 1], p("z1 + 3*z2", 2)),
        monomial_scene(&[2, 2], p("z1*z2", 2)),
        monomial_scene(&[1, 1, 1], Expr::one()),
        monomial_scene(&[1, 2, 2], p("z1*z2*z3 - 2", 3)),
        Scene::affine("mixed", vec![p("z1 + z2^2", 2), p("z2 - z1^2", 2)], p("1 + z1", 2)),
        lg_scene("cubic", p("z1^3/3 - z1", 1), 1, Expr::z(0), vec![vec![c(1.0, 0.0)], vec![c(-1.0, 0.0)]]).expect("holomorphic"),
        fermat_scene(2, 3, p("z1*z2", 2)),
    ];
    out.push(plane_example(0.3, [c(1.0, 0.0), c(2.0, 0.0), c(-1.0, 0.5)]));
    out
}

/// Random points away from the zeros of `s` on a chart.
fn regular_points(sc: &Scene, chart: usize, rng: &mut ChaCha8Rng, count: usize) -> Vec<Vec<Complex64>> {
    let s2 = sc.norm_sq_s(chart);
    let mut out = Vec::new();
    while out.len() < count {
        let z = random_point(rng, sc.n, 1.5);
        if s2.eval(&z).map(|v| v.re > 1e-4).unwrap_or(false) {
            out.push(z);
        }
    }
    out
}

fn seeded(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn koszul_suite(seed: u64) -> Vec<CheckOutcome> {
    vec![check_ladder(seed), check_calibration(), check_radius_independence(), check_quasi_iso(seed, 10), check_trace_of_exact(seed, 10), check_plane_sum()]
}

/// The ladder `s∧β_0 = ψ`, `s∧β_k + ∂̄β_{k−1} = 0`, `∂̄β_{n−1} = 0` and
/// `∂̄_s Σβ_k = ψ` at 50 points per scene and chart.
pub fn check_ladder(seed: u64) -> CheckOutcome {
    let mut rng = seeded(seed, 11);
    let mut t = Tally::new("koszul", "ladder");
    for sc in suite_scenes() {
        for chart in 0..sc.charts.len() {
            let r = (|| -> Result<f64, crate::koszul::KoszulError> {
                let chain = beta_chain(&sc, chart)?;
                let mut forms = ladder_defects(&sc, chart, &chain)?;
                forms.push(dbar_s(&sc, chart, &chain.total())?.sub(&sc.weight_form(chart))?);
                let mut worst: f64 = 0.0;
                for f in forms.iter().filter(|f| !f.is_zero()) {
                    for z in regular_points(&sc, chart, &mut rng, 50) {
                        worst = worst.max(f.max_abs_at(&z).unwrap_or(f64::INFINITY));
                    }
                }
                Ok(worst)
            })();
            match r {
                Ok(r) => t.record(r, 1e-10),
                Err(e) => t.fail(format!("{}: {e}", sc.name)),
            }
        }
    }
    t.note("per scene and chart, 50 points").done()
}

/// Boundary residue of `dz⊗e` against `s = z` in dimensions one to three.
pub fn check_calibration() -> CheckOutcome {
    let mut t = Tally::new("koszul", "calibration");
    for n in 1..=3 {
        match residue_boundary(&monomial_scene(&vec![1; n], Expr::one()), "p0", 1.0, &QuadratureSpec::new(12)) {
            Ok(r) => t.record(dist(r.value, c(1.0, 0.0)), 1e-10),
            Err(e) => t.fail(e),
        }
    }
    t.done()
}

pub fn check_radius_independence() -> CheckOutcome {
    let mut t = Tally::new("koszul", "radius-independence");
    for (a, g) in [(vec![2], "z1"), (vec![1, 2], "z2"), (vec![2, 2], "z1*z2 + 1")] {
        let sc = monomial_scene(&a, p(g, a.len()));
        match radius_independence(&sc, "p0", &[1.0, 0.5, 0.25], &QuadratureSpec::new(16)) {
            Ok(chk) => t.record(if chk.passed { chk.max_deviation } else { f64::INFINITY }, 1.0),
            Err(e) => t.fail(e),
        }
    }
    t.done()
}

/// `Id − ∂̄_s R_ρ − R_ρ ∂̄_s = T_ρ` on `forms` random forms in each of
/// dimensions one and two.
pub fn check_quasi_iso(seed: u64, forms: usize) -> CheckOutcome {
    let mut rng = seeded(seed, 13);
    let mut t = Tally::new("koszul", "quasi-iso");
    for (n, sc) in [(1, monomial_scene(&[2], Expr::one())), (2, monomial_scene(&[1, 2], Expr::one()))] {
        let cut = CutoffFn::new(vec![c(0.0, 0.0); n], 0.8, 1.6).expect("valid radii");
        for _ in 0..forms {
            let alpha = random_form(&mut rng, n, Shape::new(Some(n as u32), None, None, Some(0)), 3, false);
            let pts: Vec<Vec<Complex64>> = (0..12)
                .map(|k| {
                    let mut z = random_point(&mut rng, n, 1.0);
                    let norm = z.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
                    for a in &mut z {
                        *a *= (0.5 + 0.12 * k as f64) / norm;
                    }
                    z
                })
                .collect();
            match quasi_iso_check(&sc, 0, &alpha, &cut, &pts) {
                Ok(r) => t.record(r, 1e-8),
                Err(e) => t.fail(e),
            }
        }
    }
    t.done()
}

/// The trace kills `∂̄` of compactly supported forms.
pub fn check_trace_of_exact(seed: u64, count: usize) -> CheckOutcome {
    let mut rng = seeded(seed, 14);
    let mut t = Tally::new("koszul", "trace-of-exact");
    for k in 0..count {
        let n = 1 + k % 2;
        let gamma = random_form(&mut rng, n, Shape::exact(n as u32, n as u32 - 1, 0, 0), 3, false);
        let cut = CutoffFn::new(vec![c(0.2, -0.1); n], 0.6, 1.4).expect("valid radii");
        match trace_with_cutoff(&cut, |rho| gamma.scale(rho).dbar(), &QuadratureSpec::new(16)) {
            Ok(r) => t.record(r.value.norm(), 1e-8),
            Err(e) => t.fail(e),
        }
    }
    t.done()
}

/// Boundary residues at the four points of the plane example sum to zero.
pub fn check_plane_sum() -> CheckOutcome {
    let mut t = Tally::new("koszul", "plane-residue-sum");
    let plane = plane_example(0.3, [c(1.0, 0.0), c(2.0, 0.0), c(-1.0, 0.5)]);
    let mut total = c(0.0, 0.0);
    let mut ok = true;
    for comp in &plane.components {
        match residue_boundary(&plane, &comp.label, 0.1, &QuadratureSpec::new(24)) {
            Ok(r) => total += r.value,
            Err(e) => {
                t.fail(e);
                ok = false;
            }
        }
    }
    if ok {
        t.record(total.norm(), 1e-6);
    }
    t.done()
}

/// Suite scenes with a single chart and a usable growth bound.
pub fn mq_scenes() -> Vec<Scene> {
    suite_scenes().into_iter().filter(|s| s.is_affine() && crate::mq::growth_constant(s).is_ok()).collect()
}

pub fn mq_suite(seed: u64) -> Vec<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(12);
    let mut out = Vec::new();

    let mut t = Tally::new("mq", "closedness");
    for sc in mq_scenes() {
        let pts: Vec<Vec<Complex64>> = (0..50).map(|_| random_point(&mut rng, sc.n, 1.5)).collect();
        let r = (|| -> Result<f64, crate::mq::MqError> {
            let e = exp_s(&sc, 1.0)?;
            let m = mq_integrand(&sc, 1.0)?;
            Ok(closedness_residual(&sc, &e, &pts)?.max(integrand_closedness(&sc, &m, &pts)?))
        })();
        match r {
            Ok(r) => t.record(r, 1e-10),
            Err(e) => t.fail(format!("{}: {e}", sc.name)),
        }
    }
    out.push(t.done());

    let mut t = Tally::new("mq", "t-independence");
    for sc in mq_scenes() {
        let q = if sc.n == 1 { MqIntegrator::default_for(1) } else { MqIntegrator::MonteCarlo(MCSpec::new(64_000, seed)) };
        match t_independence(&sc, &[0.5, 1.0, 2.0], &q) {
            Ok(chk) => t.record(if chk.passed { chk.max_deviation } else { f64::INFINITY }, f64::MAX),
            Err(e) => t.fail(format!("{}: {e}", sc.name)),
        }
    }
    out.push(t.note("worst is the largest deviation among passing scenes").done());

    let mut t = Tally::new("mq", "scaling");
    for sc in mq_scenes() {
        for s in [2.0, 3.0] {
            let q = if sc.n == 1 { MqIntegrator::default_for(1) } else { MqIntegrator::MonteCarlo(MCSpec::new(64_000, seed)) };
            match scaling_check(&sc, s, &q) {
                Ok(chk) => t.record(if chk.passed { chk.difference } else { f64::INFINITY }, f64::MAX),
                Err(e) => t.fail(format!("{}: {e}", sc.name)),
            }
        }
    }
    out.push(t.done());

    let mut t = Tally::new("mq", "matches-contour");
    for sc in mq_scenes().into_iter().filter(|s| s.n == 1) {
        let r = (|| -> Result<f64, String> {
            let mq = residue_mq(&sc, 1.0, &MqIntegrator::default_for(1)).map_err(|e| e.to_string())?;
            let mut contour = c(0.0, 0.0);
            for (_, pt) in sc.point_components() {
                contour += residue_contour(&sc, pt, &[0.5], &QuadratureSpec::new(32)).map_err(|e| e.to_string())?.value;
            }
            Ok(dist(mq.value, contour))
        })();
        match r {
            Ok(r) => t.record(r, 1e-6),
            Err(e) => t.fail(format!("{}: {e}", sc.name)),
        }
    }
    out.push(t.done());
    out
}

pub fn oracles_suite() -> Vec<CheckOutcome> {
    let mut out = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(0x0c1e);

    let mut t = Tally::new("oracles", "coefficient-vs-contour");
    for a in [vec![1], vec![3], vec![5], vec![2, 1], vec![2, 3], vec![4, 4], vec![1, 2, 2], vec![3, 2, 3]] {
        let n = a.len();
        let g = random_poly(&mut rng, n, 6, 6, true);
        let sc = monomial_scene(&a, g.clone());
        let r = (|| -> Result<f64, String> {
            let want = coeff_oracle(&g, &a).map_err(|e| e.to_string())?;
            let got = residue_contour(&sc, &Point::new(0, vec![c(0.0, 0.0); n]), &vec![0.7; n], &QuadratureSpec::new(16)).map_err(|e| e.to_string())?;
            Ok(dist(want, got.value))
        })();
        match r {
            Ok(r) => t.record(r, 1e-8),
            Err(e) => t.fail(e),
        }
    }
    out.push(t.done());

    let mut t = Tally::new("oracles", "vafa-vs-contour");
    for (w, seeds) in [
        ("z1^3/3 - z1", vec![c(1.2, 0.0), c(-1.2, 0.0)]),
        ("z1^4/4 - z1", vec![c(1.1, 0.1), c(-0.6, 0.9), c(-0.6, -0.9)]),
    ] {
        let wexpr = p(w, 1);
        let pts = match newton_critical_points(&wexpr, 1, &seeds.iter().map(|s| vec![*s]).collect::<Vec<_>>(), 1e-13) {
            Ok(r) => r.points,
            Err(e) => {
                t.fail(e);
                continue;
            }
        };
        for f in ["1", "z1", "z1^2"] {
            let r = (|| -> Result<f64, String> {
                let zeros = pts.iter().map(|q| q.location.coords.clone()).collect();
                let sc = lg_scene(w, wexpr.clone(), 1, p(f, 1), zeros).map_err(|e| e.to_string())?;
                let want = vafa_sum(&sc, &p(f, 1), &pts).map_err(|e| e.to_string())?;
                let mut got = c(0.0, 0.0);
                for q in &pts {
                    got += residue_contour(&sc, &q.location, &[0.4], &QuadratureSpec::new(32)).map_err(|e| e.to_string())?.value;
                }
                Ok(dist(want, got))
            })();
            match r {
                Ok(r) => t.record(r, 1e-7),
                Err(e) => t.fail(e),
            }
        }
    }
    out.push(t.done());

    let mut t = Tally::new("oracles", "plane-point-sum");
    let plane = plane_example(0.3, [c(1.0, 0.0), c(0.5, 0.0), c(-1.0, 2.0)]);
    let total: Result<Complex64, _> = plane.point_components().map(|(_, q)| point_residue_nondegenerate(&plane, q)).sum();
    match total {
        Ok(v) => t.record(v.norm(), 1e-7),
        Err(e) => t.fail(e),
    }
    out.push(t.done());

    let mut t = Tally::new("oracles", "newton-examples");
    let cases: [(&str, f64, Option<f64>); 3] = [("z1^3/3 - z1", 1.2, Some(2.0)), ("z1^2/2", 0.5, Some(1.0)), ("z1^5/5", 0.1, None)];
    for (w, seed, h) in cases {
        match newton_critical_points(&p(w, 1), 1, &[vec![c(seed, 0.0)]], 1e-12) {
            Ok(r) if r.points.len() == 1 => {
                let cp = &r.points[0];
                match h {
                    Some(h) => t.record(dist(cp.hessian, c(h, 0.0)), 1e-10),
                    None => t.record(if cp.nondegenerate { 1.0 } else { 0.0 }, 0.0),
                }
            }
            Ok(r) => t.fail(format!("{w}: {} points", r.points.len())),
            Err(e) => t.fail(e),
        }
    }
    out.push(t.done());
    out
}
