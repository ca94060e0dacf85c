//! Acceptance run: one line per criterion with its verdict, the measured
//! discrepancy and the wall time. Exits non-zero if any criterion fails.

use num_complex::Complex64;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::{Duration, Instant};
use virtual_residue::checks::{algebra_suite, check_ladder, check_quasi_iso, check_trace_of_exact, mq_scenes, CheckOutcome};
use virtual_residue::cycles::{IntegralResult, MCSpec, QuadratureSpec};
use virtual_residue::expr::{parse, Expr, Point};
use virtual_residue::koszul::{radius_independence, residue_boundary, residue_boundary_batch, residue_contour, residue_contour_batch};
use virtual_residue::mq::{residue_mq, scaling_check, t_independence, MqIntegrator};
use virtual_residue::oracles::{coeff_oracle, newton_critical_points, vafa_sum};
use virtual_residue::scene::{lg_scene, monomial_scene, plane_example, Scene};

struct Verdict {
    passed: bool,
    detail: String,
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn exponent_vectors(max_n: usize, max_total: u32) -> Vec<Vec<u32>> {
    fn rec(n: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        let rest = (n - cur.len() - 1) as u32;
        for a in 1..=left.saturating_sub(rest) {
            cur.push(a);
            rec(n, left - a, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    for n in 1..=max_n {
        rec(n, max_total, &mut Vec::new(), &mut out);
    }
    out
}

const SEED: u64 = 20;

fn z_pow(a: &[u32], shift: i32) -> Expr {
    Expr::product(a.iter().enumerate().map(|(k, &ak)| Expr::z(k).powi(ak as i32 + shift)))
}

/// Sphere quadrature for `s = z^a`: two Gauss–Legendre panels per polar
/// angle and trapezoid nodes on the phases, exact for weights of degree at
/// most `a_k` in `z_k`.
fn sphere_q(a: &[u32]) -> QuadratureSpec {
    let nodes = if a.len() == 1 { 4 } else { 16 };
    QuadratureSpec::new(nodes).panels(2).periodic(a.iter().map(|&k| (k as usize + 2).max(4)).collect())
}

/// Random weight whose exponent in `z_k` never exceeds `a_k`.
fn random_weight(rng: &mut ChaCha8Rng, a: &[u32]) -> Expr {
    let terms = (0..6).map(|_| {
        let coeff = c(rng.random_range(-3..=3) as f64, rng.random_range(-3..=3) as f64);
        let mono = Expr::product(a.iter().enumerate().map(|(k, &ak)| Expr::z(k).powi(rng.random_range(0..=ak) as i32)));
        mono.scale(coeff)
    });
    Expr::sum(terms)
}

fn monomial_suite() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst_c: f64 = 0.0;
    let mut worst_b: f64 = 0.0;
    let mut count = 0;
    let mut failures = Vec::new();
    for a in exponent_vectors(3, 8) {
        let n = a.len();
        let weights: Vec<Expr> = (0..20).map(|_| random_weight(&mut rng, &a)).collect();
        let sc = monomial_scene(&a, Expr::one());
        let origin = Point::new(0, vec![c(0.0, 0.0); n]);
        let contour_q = QuadratureSpec::new(4).periodic(a.iter().map(|&k| (k as usize + 2).max(4)).collect());
        let contour = residue_contour_batch(&sc, &origin, &vec![1.0; n], &weights, &contour_q);
        let boundary = residue_boundary_batch(&sc, "p0", 1.0, &weights, &sphere_q(&a));
        let (Ok(contour), Ok(boundary)) = (contour, boundary) else {
            failures.push(format!("{a:?}: method error"));
            continue;
        };
        for (k, g) in weights.iter().enumerate() {
            let want = coeff_oracle(g, &a).expect("polynomial weight");
            let dc = (contour[k].value - want).norm();
            let db = (boundary[k].value - want).norm();
            worst_c = worst_c.max(dc);
            worst_b = worst_b.max(db);
            count += 1;
            if dc > 1e-7 || db > 1e-7 {
                failures.push(format!("{a:?} weight {k}: contour {dc:.2e}, boundary {db:.2e}"));
            }
        }
    }
    Verdict {
        passed: failures.is_empty(),
        detail: format!("{count} cases, worst contour {worst_c:.2e}, worst boundary {worst_b:.2e}{}", first(&failures)),
    }
}

fn first(failures: &[String]) -> String {
    match failures.first() {
        Some(f) => format!("; {} failing, first: {f}", failures.len()),
        None => String::new(),
    }
}

fn from_outcomes(outcomes: &[CheckOutcome]) -> Verdict {
    let parts: Vec<String> = outcomes.iter().map(|o| format!("{}: {} cases, {} failures, worst {:.2e}", o.name, o.cases, o.failures, o.worst)).collect();
    Verdict { passed: outcomes.iter().all(|o| o.passed()), detail: parts.join("; ") }
}

fn origin(n: usize) -> Point {
    Point::new(0, vec![c(0.0, 0.0); n])
}

fn cauchy() -> Verdict {
    let sc = monomial_scene(&[1], Expr::one());
    match residue_contour(&sc, &origin(1), &[1.0], &QuadratureSpec::new(16)) {
        Ok(r) => {
            let d = (r.value - c(1.0, 0.0)).norm();
            Verdict { passed: d <= 1e-10, detail: format!("residue {:.15}, error {d:.2e}", r.value) }
        }
        Err(e) => Verdict { passed: false, detail: e.to_string() },
    }
}

fn ladder() -> Verdict {
    from_outcomes(&[check_ladder(SEED)])
}

fn radius_independence_suite() -> Verdict {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    let mut failures = Vec::new();
    for a in exponent_vectors(3, 8) {
        let sc = monomial_scene(&a, Expr::sum([z_pow(&a, -1), Expr::one()]));
        match radius_independence(&sc, "p0", &[2.0, 1.0, 0.5], &sphere_q(&a)) {
            Ok(chk) => {
                count += 1;
                worst = worst.max(chk.max_deviation);
                if !chk.passed {
                    let est: Vec<String> = chk.values.iter().map(|v| format!("{:.1e}", v.error)).collect();
                    failures.push(format!("{a:?}: deviation {:.2e}, estimates {}", chk.max_deviation, est.join("/")));
                }
            }
            Err(e) => failures.push(format!("{a:?}: {e}")),
        }
    }
    Verdict { passed: failures.is_empty(), detail: format!("{count} scenes at radii 2, 1, 1/2, worst deviation {worst:.2e}{}", first(&failures)) }
}

/// Sections `z^a` in one and two variables.
fn mq_cases() -> Vec<Scene> {
    let mut out = Vec::new();
    for a in [vec![1], vec![2], vec![3]] {
        out.push(monomial_scene(&a, z_pow(&a, -1)));
        out.push(monomial_scene(&a, Expr::sum([Expr::one(), Expr::z(0).scale(c(2.0, -1.0))])));
    }
    for a in [vec![1, 1], vec![2, 1], vec![2, 2]] {
        out.push(monomial_scene(&a, z_pow(&a, -1)));
    }
    out
}

fn integrator(n: usize) -> MqIntegrator {
    if n == 1 {
        MqIntegrator::default_for(1)
    } else {
        MqIntegrator::MonteCarlo(MCSpec::new(1_000_000, SEED))
    }
}

fn mq_vs_contour() -> Verdict {
    let mut worst_det: f64 = 0.0;
    let mut worst_sigma: f64 = 0.0;
    let mut failures = Vec::new();
    for sc in mq_cases() {
        let n = sc.n;
        let q = integrator(n);
        let r = (|| -> Result<(IntegralResult, IntegralResult), String> {
            let mq = residue_mq(&sc, 1.0, &q).map_err(|e| e.to_string())?;
            let contour = residue_contour(&sc, &origin(n), &vec![1.0; n], &QuadratureSpec::new(32)).map_err(|e| e.to_string())?;
            Ok((mq, contour))
        })();
        match r {
            Ok((mq, contour)) => {
                let d = (mq.value - contour.value).norm();
                let ok = if n == 1 {
                    worst_det = worst_det.max(d);
                    d <= 1e-6
                } else {
                    let sigma = mq.error.hypot(contour.error);
                    worst_sigma = worst_sigma.max(d / sigma);
                    d <= 3.0 * sigma
                };
                if !ok {
                    failures.push(format!("{}: mq {:.8} vs contour {:.8}, stderr {:.1e}", sc.name, mq.value, contour.value, mq.error));
                }
            }
            Err(e) => failures.push(format!("{}: {e}", sc.name)),
        }
    }
    Verdict {
        passed: failures.is_empty(),
        detail: format!("n=1 worst {worst_det:.2e}, n=2 worst {worst_sigma:.2} stderr{}", first(&failures)),
    }
}

fn eligible_scenes() -> Vec<Scene> {
    let mut out = mq_cases();
    out.extend(mq_scenes());
    out
}

fn t_constancy() -> Verdict {
    let mut worst: f64 = 0.0;
    let mut failures = Vec::new();
    let scenes = eligible_scenes();
    for sc in &scenes {
        match t_independence(sc, &[0.5, 1.0, 2.0], &integrator(sc.n)) {
            Ok(chk) => {
                worst = worst.max(chk.max_deviation);
                if !chk.passed {
                    failures.push(format!("{}: deviation {:.2e}", sc.name, chk.max_deviation));
                }
            }
            Err(e) => failures.push(format!("{}: {e}", sc.name)),
        }
    }
    Verdict { passed: failures.is_empty(), detail: format!("{} scenes, worst deviation {worst:.2e}{}", scenes.len(), first(&failures)) }
}

fn scaling() -> Verdict {
    let mut worst: f64 = 0.0;
    let mut failures = Vec::new();
    let scenes = eligible_scenes();
    for sc in &scenes {
        for t in [2.0, 3.0] {
            match scaling_check(sc, t, &integrator(sc.n)) {
                Ok(chk) => {
                    worst = worst.max(chk.difference / chk.tolerance);
                    if !chk.passed {
                        failures.push(format!("{} at t={t}: difference {:.2e} > {:.2e}", sc.name, chk.difference, chk.tolerance));
                    }
                }
                Err(e) => failures.push(format!("{} at t={t}: {e}", sc.name)),
            }
        }
    }
    Verdict { passed: failures.is_empty(), detail: format!("{} scenes, worst difference/tolerance {worst:.2}{}", scenes.len(), first(&failures)) }
}

fn vafa() -> Verdict {
    let w = parse("z1^3/3 - z1", 1).expect("valid superpotential");
    let pts = match newton_critical_points(&w, 1, &[vec![c(1.3, 0.1)], vec![c(-1.2, -0.1)]], 1e-13) {
        Ok(r) => r.points,
        Err(e) => return Verdict { passed: false, detail: e.to_string() },
    };
    let mut failures = Vec::new();
    let mut values = Vec::new();
    let mut worst: f64 = 0.0;
    for (f, want) in [("1", 0.0), ("z1", 1.0), ("z1^2", 0.0)] {
        let r = (|| -> Result<[Complex64; 3], String> {
            let fexpr = parse(f, 1).map_err(|e| e.to_string())?;
            let zeros = pts.iter().map(|q| q.location.coords.clone()).collect();
            let sc = lg_scene("cubic", w.clone(), 1, fexpr.clone(), zeros).map_err(|e| e.to_string())?;
            let sum = vafa_sum(&sc, &fexpr, &pts).map_err(|e| e.to_string())?;
            let mut contour = c(0.0, 0.0);
            for q in &pts {
                contour += residue_contour(&sc, &q.location, &[0.5], &QuadratureSpec::new(32)).map_err(|e| e.to_string())?.value;
            }
            let mq = residue_mq(&sc, 1.0, &MqIntegrator::default_for(1)).map_err(|e| e.to_string())?.value;
            Ok([sum, contour, mq])
        })();
        match r {
            Ok(v) => {
                let d = [(v[0] - v[1]).norm(), (v[1] - v[2]).norm(), (v[0] - v[2]).norm(), (v[0] - c(want, 0.0)).norm()].into_iter().fold(0.0, f64::max);
                worst = worst.max(d);
                values.push(format!("{:.6}", v[2].re));
                if d > 1e-6 {
                    failures.push(format!("f={f}: vafa {:.8}, contour {:.8}, mq {:.8}", v[0], v[1], v[2]));
                }
            }
            Err(e) => failures.push(format!("f={f}: {e}")),
        }
    }
    Verdict { passed: failures.is_empty(), detail: format!("values {{{}}}, worst spread {worst:.2e}{}", values.join(", "), first(&failures)) }
}

const PLANE_ELL: [Complex64; 3] = [Complex64::new(1.0, 0.0), Complex64::new(0.5, 0.0), Complex64::new(-1.0, 2.0)];

fn plane_sum() -> Verdict {
    let sc = plane_example(0.3, PLANE_ELL);
    let mut total = c(0.0, 0.0);
    let mut parts = Vec::new();
    for comp in &sc.components {
        match residue_boundary(&sc, &comp.label, 0.1, &QuadratureSpec::new(24)) {
            Ok(r) => {
                total += r.value;
                parts.push(format!("{} {:.6}", comp.label, r.value));
            }
            Err(e) => return Verdict { passed: false, detail: format!("{}: {e}", comp.label) },
        }
    }
    Verdict { passed: parts.len() == 4 && total.norm() <= 1e-6, detail: format!("{}; |sum| {:.2e}", parts.join(", "), total.norm()) }
}

fn plane_line() -> Verdict {
    let sc = plane_example(0.0, PLANE_ELL);
    let r = (|| -> Result<Verdict, String> {
        let p = sc.component("[1,0,0]").and_then(|c| c.as_point()).ok_or("no point [1,0,0]")?.clone();
        let point = residue_contour(&sc, &p, &[0.2, 0.2], &QuadratureSpec::new(24)).map_err(|e| e.to_string())?;
        let chk = radius_independence(&sc, "L0", &[0.05, 0.025], &QuadratureSpec::new(24)).map_err(|e| e.to_string())?;
        let line = &chk.values[0];
        let d = (line.value + point.value).norm();
        Ok(Verdict {
            passed: d <= 1e-3 && chk.passed,
            detail: format!(
                "point {:.8}, tube {:.8} (est {:.1e}), |tube + point| {d:.2e}; eps 0.025 tube {:.8} (est {:.1e}), deviation {:.2e}",
                point.value, line.value, line.error, chk.values[1].value, chk.values[1].error, chk.max_deviation
            ),
        })
    })();
    r.unwrap_or_else(|e| Verdict { passed: false, detail: e })
}

fn operator_identity() -> Verdict {
    from_outcomes(&[check_quasi_iso(SEED, 20), check_trace_of_exact(SEED, 10)])
}

fn appendix_lemmas() -> Verdict {
    from_outcomes(&algebra_suite(SEED, 200))
}

type Criterion = (u32, &'static str, Option<Duration>, fn() -> Verdict);

fn main() {
    let secs = |s| Some(Duration::from_secs(s));
    let criteria: Vec<Criterion> = vec![
        (1, "cauchy calibration", secs(1), cauchy),
        (2, "monomial suite", secs(60), monomial_suite),
        (3, "koszul ladder", None, ladder),
        (4, "radius independence", None, radius_independence_suite),
        (5, "mq matches contour", secs(300), mq_vs_contour),
        (6, "mq constant in t", None, t_constancy),
        (7, "section scaling", None, scaling),
        (8, "landau-ginzburg correlators", None, vafa),
        (9, "plane point residues sum", None, plane_sum),
        (10, "plane tube residue", secs(600), plane_line),
        (11, "quasi-isomorphism and trace", None, operator_identity),
        (12, "operator lemmas", None, appendix_lemmas),
    ];
    let only: Vec<u32> = std::env::var("ACCEPTANCE_ONLY").ok().map(|v| v.split(',').filter_map(|x| x.trim().parse().ok()).collect()).unwrap_or_default();
    let mut all = true;
    for (id, name, limit, run) in criteria {
        if !only.is_empty() && !only.contains(&id) {
            continue;
        }
        let t0 = Instant::now();
        let v = run();
        let dt = t0.elapsed();
        let ok = v.passed && limit.is_none_or(|l| dt <= l);
        all &= ok;
        let budget = limit.map(|l| format!(" of {}s", l.as_secs())).unwrap_or_default();
        println!("criterion {id:>2} {name}: {} ({}; {:.1}s{budget})", if ok { "PASS" } else { "FAIL" }, v.detail, dt.as_secs_f64());
    }
    if !all {
        std::process::exit(1);
    }
}
