use super::{CheckOutcome, Tally};
use crate::algebra::random::{random_form, random_point, random_section, Shape};
use crate::algebra::{norm_sq, HermitianMetric, TensorForm};
use crate::expr::Expr;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SUITE: &str = "algebra";

fn rng(seed: u64, salt: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(salt);
    r
}

fn binom(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn sign(e: i64) -> Expr {
    Expr::real(if e.rem_euclid(2) == 0 { 1.0 } else { -1.0 })
}

/// Residual of an exact identity: 0 when the difference cancels
/// symbolically, otherwise its largest coefficient at a few points.
fn exact_residual(d: &TensorForm, rng: &mut ChaCha8Rng) -> f64 {
    if d.is_zero() {
        return 0.0;
    }
    (0..4).map(|_| d.max_abs_at(&random_point(rng, d.dim(), 1.0)).unwrap_or(f64::INFINITY)).fold(0.0, f64::max)
}

/// `α∧(u⌟θ) = u⌟(ι_α θ)` and `ι_γ(u⌟θ) = u⌟(γ∧θ)` for `u` of top bundle degree.
pub fn check_sign(seed: u64, cases: usize) -> CheckOutcome {
    let mut rng = rng(seed, 1);
    let mut t = Tally::new(SUITE, "sign");
    for _ in 0..cases {
        let n = rng.random_range(1..=3usize);
        let (i, j) = (rng.random_range(0..=n as u32), rng.random_range(0..=n as u32));
        let u = random_form(&mut rng, n, Shape::exact(i, j, n as u32, 0), 2, false);
        let l = rng.random_range(0..=n as u32);
        let (p, q) = (rng.random_range(0..=n as u32), rng.random_range(0..=n as u32));
        let theta = random_form(&mut rng, n, Shape::exact(p, q, 0, l), 2, false);
        let alpha = random_section(&mut rng, n, false, false);
        let gamma = random_section(&mut rng, n, true, false);
        let r = (|| -> Result<f64, crate::algebra::AlgebraError> {
            let ut = TensorForm::contract_weight(&u, &theta)?;
            let d1 = alpha.wedge(&ut)?.sub(&TensorForm::contract_weight(&u, &TensorForm::iota_section(&alpha, &theta)?)?)?;
            let d2 = TensorForm::iota_covector(&gamma, &ut)?.sub(&TensorForm::contract_weight(&u, &gamma.wedge(&theta)?)?)?;
            Ok(exact_residual(&d1, &mut rng).max(exact_residual(&d2, &mut rng)))
        })();
        match r {
            Ok(r) => t.record(r, 0.0),
            Err(e) => t.fail(e),
        }
    }
    t.done()
}

/// `α∧(u⌟θ) = u⌟(αθ)` for scalar forms `α`, and
/// `∂̄(u⌟θ) = (−1)^{♯θ}(∂̄u)⌟θ + u⌟(∂̄θ)`.
pub fn check_sign1(seed: u64, cases: usize) -> CheckOutcome {
    let mut rng = rng(seed, 2);
    let mut t = Tally::new(SUITE, "sign1");
    for _ in 0..cases {
        let n = rng.random_range(1..=3usize);
        let k = rng.random_range(0..=n as u32);
        let l = rng.random_range(0..=k);
        let (i, j) = (rng.random_range(0..=n as u32), rng.random_range(0..=n as u32));
        let u = random_form(&mut rng, n, Shape::exact(i, j, k, 0), 2, false);
        let (p, q) = (rng.random_range(0..=n as u32), rng.random_range(0..=n as u32));
        let theta = random_form(&mut rng, n, Shape::exact(p, q, 0, l), 2, false);
        let alpha = random_form(&mut rng, n, Shape::new(None, None, Some(0), Some(0)), 2, false);
        let sharp = (p + q) as i64 - l as i64;
        let r = (|| -> Result<f64, crate::algebra::AlgebraError> {
            let ut = TensorForm::contract_weight(&u, &theta)?;
            let d1 = alpha.wedge(&ut)?.sub(&TensorForm::contract_weight(&u, &alpha.wedge(&theta)?)?)?;
            let rhs = TensorForm::contract_weight(&u.dbar(), &theta)?.scale(&sign(sharp)).add(&TensorForm::contract_weight(&u, &theta.dbar())?)?;
            let d2 = ut.dbar().sub(&rhs)?;
            Ok(exact_residual(&d1, &mut rng).max(exact_residual(&d2, &mut rng)))
        })();
        match r {
            Ok(r) => t.record(r, 0.0),
            Err(e) => t.fail(e),
        }
    }
    t.done()
}

/// `∂̄⟨α,β⟩ = ⟨∂̄α,β⟩ + (−1)^{♯α}⟨α,∂̄β⟩` for homogeneous `α`.
pub fn check_kob(seed: u64, cases: usize) -> CheckOutcome {
    let mut rng = rng(seed, 3);
    let mut t = Tally::new(SUITE, "kob");
    for _ in 0..cases {
        let n = rng.random_range(1..=3usize);
        let d = |r: &mut ChaCha8Rng| r.random_range(0..=n as u32);
        let sa = Shape::exact(d(&mut rng), d(&mut rng), d(&mut rng), d(&mut rng));
        let alpha = random_form(&mut rng, n, sa, 2, false);
        let beta = random_form(&mut rng, n, Shape::any(), 3, false);
        let sharp = (sa.p.unwrap_or(0) + sa.q.unwrap_or(0) + sa.k.unwrap_or(0)) as i64 - sa.l.unwrap_or(0) as i64;
        let r = (|| -> Result<f64, crate::algebra::AlgebraError> {
            let lhs = alpha.pairing(&beta)?.dbar();
            let rhs = alpha.dbar().pairing(&beta)?.add(&alpha.pairing(&beta.dbar())?.scale(&sign(sharp)))?;
            Ok(exact_residual(&lhs.sub(&rhs)?, &mut rng))
        })();
        match r {
            Ok(r) => t.record(r, 0.0),
            Err(e) => t.fail(e),
        }
    }
    t.done()
}

/// `[s∧, ι_γ] = |s|²` with `γ = (·, s)`, exactly; and `[s∧, ι_s̄] = 1`
/// pointwise away from the zeros of `s`.
pub fn check_commutator(seed: u64, cases: usize) -> CheckOutcome {
    let mut rng = rng(seed, 4);
    let mut t = Tally::new(SUITE, "commutator1");
    for _ in 0..cases {
        let n = rng.random_range(1..=3usize);
        let coeffs: Vec<Expr> = (0..n).map(|_| crate::algebra::random::random_poly(&mut rng, n, 2, 2, true)).collect();
        let s = TensorForm::section(&coeffs);
        let gamma = TensorForm::cosection(&coeffs.iter().map(|c| c.conj()).collect::<Vec<_>>());
        let s2 = Expr::sum(coeffs.iter().map(|c| c.mul(&c.conj())));
        let alpha = random_form(&mut rng, n, Shape::new(None, None, None, Some(0)), 3, false);
        let comm = |g: &TensorForm| -> Result<TensorForm, crate::algebra::AlgebraError> {
            s.wedge(&TensorForm::iota_covector(g, &alpha)?)?.add(&TensorForm::iota_covector(g, &s.wedge(&alpha)?)?)
        };
        let r = (|| -> Result<f64, crate::algebra::AlgebraError> {
            let exact = exact_residual(&comm(&gamma)?.sub(&alpha.scale(&s2))?, &mut rng);
            let sbar = gamma.scale(&s2.recip());
            let d = comm(&sbar)?.sub(&alpha)?;
            let mut pointwise: f64 = 0.0;
            for _ in 0..3 {
                let z = random_point(&mut rng, n, 1.0);
                if s2.eval(&z).map(|v| v.norm()).unwrap_or(0.0) > 1e-6 {
                    pointwise = pointwise.max(d.max_abs_at(&z).unwrap_or(f64::INFINITY));
                }
            }
            Ok(exact.max(if pointwise <= 1e-10 { 0.0 } else { pointwise }))
        })();
        match r {
            Ok(r) => t.record(r, 0.0),
            Err(e) => t.fail(e),
        }
    }
    t.note("exact with the unnormalized covector, pointwise <= 1e-10 with s-bar").done()
}

fn metric_for(rng: &mut ChaCha8Rng, n: usize) -> HermitianMetric {
    if rng.random_bool(0.5) {
        HermitianMetric::identity(n)
    } else {
        HermitianMetric::diagonal(&(0..n).map(|_| rng.random_range(0.3..3.0)).collect::<Vec<_>>())
    }
}

/// Random form of one pure type, with the rank of its bundle.
fn typed_form(rng: &mut ChaCha8Rng, n: usize, shape: Shape) -> (TensorForm, f64) {
    let rank = [shape.p, shape.q, shape.k, shape.l].iter().map(|d| binom(n, d.unwrap_or(0) as usize)).product();
    (random_form(rng, n, shape, 4, false), rank)
}

/// `|αβ|² ≤ c c′ |α|²|β|²` with `c, c′` the ranks of the bundles of `α, β`.
pub fn check_mm(seed: u64, cases: usize) -> CheckOutcome {
    let mut rng = rng(seed, 5);
    let mut t = Tally::new(SUITE, "mm");
    for _ in 0..cases {
        let n = rng.random_range(1..=3usize);
        let d = |r: &mut ChaCha8Rng| r.random_range(0..=n as u32);
        let sa = Shape::exact(d(&mut rng), d(&mut rng), d(&mut rng), 0);
        let sb = Shape::exact(d(&mut rng), d(&mut rng), d(&mut rng), 0);
        let (a, c) = typed_form(&mut rng, n, sa);
        let (b, c2) = typed_form(&mut rng, n, sb);
        let h = metric_for(&mut rng, n);
        let z = random_point(&mut rng, n, 1.5);
        match a.wedge(&b) {
            Ok(ab) => {
                let lhs = norm_sq(&ab, &h, &z).unwrap_or(f64::INFINITY);
                let rhs = c * c2 * norm_sq(&a, &h, &z).unwrap_or(0.0) * norm_sq(&b, &h, &z).unwrap_or(0.0);
                t.record(ratio(lhs, rhs), 1.0);
            }
            Err(e) => t.fail(e),
        }
    }
    t.note("worst is lhs/rhs").done()
}

fn ratio(lhs: f64, rhs: f64) -> f64 {
    if lhs <= 1e-300 {
        0.0
    } else if rhs > 0.0 {
        // absorb rounding in the two norms
        lhs / (rhs * (1.0 + 1e-12))
    } else {
        f64::INFINITY
    }
}

/// `|⟨α,β⟩|² ≤ |α|²|β|²` for `α ∈ ∧^k V`, `β ∈ Ω^{(p,q)}(∧^k V*)`.
pub fn check_inequa1(seed: u64, cases: usize) -> CheckOutcome {
    let mut rng = rng(seed, 6);
    let mut t = Tally::new(SUITE, "inequa1");
    for _ in 0..cases {
        let n = rng.random_range(1..=3usize);
        let k = rng.random_range(0..=n as u32);
        let (a, _) = typed_form(&mut rng, n, Shape::exact(0, 0, k, 0));
        let (p, q) = (rng.random_range(0..=n as u32), rng.random_range(0..=n as u32));
        let (b, _) = typed_form(&mut rng, n, Shape::exact(p, q, 0, k));
        let h = metric_for(&mut rng, n);
        let z = random_point(&mut rng, n, 1.5);
        match a.pairing(&b) {
            Ok(ab) => {
                let lhs = norm_sq(&ab, &h, &z).unwrap_or(f64::INFINITY);
                t.record(ratio(lhs, norm_sq(&a, &h, &z).unwrap_or(0.0) * norm_sq(&b, &h, &z).unwrap_or(0.0)), 1.0);
            }
            Err(e) => t.fail(e),
        }
    }
    t.note("worst is lhs/rhs").done()
}

/// `|u⌟v*|² ≤ b c² |u|²|v*|²` for `u ∈ Ω^{(n,0)}(∧^k V)`,
/// `v* ∈ Ω^{(0,q)}(∧^l V*)`, with `b, c` the ranks of
/// `Ω^{(0,q)}⊗∧^l V*` and `∧^{k−l} V*`.
pub fn check_inequa2(seed: u64, cases: usize) -> CheckOutcome {
    let mut rng = rng(seed, 7);
    let mut t = Tally::new(SUITE, "inequa2");
    for _ in 0..cases {
        let n = rng.random_range(1..=3usize);
        let k = rng.random_range(0..=n as u32);
        let l = rng.random_range(0..=k);
        let q = rng.random_range(0..=n as u32);
        let (u, _) = typed_form(&mut rng, n, Shape::exact(n as u32, 0, k, 0));
        let (v, b) = typed_form(&mut rng, n, Shape::exact(0, q, 0, l));
        let c = binom(n, (k - l) as usize);
        let h = metric_for(&mut rng, n);
        let z = random_point(&mut rng, n, 1.5);
        match TensorForm::contract_weight(&u, &v) {
            Ok(uv) => {
                let lhs = norm_sq(&uv, &h, &z).unwrap_or(f64::INFINITY);
                t.record(ratio(lhs, b * c * c * norm_sq(&u, &h, &z).unwrap_or(0.0) * norm_sq(&v, &h, &z).unwrap_or(0.0)), 1.0);
            }
            Err(e) => t.fail(e),
        }
    }
    t.note("worst is lhs/rhs").done()
}

pub fn algebra_suite(seed: u64, cases: usize) -> Vec<CheckOutcome> {
    vec![
        check_sign(seed, cases),
        check_sign1(seed, cases),
        check_kob(seed, cases),
        check_commutator(seed, cases),
        check_mm(seed, cases),
        check_inequa1(seed, cases),
        check_inequa2(seed, cases),
    ]
}
