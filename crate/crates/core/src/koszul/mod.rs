//! Residues through the Koszul–Dolbeault zigzag: the chain `β_k`, boundary
//! and torus integrals, and the operator identities behind the
//! compactly supported trace.

mod cutoff;

pub use cutoff::{CutoffFn, Region};

use crate::algebra::{AlgebraError, Blade, TensorForm};
use crate::cycles::{ball_cycle, pullback_integrate, pullback_integrate_batch, torus_cycle, tube_cycle, CycleError, Integrand, IntegralResult, QuadratureSpec};
use crate::expr::{Expr, Point};
use crate::scene::{Scene, SceneError};
use num_complex::Complex64;
use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum KoszulError {
    #[error(transparent)]
    Scene(#[from] SceneError),
    #[error(transparent)]
    Cycle(#[from] CycleError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("no zero component labelled '{0}'")]
    UnknownComponent(String),
    #[error("torus does not separate the zero: degree {degree:.3} of s on the torus")]
    NotSeparating { degree: f64 },
    #[error("{0}")]
    Invalid(String),
}

/// Sign fixing the orientation and contraction conventions so that the
/// residue of `dz ⊗ e` along `s = z` is `+1` in every dimension. The
/// contraction and boundary-orientation conventions give `(−1)^{n(n+1)/2}`
/// for the identity section, which this cancels.
pub fn calibration_sign(n: usize) -> f64 {
    if (n * (n + 1) / 2).is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// `(2πi)^{−n}`.
pub fn inv_two_pi_i_pow(n: usize) -> Complex64 {
    Complex64::new(0.0, 2.0 * PI).powi(n as i32).inv()
}

/// The forms `β_0..β_{n−1}` on the complement of the zero locus.
#[derive(Debug, Clone, PartialEq)]
pub struct KoszulChain {
    pub betas: Vec<TensorForm>,
}

impl KoszulChain {
    /// `Σ β_k`.
    pub fn total(&self) -> TensorForm {
        let n = self.betas[0].dim();
        self.betas.iter().fold(TensorForm::zero(n), |acc, b| acc.add(b).expect("same dimension"))
    }

    pub fn last(&self) -> &TensorForm {
        &self.betas[self.betas.len() - 1]
    }
}

/// `ι_s̄ α` for a `∧V`-valued form.
pub fn t_s(sc: &Scene, chart: usize, alpha: &TensorForm) -> Result<TensorForm, AlgebraError> {
    TensorForm::iota_covector(&sc.s_bar(chart), alpha)
}

/// `β_0 = ι_s̄ ψ`, `β_k = −ι_s̄ ∂̄β_{k−1}` for a given top weight `ψ`.
pub fn beta_chain_for(sc: &Scene, chart: usize, psi: &TensorForm) -> Result<KoszulChain, KoszulError> {
    let sbar = sc.s_bar(chart);
    let mut betas = vec![TensorForm::iota_covector(&sbar, psi)?];
    for _ in 1..sc.n {
        let prev = &betas[betas.len() - 1];
        betas.push(TensorForm::iota_covector(&sbar, &prev.dbar())?.neg());
    }
    Ok(KoszulChain { betas })
}

/// The chain for the scene's own weight on one chart.
pub fn beta_chain(sc: &Scene, chart: usize) -> Result<KoszulChain, KoszulError> {
    beta_chain_for(sc, chart, &sc.weight_form(chart))
}

/// Defect of the ladder `s∧β_0 = ψ`, `s∧β_k + ∂̄β_{k−1} = 0`, `∂̄β_{n−1} = 0`,
/// as symbolic forms (all zero when the identities hold exactly).
pub fn ladder_defects(sc: &Scene, chart: usize, chain: &KoszulChain) -> Result<Vec<TensorForm>, KoszulError> {
    let s = sc.section_form(chart);
    let mut out = vec![s.wedge(&chain.betas[0])?.sub(&sc.weight_form(chart))?];
    for k in 1..chain.betas.len() {
        out.push(s.wedge(&chain.betas[k])?.add(&chain.betas[k - 1].dbar())?);
    }
    out.push(chain.last().dbar());
    Ok(out)
}

/// `∂̄_s α = ∂̄α + s∧α`.
pub fn dbar_s(sc: &Scene, chart: usize, alpha: &TensorForm) -> Result<TensorForm, AlgebraError> {
    alpha.dbar().add(&sc.section_form(chart).wedge(alpha)?)
}

fn component<'a>(sc: &'a Scene, label: &str) -> Result<&'a crate::scene::ZeroComponent, KoszulError> {
    sc.component(label).ok_or_else(|| KoszulError::UnknownComponent(label.to_string()))
}

/// Normalization turning `∫_N β_{n−1}` into a residue.
fn boundary_factor(n: usize) -> Complex64 {
    let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
    inv_two_pi_i_pow(n) * (sign * calibration_sign(n))
}

/// Lower bound on `|s|²` enforced at every node of a boundary cycle.
pub const GUARD_MIN: f64 = 1e-8;

/// Residue of the scene weight at one zero component by integrating
/// `β_{n−1}` over the boundary of a tube of radius `eps`.
pub fn residue_boundary(sc: &Scene, label: &str, eps: f64, q: &QuadratureSpec) -> Result<IntegralResult, KoszulError> {
    let comp = component(sc, label)?;
    let cycle = tube_cycle(comp, eps, sc)?;
    let charts: std::collections::BTreeSet<usize> = cycle.pieces.iter().map(|p| p.chart).collect();
    let mut ig = Integrand::new();
    for chart in charts {
        let chain = beta_chain(sc, chart)?;
        ig = ig.chart(chart, chain.last().clone()).guard(chart, sc.norm_sq_s(chart), GUARD_MIN);
    }
    let r = pullback_integrate_batch(&ig, &[], &cycle, q)?.remove(0);
    Ok(r.scaled(boundary_factor(sc.n)))
}

/// Boundary residues of several weight coefficients `g` at a point zero
/// of a single-chart scene, sharing one kernel: the chain is linear over
/// holomorphic functions, so `β_{n−1}[g ψ_0] = g β_{n−1}[ψ_0]`.
pub fn residue_boundary_batch(sc: &Scene, label: &str, eps: f64, weights: &[Expr], q: &QuadratureSpec) -> Result<Vec<IntegralResult>, KoszulError> {
    let comp = component(sc, label)?;
    let p = comp.as_point().ok_or_else(|| KoszulError::Invalid("batched boundary residues need a point component".into()))?;
    if weights.iter().any(|w| !w.is_holomorphic()) {
        return Err(KoszulError::Invalid("weights must be holomorphic".into()));
    }
    let cycle = tube_cycle(comp, eps, sc)?;
    let chain = beta_chain_for(sc, p.chart, &TensorForm::top_weight(sc.n, Expr::one()))?;
    let ig = Integrand::new().chart(p.chart, chain.last().clone()).guard(p.chart, sc.norm_sq_s(p.chart), GUARD_MIN);
    let f = boundary_factor(sc.n);
    Ok(pullback_integrate_batch(&ig, weights, &cycle, q)?.into_iter().map(|r| r.scaled(f)).collect())
}

/// Determinant of a square matrix of expressions by cofactor expansion.
pub fn det_expr(m: &[Vec<Expr>]) -> Expr {
    let n = m.len();
    if n == 1 {
        return m[0][0].clone();
    }
    let mut terms = Vec::new();
    for j in 0..n {
        if m[0][j].is_zero() {
            continue;
        }
        let minor: Vec<Vec<Expr>> = m[1..].iter().map(|row| row.iter().enumerate().filter(|(k, _)| *k != j).map(|(_, e)| e.clone()).collect()).collect();
        let t = m[0][j].mul(&det_expr(&minor));
        terms.push(if j % 2 == 0 { t } else { t.neg() });
    }
    Expr::sum(terms)
}

/// Classical residues `(2πi)^{−n} ∫_T g dz / (s_1⋯s_n)` over a coordinate
/// torus around `center`, for each weight coefficient `g`. The torus is
/// oriented by `d arg z`; the degree of `s` on the torus (computed in the
/// same pass) supplies the orientation of the cycle `{|s_i| = δ}`.
pub fn residue_contour_batch(sc: &Scene, center: &Point, radii: &[f64], weights: &[Expr], q: &QuadratureSpec) -> Result<Vec<IntegralResult>, KoszulError> {
    let cycle = torus_cycle(radii, &center.coords, center.chart)?;
    contour_on(sc, center.chart, cycle, weights, q)
}

/// Jacobian `∂s_i/∂z_j` as expressions.
pub fn section_jacobian(sc: &Scene, chart: usize) -> Vec<Vec<Expr>> {
    let s = sc.section(chart);
    (0..sc.n).map(|i| (0..sc.n).map(|j| s[i].d_z(j)).collect()).collect()
}

/// Classical residue at a zero using the torus `|(Ds)(z − p)|_k = δ` when
/// the Jacobian is invertible (it separates the zero for small `δ`), and
/// the coordinate torus of radius `δ` otherwise.
pub fn residue_contour_adapted(sc: &Scene, center: &Point, delta: f64, weights: &[Expr], q: &QuadratureSpec) -> Result<Vec<IntegralResult>, KoszulError> {
    let n = sc.n;
    let jac = section_jacobian(sc, center.chart);
    let mut m = nalgebra::DMatrix::<Complex64>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] = jac[i][j].eval(&center.coords).map_err(|e| KoszulError::Invalid(e.to_string()))?;
        }
    }
    let cycle = match m.clone().try_inverse() {
        Some(inv) if m.determinant().norm() > 1e-8 => {
            let frame: Vec<Vec<Complex64>> = (0..n).map(|i| (0..n).map(|k| inv[(i, k)]).collect()).collect();
            crate::cycles::torus_cycle_in_frame(&vec![delta; n], &center.coords, &frame, center.chart)?
        }
        _ => torus_cycle(&vec![delta; n], &center.coords, center.chart)?,
    };
    contour_on(sc, center.chart, cycle, weights, q)
}

fn contour_on(sc: &Scene, chart: usize, cycle: crate::cycles::Cycle, weights: &[Expr], q: &QuadratureSpec) -> Result<Vec<IntegralResult>, KoszulError> {
    let n = sc.n;
    let s = sc.section(chart);
    let prod = Expr::product(s.iter().cloned());
    let all: Vec<usize> = (0..n).collect();
    let form = TensorForm::term(n, Blade::from_indices(&all, &[], &[], &[]), prod.recip());
    let mut factors = vec![det_expr(&section_jacobian(sc, chart))];
    factors.extend(weights.iter().cloned());
    let ig = Integrand::new().chart(chart, form).guard(chart, prod, 1e-12);
    let mut res = pullback_integrate_batch(&ig, &factors, &cycle, q)?;
    let degree = (res.remove(0).value * inv_two_pi_i_pow(n)).re;
    if degree.abs() < 0.5 {
        return Err(KoszulError::NotSeparating { degree });
    }
    let f = inv_two_pi_i_pow(n) * degree.signum();
    Ok(res.into_iter().map(|r| r.scaled(f)).collect())
}

/// Classical residue of the scene weight at `center`.
pub fn residue_contour(sc: &Scene, center: &Point, radii: &[f64], q: &QuadratureSpec) -> Result<IntegralResult, KoszulError> {
    Ok(residue_contour_batch(sc, center, radii, &[sc.weight(center.chart).clone()], q)?.remove(0))
}

/// Residues of one component at several tube radii.
#[derive(Debug, Clone, PartialEq)]
pub struct RadiusCheck {
    pub radii: Vec<f64>,
    pub values: Vec<IntegralResult>,
    /// Largest pairwise `|Res(r_a) − Res(r_b)|`.
    pub max_deviation: f64,
    /// Whether every pair agrees within the sum of its error estimates.
    pub passed: bool,
}

/// Agreement floor for values whose refinement estimates are at rounding level.
fn rounding_floor(v: Complex64) -> f64 {
    1e-12 * (1.0 + v.norm())
}

/// Compares residues computed at each radius against one another.
pub fn radius_independence(sc: &Scene, label: &str, radii: &[f64], q: &QuadratureSpec) -> Result<RadiusCheck, KoszulError> {
    let values: Vec<IntegralResult> = radii.iter().map(|&r| residue_boundary(sc, label, r, q)).collect::<Result<_, _>>()?;
    Ok(compare_radii(radii, values))
}

pub(crate) fn compare_radii(radii: &[f64], values: Vec<IntegralResult>) -> RadiusCheck {
    let mut max_deviation: f64 = 0.0;
    let mut passed = true;
    for a in 0..values.len() {
        for b in a + 1..values.len() {
            let d = (values[a].value - values[b].value).norm();
            max_deviation = max_deviation.max(d);
            if d > values[a].error + values[b].error + rounding_floor(values[a].value) {
                passed = false;
            }
        }
    }
    RadiusCheck { radii: radii.to_vec(), values, max_deviation, passed }
}

/// `(−1)^{n(n−1)/2}(−2i)^n`: the (n,n) blade `dz_1…dz_n dz̄_1…dz̄_n` as a
/// multiple of Lebesgue measure.
pub fn top_blade_measure(n: usize) -> Complex64 {
    let sign = if (n * (n.saturating_sub(1)) / 2).is_multiple_of(2) { 1.0 } else { -1.0 };
    Complex64::new(0.0, -2.0).powi(n as i32) * sign
}

/// The trace `∫ α_{0,n}` (the scalar (n,n) part) over the ball of radius
/// `radius` about `center`, for forms supported in it or negligible
/// outside it.
pub fn trace(alpha: &TensorForm, center: &[Complex64], radius: f64, q: &QuadratureSpec) -> Result<IntegralResult, KoszulError> {
    let n = alpha.dim();
    let top = alpha.filter(|b| b.bidegree() == (n as u32, n as u32) && b.e() == 0 && b.es() == 0);
    Ok(pullback_integrate(&top, &ball_cycle(radius, center, 0)?, q)?)
}

/// The trace of a form built from the local expression of a cutoff `ρ`,
/// integrated piecewise over the region where `ρ = 1` and the transition
/// shell; the form must vanish where `ρ = 0`.
pub fn trace_with_cutoff(cut: &CutoffFn, build: impl Fn(&Expr) -> TensorForm, q: &QuadratureSpec) -> Result<IntegralResult, KoszulError> {
    let inside = trace(&build(&cut.expr(Region::Inside)), &cut.center, cut.inner, q)?;
    let shell_form = build(&cut.expr(Region::Transition));
    let n = shell_form.dim();
    let top = shell_form.filter(|b| b.bidegree() == (n as u32, n as u32) && b.e() == 0 && b.es() == 0);
    let shell = pullback_integrate(&top, &crate::cycles::shell_cycle(cut.inner, cut.outer, &cut.center, 0)?, q)?;
    let mut r = shell.clone();
    r.value += inside.value;
    r.error += inside.error;
    r.count += inside.count;
    r.converged &= inside.converged;
    Ok(r)
}

/// `Σ_{k≤n} (−1)^k [∂̄, T_s]^k α`.
fn geometric(sc: &Scene, chart: usize, alpha: &TensorForm) -> Result<TensorForm, AlgebraError> {
    let mut acc = alpha.clone();
    let mut cur = alpha.clone();
    for k in 1..=sc.n {
        cur = t_s(sc, chart, &cur)?.dbar().add(&t_s(sc, chart, &cur.dbar())?)?;
        if cur.is_zero() {
            break;
        }
        let term = if k % 2 == 1 { cur.neg() } else { cur.clone() };
        acc = acc.add(&term)?;
    }
    Ok(acc)
}

/// `T_ρ α = ρα + (∂̄ρ) T_s G α` and `R_ρ α = (1 − ρ) T_s G α` for a local
/// expression of `ρ`.
pub fn t_rho_r_rho(sc: &Scene, chart: usize, alpha: &TensorForm, rho: &Expr) -> Result<(TensorForm, TensorForm), AlgebraError> {
    let n = sc.n;
    let tg = t_s(sc, chart, &geometric(sc, chart, alpha)?)?;
    let drho = TensorForm::scalar(n, rho.clone()).dbar();
    let t = alpha.scale(rho).add(&drho.wedge(&tg)?)?;
    let r = tg.scale(&Expr::one().sub(rho));
    Ok((t, r))
}

/// Largest pointwise norm of `[∂̄_s, R_ρ]α − (α − T_ρ α)` over the sample
/// points (which must avoid the zero locus).
pub fn quasi_iso_check(sc: &Scene, chart: usize, alpha: &TensorForm, rho: &CutoffFn, points: &[Vec<Complex64>]) -> Result<f64, KoszulError> {
    let mut worst: f64 = 0.0;
    let mut by_region: std::collections::BTreeMap<Region, Vec<&Vec<Complex64>>> = Default::default();
    for p in points {
        by_region.entry(rho.region(p)).or_default().push(p);
    }
    for (region, pts) in by_region {
        let rho_e = rho.expr(region);
        let (t, r) = t_rho_r_rho(sc, chart, alpha, &rho_e)?;
        let lhs = dbar_s(sc, chart, &r)?.add(&r_apply(sc, chart, &dbar_s(sc, chart, alpha)?, &rho_e)?)?;
        let rhs = alpha.sub(&t)?;
        let diff = lhs.sub(&rhs)?;
        for p in pts {
            let v = diff.max_abs_at(p).map_err(|e| KoszulError::Invalid(format!("evaluation failed at {p:?}: {e}")))?;
            worst = worst.max(v);
        }
    }
    Ok(worst)
}

fn r_apply(sc: &Scene, chart: usize, alpha: &TensorForm, rho: &Expr) -> Result<TensorForm, AlgebraError> {
    Ok(t_rho_r_rho(sc, chart, alpha, rho)?.1)
}

#[cfg(test)]
mod tests;
