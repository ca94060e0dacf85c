//! Residues as Gaussian-damped integrals over all of `ℂⁿ`: the
//! exponential `e^{tS}` with `S = −|s|² + ∂̄ξ`, the contraction
//! `ψ⌟e^{tS}` and its integral, plus the checks that go with it.

use crate::algebra::{AlgebraError, TensorForm};
use crate::cycles::{ball_cycle, mc_integrate_with, pullback_integrate, truncation_radius, CycleError, IntegralResult, MCSpec, QuadratureSpec};
use crate::expr::{Expr, Tape, TapeScratch};
use crate::koszul::{calibration_sign, inv_two_pi_i_pow, t_s, top_blade_measure};
use crate::scene::{growth_probe, Scene, SceneError};
use num_complex::Complex64;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MqError {
    #[error(transparent)]
    Scene(#[from] SceneError),
    #[error(transparent)]
    Cycle(#[from] CycleError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("the integral formula needs a single-chart scene")]
    NotAffine,
    #[error("growth condition fails: {0}")]
    Growth(String),
    #[error("t must be positive, got {0}")]
    BadT(f64),
    #[error("integral did not converge (error {error:.3e})")]
    NotConverged { error: f64 },
}

/// Gaussian tail mass left outside the truncation ball.
pub const TAIL_TOL: f64 = 1e-13;
/// Agreement tolerance between deterministic integrals.
pub const DETERMINISTIC_TOL: f64 = 1e-6;
/// Monte-Carlo agreement in units of the combined standard error.
pub const MC_SIGMAS: f64 = 3.0;

/// `e^{tS} = e^{−t|s|²} Σ_k t^k (∂̄ξ)^k / k!`, kept factored.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpS {
    pub t: f64,
    /// `e^{−t|s|²}`.
    pub gauss: Expr,
    /// `(∂̄ξ)^k / k!` for `k = 0..=n`.
    pub terms: Vec<TensorForm>,
}

impl ExpS {
    /// The full `∧V*`-valued form.
    pub fn form(&self) -> TensorForm {
        let n = self.terms[0].dim();
        let mut acc = TensorForm::zero(n);
        for (k, b) in self.terms.iter().enumerate() {
            acc = acc.add(&b.scale(&Expr::real(self.t.powi(k as i32)))).expect("same dimension");
        }
        acc.scale(&self.gauss)
    }
}

fn require_affine(sc: &Scene) -> Result<(), MqError> {
    if sc.is_affine() {
        Ok(())
    } else {
        Err(MqError::NotAffine)
    }
}

fn check_t(t: f64) -> Result<(), MqError> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(MqError::BadT(t))
    }
}

/// Builds `e^{tS}` on the scene's single chart.
pub fn exp_s(sc: &Scene, t: f64) -> Result<ExpS, MqError> {
    require_affine(sc)?;
    check_t(t)?;
    let n = sc.n;
    let dxi = sc.xi(0).dbar();
    let mut terms = vec![TensorForm::one(n)];
    for k in 1..=n {
        let next = dxi.wedge(&terms[k - 1])?.scale(&Expr::real(1.0 / k as f64));
        terms.push(next);
    }
    let gauss = sc.norm_sq_s(0).scale(Complex64::new(-t, 0.0)).exp();
    Ok(ExpS { t, gauss, terms })
}

/// Pointwise `(∂̄ + ι_s) e^{tS}`, maximized over the given points.
pub fn closedness_residual(sc: &Scene, e: &ExpS, points: &[Vec<Complex64>]) -> Result<f64, MqError> {
    let f = e.form();
    let d = f.dbar().add(&TensorForm::iota_section(&sc.section_form(0), &f)?)?;
    max_abs(&d, points)
}

fn max_abs(f: &TensorForm, points: &[Vec<Complex64>]) -> Result<f64, MqError> {
    let mut m: f64 = 0.0;
    for z in points {
        m = m.max(f.max_abs_at(z).map_err(|e| CycleError::NonFinite { at: z.clone(), source: e })?);
    }
    Ok(m)
}

/// `ψ⌟e^{tS}` in full and its scalar `(n,n)` part.
#[derive(Debug, Clone, PartialEq)]
pub struct MqIntegrand {
    pub full: TensorForm,
    pub top: TensorForm,
}

impl MqIntegrand {
    /// Density of the top part against Lebesgue measure, in the same
    /// orientation convention as the boundary residue.
    pub fn density(&self) -> Expr {
        let n = self.top.dim();
        self.top.top_scalar().scale(top_blade_measure(n) * calibration_sign(n))
    }
}

pub fn mq_integrand(sc: &Scene, t: f64) -> Result<MqIntegrand, MqError> {
    let e = exp_s(sc, t)?;
    let full = TensorForm::contract_weight(&sc.weight_form(0), &e.form())?;
    let n = sc.n as u32;
    let top = full.filter(|b| b.bidegree() == (n, n) && b.e() == 0 && b.es() == 0);
    Ok(MqIntegrand { full, top })
}

/// `∂̄_s(ψ⌟e^{tS})` maximized over the given points.
pub fn integrand_closedness(sc: &Scene, m: &MqIntegrand, points: &[Vec<Complex64>]) -> Result<f64, MqError> {
    max_abs(&crate::koszul::dbar_s(sc, 0, &m.full)?, points)
}

/// How to integrate over `ℂⁿ`.
#[derive(Debug, Clone, PartialEq)]
pub enum MqIntegrator {
    /// Product quadrature on the truncation ball.
    Ball(QuadratureSpec),
    MonteCarlo(MCSpec),
}

impl MqIntegrator {
    /// Ball quadrature in dimension one, Monte Carlo above.
    pub fn default_for(n: usize) -> Self {
        if n == 1 {
            MqIntegrator::Ball(QuadratureSpec::new(32).levels(3).tol(1e-9))
        } else {
            MqIntegrator::MonteCarlo(MCSpec::default())
        }
    }

    pub fn is_monte_carlo(&self) -> bool {
        matches!(self, MqIntegrator::MonteCarlo(_))
    }
}

/// Growth constant `C_0`: the declared one, else a probe on shells
/// beyond the declared zeros.
pub fn growth_constant(sc: &Scene) -> Result<f64, MqError> {
    require_affine(sc)?;
    if let Some(c) = sc.growth.c0 {
        return if c > 0.0 { Ok(c) } else { Err(MqError::Growth(format!("declared C_0 = {c} is not positive"))) };
    }
    let r0 = sc.point_components().map(|(_, p)| p.coords.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()).fold(0.0, f64::max) + 1.0;
    let radii: Vec<f64> = [2.0, 4.0, 8.0, 16.0].iter().map(|k| k * r0).collect();
    let report = growth_probe(sc, &radii)?;
    match report.warning {
        Some(w) => Err(MqError::Growth(w)),
        None => Ok(report.c0),
    }
}

/// Raw value, error and sampling data of `∫ ψ⌟e^{tS}`.
#[derive(Debug, Clone, PartialEq)]
pub struct MqIntegral {
    pub t: f64,
    pub result: IntegralResult,
    /// Truncation radius of the ball or sampler.
    pub radius: f64,
    pub monte_carlo: bool,
}

/// `∫_{ℂⁿ} ψ⌟e^{tS}`.
pub fn integral_mq(sc: &Scene, t: f64, integrator: &MqIntegrator) -> Result<MqIntegral, MqError> {
    check_t(t)?;
    let c0 = growth_constant(sc)?;
    let mut damped = sc.clone();
    damped.growth.c0 = Some(c0 * t);
    let m = mq_integrand(sc, t)?;
    let n = sc.n;
    match integrator {
        MqIntegrator::Ball(q) => {
            let radius = tail_radius(&m, truncation_radius(&damped, TAIL_TOL)?)?;
            let vol = TensorForm::term(n, TensorForm::volume_blade(n), m.top.top_scalar().scale(Complex64::new(calibration_sign(n), 0.0)));
            let result = pullback_integrate(&vol, &ball_cycle(radius, &vec![Complex64::new(0.0, 0.0); n], 0)?, q)?;
            Ok(MqIntegral { t, result, radius, monte_carlo: false })
        }
        MqIntegrator::MonteCarlo(spec) => {
            let radius = match spec.radius {
                Some(r) => r,
                None => tail_radius(&m, truncation_radius(&damped, TAIL_TOL)?)?,
            };
            let mut spec = spec.clone();
            spec.width /= t.sqrt();
            let tape = Tape::compile(&[m.density()]);
            let centers: Vec<Vec<Complex64>> = sc.point_components().map(|(_, p)| p.coords.clone()).collect();
            let f = |z: &[Complex64]| {
                let mut out = [Complex64::new(0.0, 0.0)];
                tape.eval(z, &mut TapeScratch::default(), &mut out).map_err(|e| CycleError::NonFinite { at: z.to_vec(), source: e })?;
                Ok(out[0])
            };
            let result = mc_integrate_with(f, n, &spec, &centers, radius)?;
            Ok(MqIntegral { t, result, radius, monte_carlo: true })
        }
    }
}

/// Grows `start` until the sampled density times the shell area scale
/// `r^{2n}` drops below the tail tolerance. The growth constant only
/// bounds `|s|²` far out, so this catches slow decay near the zeros.
fn tail_radius(m: &MqIntegrand, start: f64) -> Result<f64, MqError> {
    let n = m.top.dim();
    let tape = Tape::compile(&[m.density()]);
    let dirs = crate::scene::growth::directions(n);
    let mut scratch = TapeScratch::default();
    let mut out = [Complex64::new(0.0, 0.0)];
    let mut r = start;
    while r < 1e3 {
        let mut sup: f64 = 0.0;
        for d in &dirs {
            let z: Vec<Complex64> = d.iter().map(|c| c * r).collect();
            sup = sup.max(match tape.eval(&z, &mut scratch, &mut out) {
                Ok(()) => out[0].norm(),
                Err(_) => f64::INFINITY,
            });
        }
        if sup * r.powi(2 * n as i32) <= TAIL_TOL {
            return Ok(r);
        }
        r *= 1.1;
    }
    Err(MqError::Growth(format!("integrand still above {TAIL_TOL:e} at radius {r:.0}")))
}

/// `(−1)^n/(2πi)^n`.
pub fn residue_factor(n: usize) -> Complex64 {
    inv_two_pi_i_pow(n) * if n.is_multiple_of(2) { 1.0 } else { -1.0 }
}

/// The residue `((−1)^n/(2πi)^n) ∫ ψ⌟e^{tS}`.
pub fn residue_mq(sc: &Scene, t: f64, integrator: &MqIntegrator) -> Result<IntegralResult, MqError> {
    let raw = integral_mq(sc, t, integrator)?;
    if !raw.result.converged {
        return Err(MqError::NotConverged { error: raw.result.error });
    }
    Ok(raw.result.scaled(residue_factor(sc.n)))
}

/// Largest difference two results may show and still agree.
pub fn agreement_tolerance(a: &IntegralResult, b: &IntegralResult, monte_carlo: bool) -> f64 {
    if monte_carlo {
        MC_SIGMAS * a.error.hypot(b.error)
    } else {
        DETERMINISTIC_TOL.max(a.error + b.error)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TIndependence {
    pub ts: Vec<f64>,
    pub values: Vec<IntegralResult>,
    pub max_deviation: f64,
    /// Every pair agrees within its combined tolerance.
    pub passed: bool,
}

/// Residues for each `t` and their largest pairwise deviation.
pub fn t_independence(sc: &Scene, ts: &[f64], integrator: &MqIntegrator) -> Result<TIndependence, MqError> {
    for &t in ts {
        check_t(t)?;
    }
    let values = ts.iter().map(|&t| residue_mq(sc, t, integrator)).collect::<Result<Vec<_>, _>>()?;
    let mut max_deviation: f64 = 0.0;
    let mut passed = true;
    for i in 0..values.len() {
        for j in i + 1..values.len() {
            let d = (values[i].value - values[j].value).norm();
            max_deviation = max_deviation.max(d);
            passed &= d <= agreement_tolerance(&values[i], &values[j], integrator.is_monte_carlo());
        }
    }
    Ok(TIndependence { ts: ts.to_vec(), values, max_deviation, passed })
}

/// The scene with section `t·s`.
pub fn scaled_section(sc: &Scene, t: f64) -> Scene {
    let mut out = sc.clone();
    for d in &mut out.data {
        d.section = d.section.iter().map(|e| e.scale(Complex64::new(t, 0.0))).collect();
    }
    out.growth.c0 = sc.growth.c0.map(|c| c * t * t);
    out.name = format!("{} (section x{t})", sc.name);
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingCheck {
    pub t: f64,
    /// `∫ ψ⌟e^{S_t}` for the section `t·s`.
    pub scaled: IntegralResult,
    /// `t^{−n} ∫ ψ⌟e^{S}`.
    pub reference: IntegralResult,
    pub difference: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Compares the integral for the rescaled section against `t^{−n}` times
/// the unscaled one. Both sides use the undeformed exponent.
pub fn scaling_check(sc: &Scene, t: f64, integrator: &MqIntegrator) -> Result<ScalingCheck, MqError> {
    check_t(t)?;
    let scaled = integral_mq(&scaled_section(sc, t), 1.0, integrator)?.result;
    let reference = integral_mq(sc, 1.0, integrator)?.result.scaled(Complex64::new(t.powi(-(sc.n as i32)), 0.0));
    let difference = (scaled.value - reference.value).norm();
    let tolerance = agreement_tolerance(&scaled, &reference, integrator.is_monte_carlo());
    Ok(ScalingCheck { t, scaled, reference, difference, tolerance, passed: difference <= tolerance })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecayVerdict {
    RapidlyDecreasing,
    /// Bounded by a multiple of `(1 + d²)^order`.
    Tempered { order: i32 },
    Violation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayReport {
    pub radii: Vec<f64>,
    pub orders: Vec<i32>,
    /// `sups[i][j]`: sup of `(1 + d²)^{orders[j]} |α|` on shell `radii[i]`.
    pub sups: Vec<Vec<f64>>,
    pub verdict: DecayVerdict,
}

/// Samples `(1 + d²)^m |α|` on shells about the origin for each `m` and
/// classifies the trend between the innermost and outermost shell.
pub fn decay_probe(alpha: &TensorForm, sc: &Scene, radii: &[f64], orders: &[i32]) -> Result<DecayReport, MqError> {
    require_affine(sc)?;
    let mut radii = radii.to_vec();
    radii.sort_by(f64::total_cmp);
    let dirs = crate::scene::growth::directions(sc.n);
    let mut sups = Vec::new();
    for &r in &radii {
        let mut sup: f64 = 0.0;
        for d in &dirs {
            let z: Vec<Complex64> = d.iter().map(|c| c * r).collect();
            let v = alpha.max_abs_at(&z).unwrap_or(f64::INFINITY);
            sup = sup.max(v);
        }
        let w = 1.0 + r * r;
        sups.push(orders.iter().map(|&m| w.powi(m) * sup).collect::<Vec<f64>>());
    }
    let bounded = |j: usize| sups.len() < 2 || sups[sups.len() - 1][j] <= sups[0][j] * (1.0 + 1e-9);
    let verdict = if (0..orders.len()).all(bounded) {
        DecayVerdict::RapidlyDecreasing
    } else if let Some(m) = (0..orders.len()).filter(|&j| bounded(j)).map(|j| orders[j]).max() {
        DecayVerdict::Tempered { order: -m }
    } else {
        DecayVerdict::Violation
    };
    Ok(DecayReport { radii, orders: orders.to_vec(), sups, verdict })
}

/// Fitted `C_1`, `μ` for `|T_s(∂̄T_s)^k(ψ⌟e^{tS})| ≤ C_1 e^{−t|s|²}(1 + d²)^μ`
/// on a shell, maximized over `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct TailFit {
    pub c1: f64,
    pub mu: f64,
    pub samples: usize,
}

/// Samples the shell `R ≤ |z| ≤ 2R` and fits the bound by least squares
/// on logarithms, then raises `C_1` until it holds at every sample.
pub fn tail_bound_fit(sc: &Scene, t: f64, radius: f64) -> Result<TailFit, MqError> {
    let m = mq_integrand(sc, t)?;
    let gauss = sc.norm_sq_s(0).scale(Complex64::new(-t, 0.0)).exp();
    let mut forms = Vec::new();
    let mut cur = t_s(sc, 0, &m.full)?;
    for _ in 0..sc.n {
        forms.push(cur.clone());
        cur = t_s(sc, 0, &cur.dbar())?;
    }
    let dirs = crate::scene::growth::directions(sc.n);
    let mut pts = Vec::new();
    for (i, d) in dirs.iter().enumerate() {
        let r = radius * (1.0 + (i % 8) as f64 / 7.0);
        let z: Vec<Complex64> = d.iter().map(|c| c * r).collect();
        let g = gauss.eval(&z).map(|c| c.norm()).unwrap_or(0.0);
        if !(g > 0.0) {
            continue;
        }
        let mut v: f64 = 0.0;
        for f in &forms {
            v = v.max(f.max_abs_at(&z).unwrap_or(0.0));
        }
        if v > 0.0 {
            pts.push(((1.0 + r * r).ln(), (v / g).ln()));
        }
    }
    if pts.len() < 2 {
        return Ok(TailFit { c1: 0.0, mu: 0.0, samples: pts.len() });
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx = pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    let mu = if sxx > 0.0 { pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / sxx } else { 0.0 };
    let c1 = pts.iter().map(|p| (p.1 - mu * p.0).exp()).fold(0.0, f64::max);
    Ok(TailFit { c1, mu, samples: pts.len() })
}

#[cfg(test)]
mod tests;
