//! Importance-sampled Monte-Carlo integration over `ℂⁿ` and the
//! truncation radius for deterministic quadrature of Gaussian-type
//! integrands.

use super::{CycleError, IntegralResult, LevelTrace};
use crate::scene::Scene;
use num_complex::Complex64;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sampler {
    /// Equal-weight Gaussians at the declared zeros (90%) plus uniform on
    /// the truncation ball (10%).
    #[default]
    GaussianMixture,
    /// Uniform on the truncation ball (90%) plus a wide Gaussian tail (10%).
    UniformBall,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct MCSpec {
    pub budget: usize,
    pub batches: usize,
    pub seed: u64,
    pub sampler: Sampler,
    /// Gaussian component density `∝ exp(−|z − c|² / width²)`.
    pub width: f64,
    /// Ball radius; defaults to the scene's truncation radius floor.
    pub radius: Option<f64>,
    /// Standard error above which the result is flagged.
    pub tol: f64,
}

impl Default for MCSpec {
    fn default() -> Self {
        MCSpec { budget: 100_000, batches: 16, seed: 0, sampler: Sampler::GaussianMixture, width: 1.0, radius: None, tol: f64::INFINITY }
    }
}

impl MCSpec {
    pub fn new(budget: usize, seed: u64) -> Self {
        MCSpec { budget, seed, ..Default::default() }
    }

    pub fn validate(&self) -> Result<(), CycleError> {
        if self.budget < 1000 {
            return Err(CycleError::Spec(format!("sample budget {} below 1000", self.budget)));
        }
        if self.batches < 8 {
            return Err(CycleError::Spec(format!("{} batches is too few for a standard error (need 8)", self.batches)));
        }
        if !(self.width > 0.0 && self.width.is_finite()) {
            return Err(CycleError::Spec("Gaussian width must be positive".into()));
        }
        if let Some(r) = self.radius {
            if !(r > 0.0 && r.is_finite()) {
                return Err(CycleError::Spec("ball radius must be positive".into()));
            }
        }
        Ok(())
    }
}

/// Mixture of Gaussians and a uniform ball in `ℂⁿ ≅ ℝ^{2n}`.
struct Mixture {
    n: usize,
    centers: Vec<Vec<Complex64>>,
    width: f64,
    radius: f64,
    gauss_frac: f64,
}

impl Mixture {
    fn ball_volume(&self) -> f64 {
        let n = self.n as i32;
        PI.powi(n) * self.radius.powi(2 * n) / (1..=self.n).map(|k| k as f64).product::<f64>()
    }

    fn density(&self, z: &[Complex64]) -> f64 {
        let norm = (PI * self.width * self.width).powi(self.n as i32);
        let g: f64 = self
            .centers
            .iter()
            .map(|c| {
                let d2: f64 = z.iter().zip(c).map(|(a, b)| (a - b).norm_sqr()).sum();
                (-d2 / (self.width * self.width)).exp() / norm
            })
            .sum::<f64>()
            / self.centers.len() as f64;
        let r2: f64 = z.iter().map(|a| a.norm_sqr()).sum();
        let u = if r2 <= self.radius * self.radius { 1.0 / self.ball_volume() } else { 0.0 };
        self.gauss_frac * g + (1.0 - self.gauss_frac) * u
    }

    fn sample(&self, rng: &mut ChaCha8Rng, z: &mut [Complex64]) {
        let normal = |rng: &mut ChaCha8Rng| -> f64 { StandardNormal.sample(rng) };
        if rng.random::<f64>() < self.gauss_frac {
            let c = &self.centers[rng.random_range(0..self.centers.len())];
            let s = self.width / 2f64.sqrt();
            for (k, zk) in z.iter_mut().enumerate() {
                *zk = c[k] + Complex64::new(normal(rng), normal(rng)) * s;
            }
        } else {
            let mut norm2 = 0.0;
            for zk in z.iter_mut() {
                *zk = Complex64::new(normal(rng), normal(rng));
                norm2 += zk.norm_sqr();
            }
            let r = self.radius * rng.random::<f64>().powf(1.0 / (2 * self.n) as f64) / norm2.sqrt();
            for zk in z.iter_mut() {
                *zk *= r;
            }
        }
    }
}

/// Monte-Carlo estimate of `∫_{ℂⁿ} f dλ` (Lebesgue measure) with
/// explicit sampler centers and ball radius. Batches are seeded by
/// `(seed, batch)` and reduced in order, so results are bitwise
/// reproducible regardless of thread count.
pub fn mc_integrate_with<F>(f: F, n: usize, spec: &MCSpec, centers: &[Vec<Complex64>], radius: f64) -> Result<IntegralResult, CycleError>
where
    F: Fn(&[Complex64]) -> Result<Complex64, CycleError> + Sync,
{
    spec.validate()?;
    let origin = vec![Complex64::new(0.0, 0.0); n];
    let mix = match spec.sampler {
        Sampler::GaussianMixture => Mixture {
            n,
            centers: if centers.is_empty() { vec![origin] } else { centers.to_vec() },
            width: spec.width,
            radius,
            gauss_frac: 0.9,
        },
        Sampler::UniformBall => Mixture { n, centers: vec![origin], width: spec.width.max(radius / 2.0), radius, gauss_frac: 0.1 },
    };
    let per = spec.budget / spec.batches;
    let means: Vec<Result<Complex64, CycleError>> = (0..spec.batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            rng.set_stream(b as u64);
            let mut z = vec![Complex64::new(0.0, 0.0); n];
            let mut acc = Complex64::new(0.0, 0.0);
            for _ in 0..per {
                mix.sample(&mut rng, &mut z);
                let p = mix.density(&z);
                if !(p > 0.0) {
                    return Err(CycleError::ZeroDensity { at: z.clone() });
                }
                acc += f(&z)? / p;
            }
            Ok(acc / per as f64)
        })
        .collect();
    let means: Vec<Complex64> = means.into_iter().collect::<Result<_, _>>()?;
    let bn = means.len() as f64;
    let mean = means.iter().sum::<Complex64>() / bn;
    let var = means.iter().map(|m| (m - mean).norm_sqr()).sum::<f64>() / (bn - 1.0);
    let stderr = (var / bn).sqrt();
    let count = per * spec.batches;
    Ok(IntegralResult {
        value: mean,
        error: stderr,
        count,
        converged: stderr <= spec.tol,
        trace: vec![LevelTrace { level: 0, value: mean, error: stderr, nodes: count }],
    })
}

/// Monte-Carlo integral over a single-chart scene, sampling around its
/// declared point zeros.
pub fn mc_integrate<F>(f: F, spec: &MCSpec, scene: &Scene) -> Result<IntegralResult, CycleError>
where
    F: Fn(&[Complex64]) -> Result<Complex64, CycleError> + Sync,
{
    if !scene.is_affine() {
        return Err(CycleError::Invalid("Monte-Carlo integration needs a single-chart scene".into()));
    }
    let centers: Vec<Vec<Complex64>> = scene.point_components().map(|(_, p)| p.coords.clone()).collect();
    let radius = match spec.radius {
        Some(r) => r,
        None => truncation_radius(scene, f64::INFINITY).unwrap_or_else(|_| zero_floor(scene)),
    };
    mc_integrate_with(f, scene.n, spec, &centers, radius)
}

fn zero_floor(scene: &Scene) -> f64 {
    scene.point_components().map(|(_, p)| p.coords.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()).fold(0.0, f64::max) + 1.0
}

/// Radius `R` beyond which the Gaussian tail bound
/// `R^{2n} exp(−C_0 (1 + R²))` drops below `tol`, never less than the
/// largest declared zero modulus plus one.
pub fn truncation_radius(scene: &Scene, tol: f64) -> Result<f64, CycleError> {
    let c0 = match scene.growth.c0 {
        Some(c) if c > 0.0 => c,
        _ => return Err(CycleError::NoGrowthBound),
    };
    let floor = zero_floor(scene).max(scene.growth.compact_radius.unwrap_or(0.0));
    if tol.is_infinite() {
        return Ok(floor);
    }
    if !(tol > 0.0) {
        return Err(CycleError::Spec("tail tolerance must be positive".into()));
    }
    let n = scene.n as f64;
    let g = |r: f64| 2.0 * n * r.ln() - c0 * (1.0 + r * r) - tol.ln();
    let peak = (n / c0).sqrt();
    if g(peak) <= 0.0 {
        return Ok(floor.max(peak));
    }
    let (mut lo, mut hi) = (peak, peak.max(1.0) * 2.0);
    while g(hi) > 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(floor.max(hi))
}
