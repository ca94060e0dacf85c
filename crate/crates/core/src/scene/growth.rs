//! Empirical probe of the lower bound `|s|² ≥ C_0 (1 + d²)` on `ℂⁿ`.

use super::{Scene, SceneError};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

#[derive(Debug, Clone, PartialEq)]
pub struct ShellSample {
    pub radius: f64,
    /// Infimum of `|s|² / (1 + r²)` over the probed directions.
    pub infimum: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrowthReport {
    pub shells: Vec<ShellSample>,
    /// Smallest shell infimum: a candidate for `C_0`.
    pub c0: f64,
    pub warning: Option<String>,
}

impl GrowthReport {
    pub fn passed(&self) -> bool {
        self.warning.is_none()
    }
}

/// Unit directions: coordinate axes (real and imaginary), pairwise
/// diagonals and seeded random directions.
pub(crate) fn directions(n: usize) -> Vec<Vec<Complex64>> {
    let mut out = Vec::new();
    let unit = |i: usize, c: Complex64| {
        let mut v = vec![Complex64::new(0.0, 0.0); n];
        v[i] = c;
        v
    };
    for i in 0..n {
        out.push(unit(i, Complex64::new(1.0, 0.0)));
        out.push(unit(i, Complex64::new(0.0, 1.0)));
        for j in i + 1..n {
            for ph in [1.0, -1.0] {
                let mut v = unit(i, Complex64::new(1.0 / 2f64.sqrt(), 0.0));
                v[j] = Complex64::new(ph / 2f64.sqrt(), 0.0);
                out.push(v);
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x6707);
    for _ in 0..256 {
        let v: Vec<Complex64> = (0..n).map(|_| Complex64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng))).collect();
        let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        out.push(v.into_iter().map(|c| c / norm).collect());
    }
    out
}

const REFINE_STARTS: usize = 4;

/// Compass search for a local minimum of `f` on the unit sphere, moving
/// one real coordinate at a time and halving the step when stuck.
fn descend(f: &impl Fn(&[Complex64]) -> f64, start: &[Complex64], f0: f64) -> f64 {
    let mut x = start.to_vec();
    let mut best = f0;
    let mut h = 0.25;
    while h > 1e-7 {
        let mut moved = false;
        for k in 0..2 * x.len() {
            for sign in [1.0, -1.0] {
                let mut y = x.clone();
                let step = if k % 2 == 0 { Complex64::new(sign * h, 0.0) } else { Complex64::new(0.0, sign * h) };
                y[k / 2] += step;
                let norm = y.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
                y.iter_mut().for_each(|c| *c /= norm);
                let v = f(&y);
                if v < best {
                    best = v;
                    x = y;
                    moved = true;
                }
            }
        }
        if !moved {
            h *= 0.5;
        }
    }
    best
}

/// Samples `|s|²/(1 + d²)` on concentric shells around the origin,
/// polishes the lowest samples by local search and reports the empirical
/// infimum. Warns when it vanishes or decays.
pub fn growth_probe(scene: &Scene, radii: &[f64]) -> Result<GrowthReport, SceneError> {
    if !scene.is_affine() {
        return Err(SceneError::NotAffine);
    }
    let s2 = scene.norm_sq_s(0);
    let dirs = directions(scene.n);
    let mut shells = Vec::new();
    for &r in radii {
        let ratio = |d: &[Complex64]| {
            let z: Vec<Complex64> = d.iter().map(|c| c * r).collect();
            s2.eval(&z).map(|c| c.re).unwrap_or(0.0) / (1.0 + r * r)
        };
        let mut sampled: Vec<(f64, &Vec<Complex64>)> = dirs.iter().map(|d| (ratio(d), d)).collect();
        sampled.sort_by(|a, b| a.0.total_cmp(&b.0));
        let inf = sampled.iter().take(REFINE_STARTS).map(|(v, d)| descend(&ratio, d, *v)).fold(f64::INFINITY, f64::min);
        shells.push(ShellSample { radius: r, infimum: inf });
    }
    let c0 = shells.iter().map(|s| s.infimum).fold(f64::INFINITY, f64::min);
    let mut warning = None;
    if !(c0 > 1e-9) {
        warning = Some(format!("|s|^2/(1+d^2) reaches {c0:.3e} on the probed shells; no positive C_0"));
    } else if shells.len() >= 2 {
        let (first, last) = (shells[0].infimum, shells[shells.len() - 1].infimum);
        let decreasing = shells.windows(2).all(|w| w[1].infimum < w[0].infimum);
        if decreasing && last < 0.25 * first {
            warning = Some(format!("shell infimum decays from {first:.3e} to {last:.3e}; growth assumption likely violated"));
        }
    }
    Ok(GrowthReport { shells, c0, warning })
}
