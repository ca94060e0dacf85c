//! Parametrized integration cycles and the quadrature and Monte-Carlo
//! engines used to integrate forms over them.
//!
//! A cycle is a union of pieces. Each piece maps a parameter box into one
//! chart and carries the complex Jacobian `∂z_i/∂u_j` in closed form, so
//! pulling back `dz_i` and `dz̄_i` needs no numerical differentiation.

mod mc;
mod quadrature;

pub use mc::{mc_integrate, mc_integrate_with, truncation_radius, MCSpec, Sampler};
pub use quadrature::{pullback_integrate, pullback_integrate_batch, Integrand, IntegralResult, LevelTrace, QuadratureSpec, Rule};

use crate::expr::EvalError;
use crate::scene::{Projective, Scene, TubeSpec, ZeroComponent, ZeroKind};
use nalgebra::DMatrix;
use num_complex::Complex64;
use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CycleError {
    #[error("invalid cycle: {0}")]
    Invalid(String),
    #[error("invalid quadrature spec: {0}")]
    Spec(String),
    #[error("form has bundle-valued terms of degree {degree}; only scalar forms can be integrated")]
    NotScalar { degree: u32 },
    #[error("non-finite integrand at {at:?}: {source}")]
    NonFinite { at: Vec<Complex64>, source: EvalError },
    #[error("guard {value:.3e} below {min:.1e} at {at:?}: cycle meets the zero locus")]
    MeetsZeroLocus { at: Vec<Complex64>, value: f64, min: f64 },
    #[error("tube of radius {eps} around '{around}' meets component '{other}'")]
    Intersects { around: String, other: String, eps: f64 },
    #[error("no positive growth constant C_0 available")]
    NoGrowthBound,
    #[error("sampling density vanished at {at:?}")]
    ZeroDensity { at: Vec<Complex64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CycleKind {
    Torus,
    Sphere,
    Tube,
    Domain,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Axis {
    /// `[0, 2π)` with periodic integrand; `nodes` overrides the spec count.
    Periodic { nodes: Option<usize> },
    /// `[lo, hi]`, split at `breaks` into panels of Gauss–Legendre nodes.
    Interval { lo: f64, hi: f64, breaks: Vec<f64> },
}

impl Axis {
    fn interval(lo: f64, hi: f64) -> Axis {
        Axis::Interval { lo, hi, breaks: Vec::new() }
    }

    fn midpoint(&self) -> f64 {
        match self {
            Axis::Periodic { .. } => 0.7,
            Axis::Interval { lo, hi, .. } => 0.5 * (lo + hi),
        }
    }
}

/// Writes the point (`n` entries) and the row-major `n × d` Jacobian.
pub type PieceMap = dyn Fn(&[f64], &mut [Complex64], &mut [Complex64]) + Send + Sync;

#[derive(Clone)]
pub struct Piece {
    pub chart: usize,
    pub axes: Vec<Axis>,
    pub orientation: f64,
    map: Arc<PieceMap>,
}

impl Piece {
    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn eval(&self, u: &[f64], z: &mut [Complex64], jac: &mut [Complex64]) {
        (self.map)(u, z, jac)
    }

    /// Point and Jacobian at `u` as owned vectors.
    pub fn point(&self, u: &[f64], n: usize) -> (Vec<Complex64>, Vec<Complex64>) {
        let mut z = vec![Complex64::new(0.0, 0.0); n];
        let mut j = vec![Complex64::new(0.0, 0.0); n * self.dim()];
        self.eval(u, &mut z, &mut j);
        (z, j)
    }
}

impl fmt::Debug for Piece {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Piece").field("chart", &self.chart).field("axes", &self.axes).field("orientation", &self.orientation).finish()
    }
}

#[derive(Debug, Clone)]
pub struct Cycle {
    pub kind: CycleKind,
    pub n: usize,
    pub pieces: Vec<Piece>,
}

impl Cycle {
    pub fn dim(&self) -> usize {
        self.pieces.first().map_or(0, Piece::dim)
    }

    /// Overrides the node count of periodic axes, in axis order.
    pub fn with_periodic_nodes(mut self, nodes: &[usize]) -> Cycle {
        for p in &mut self.pieces {
            let mut it = nodes.iter();
            for a in &mut p.axes {
                if let Axis::Periodic { nodes } = a {
                    if let Some(&k) = it.next() {
                        *nodes = Some(k);
                    }
                }
            }
        }
        self
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Sign of the real determinant of `[normal | ∂x/∂u]` in the real
/// coordinates `(x_1, y_1, …, x_n, y_n)`.
fn orientation_sign(piece: &Piece, n: usize, normal: Option<&dyn Fn(&[Complex64]) -> Vec<Complex64>>) -> Result<f64, CycleError> {
    let u: Vec<f64> = piece.axes.iter().map(Axis::midpoint).collect();
    let (z, jac) = piece.point(&u, n);
    let d = piece.dim();
    let mut m = DMatrix::<f64>::zeros(2 * n, 2 * n);
    let offset = match normal {
        Some(nf) => {
            let v = nf(&z);
            for k in 0..n {
                m[(2 * k, 0)] = v[k].re;
                m[(2 * k + 1, 0)] = v[k].im;
            }
            1
        }
        None => 0,
    };
    if offset + d != 2 * n {
        return Err(CycleError::Invalid(format!("orientation needs a {}-dimensional frame, got {}", 2 * n, offset + d)));
    }
    for j in 0..d {
        for k in 0..n {
            m[(2 * k, offset + j)] = jac[k * d + j].re;
            m[(2 * k + 1, offset + j)] = jac[k * d + j].im;
        }
    }
    let det = m.determinant();
    if !(det.abs() > 1e-300) {
        return Err(CycleError::Invalid("parametrization is degenerate at the box midpoint".into()));
    }
    Ok(det.signum())
}

/// Coordinate torus `|z_i − c_i| = r_i`, oriented by `d arg z_1 ∧ … ∧ d arg z_n`.
pub fn torus_cycle(radii: &[f64], center: &[Complex64], chart: usize) -> Result<Cycle, CycleError> {
    let n = center.len();
    if radii.len() != n || n == 0 {
        return Err(CycleError::Invalid("one radius per coordinate required".into()));
    }
    if radii.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
        return Err(CycleError::Invalid(format!("radii must be positive, got {radii:?}")));
    }
    let (r, ctr) = (radii.to_vec(), center.to_vec());
    let map = move |u: &[f64], z: &mut [Complex64], j: &mut [Complex64]| {
        j.fill(c(0.0, 0.0));
        for k in 0..n {
            let w = Complex64::from_polar(r[k], u[k]);
            z[k] = ctr[k] + w;
            j[k * n + k] = c(0.0, 1.0) * w;
        }
    };
    let piece = Piece { chart, axes: vec![Axis::Periodic { nodes: None }; n], orientation: 1.0, map: Arc::new(map) };
    Ok(Cycle { kind: CycleKind::Torus, n, pieces: vec![piece] })
}

/// Torus `z = c + Σ_k A_{·k} r_k e^{iθ_k}` in the linear frame `A`
/// (given row-major as `A[i][k]`), oriented by `dθ_1 ∧ … ∧ dθ_n`.
pub fn torus_cycle_in_frame(radii: &[f64], center: &[Complex64], frame: &[Vec<Complex64>], chart: usize) -> Result<Cycle, CycleError> {
    let n = center.len();
    if frame.len() != n || frame.iter().any(|r| r.len() != n) {
        return Err(CycleError::Invalid("frame must be an n x n matrix".into()));
    }
    let mut t = torus_cycle(radii, center, chart)?;
    let (r, ctr, a) = (radii.to_vec(), center.to_vec(), frame.to_vec());
    let map = move |u: &[f64], z: &mut [Complex64], j: &mut [Complex64]| {
        for i in 0..n {
            z[i] = ctr[i];
        }
        for k in 0..n {
            let w = Complex64::from_polar(r[k], u[k]);
            for i in 0..n {
                z[i] += a[i][k] * w;
                j[i * n + k] = a[i][k] * c(0.0, 1.0) * w;
            }
        }
    };
    t.pieces[0].map = Arc::new(map);
    Ok(t)
}

/// Moduli `ρ_1..ρ_n ≥ 0` of a point on the unit sphere of `ℝⁿ` in
/// hyperspherical angles `φ ∈ [0, π/2]^{n−1}`, with derivatives.
fn hyperspherical(phi: &[f64], rho: &mut [f64], drho: &mut [f64]) {
    let n = phi.len() + 1;
    let m = n - 1;
    for k in 0..n {
        let mut v = 1.0;
        for i in 0..k.min(m) {
            v *= phi[i].sin();
        }
        if k < m {
            v *= phi[k].cos();
        }
        rho[k] = v;
        for j in 0..m {
            let d = if j < k {
                let mut v = 1.0;
                for i in 0..k.min(m) {
                    v *= if i == j { phi[i].cos() } else { phi[i].sin() };
                }
                if k < m {
                    v *= phi[k].cos();
                }
                v
            } else if j == k {
                let mut v = -phi[k].sin();
                for i in 0..k {
                    v *= phi[i].sin();
                }
                v
            } else {
                0.0
            };
            drho[k * m.max(1) + j] = d;
        }
    }
}

/// Shared polar parametrization `z_k = c_k + R λ ρ_k(φ) e^{iθ_k}` with
/// parameters `(θ_1..θ_n, φ_1..φ_{n−1}[, λ])`.
fn polar_map(n: usize, radius: f64, center: Vec<Complex64>, radial: bool) -> impl Fn(&[f64], &mut [Complex64], &mut [Complex64]) + Send + Sync {
    move |u: &[f64], z: &mut [Complex64], jac: &mut [Complex64]| {
        let m = n - 1;
        let d = 2 * n - 1 + usize::from(radial);
        let lam = if radial { u[2 * n - 1] } else { 1.0 };
        let mut rho = [0.0; crate::algebra::MAX_DIM];
        let mut drho = [0.0; crate::algebra::MAX_DIM * crate::algebra::MAX_DIM];
        hyperspherical(&u[n..n + m], &mut rho[..n], &mut drho[..n * m.max(1)]);
        jac.fill(c(0.0, 0.0));
        for k in 0..n {
            let ph = Complex64::from_polar(1.0, u[k]);
            let w = ph * (radius * lam * rho[k]);
            z[k] = center[k] + w;
            jac[k * d + k] = c(0.0, 1.0) * w;
            for j in 0..m {
                jac[k * d + n + j] = ph * (radius * lam * drho[k * m.max(1) + j]);
            }
            if radial {
                jac[k * d + 2 * n - 1] = ph * (radius * rho[k]);
            }
        }
    }
}

fn polar_axes(n: usize, radial: bool) -> Vec<Axis> {
    let mut axes = vec![Axis::Periodic { nodes: None }; n];
    axes.extend((1..n).map(|_| Axis::interval(0.0, FRAC_PI_2)));
    if radial {
        axes.push(Axis::interval(0.0, 1.0));
    }
    axes
}

/// The sphere `|z − c| = r` with the boundary orientation of the ball.
pub fn sphere_cycle(radius: f64, center: &[Complex64], chart: usize) -> Result<Cycle, CycleError> {
    let n = center.len();
    if n == 0 || !(radius > 0.0 && radius.is_finite()) {
        return Err(CycleError::Invalid(format!("sphere needs a positive radius, got {radius}")));
    }
    let ctr = center.to_vec();
    let mut piece = Piece { chart, axes: polar_axes(n, false), orientation: 1.0, map: Arc::new(polar_map(n, radius, ctr.clone(), false)) };
    let normal = move |z: &[Complex64]| z.iter().zip(&ctr).map(|(a, b)| a - b).collect::<Vec<_>>();
    piece.orientation = orientation_sign(&piece, n, Some(&normal))?;
    Ok(Cycle { kind: CycleKind::Sphere, n, pieces: vec![piece] })
}

/// The closed ball `|z − c| ≤ R` with the complex orientation, for
/// integrating top-degree forms.
pub fn ball_cycle(radius: f64, center: &[Complex64], chart: usize) -> Result<Cycle, CycleError> {
    let n = center.len();
    if n == 0 || !(radius > 0.0 && radius.is_finite()) {
        return Err(CycleError::Invalid(format!("ball needs a positive radius, got {radius}")));
    }
    let mut piece = Piece { chart, axes: polar_axes(n, true), orientation: 1.0, map: Arc::new(polar_map(n, radius, center.to_vec(), true)) };
    piece.orientation = orientation_sign(&piece, n, None)?;
    Ok(Cycle { kind: CycleKind::Domain, n, pieces: vec![piece] })
}

/// The shell `r_in ≤ |z − c| ≤ r_out` with the complex orientation.
pub fn shell_cycle(r_in: f64, r_out: f64, center: &[Complex64], chart: usize) -> Result<Cycle, CycleError> {
    if !(0.0 <= r_in && r_in < r_out) {
        return Err(CycleError::Invalid(format!("shell needs 0 <= inner < outer, got {r_in}, {r_out}")));
    }
    let mut ball = ball_cycle(r_out, center, chart)?;
    let n = center.len();
    ball.pieces[0].axes[2 * n - 1] = Axis::interval(r_in / r_out, 1.0);
    Ok(ball)
}

/// Boundary cycle around a zero component: a sphere of radius `eps` for
/// points, the tube `|x_k|² = ε² Σ_{j≠k} |x_j|²` for a projective
/// hyperplane `{x_k = 0}`.
pub fn tube_cycle(component: &ZeroComponent, eps: f64, scene: &Scene) -> Result<Cycle, CycleError> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(CycleError::Invalid(format!("tube radius must be positive, got {eps}")));
    }
    match &component.kind {
        ZeroKind::Point(p) => {
            for (other, q) in scene.point_components() {
                if other.label != component.label && q.chart == p.chart {
                    let d: f64 = q.coords.iter().zip(&p.coords).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
                    if d <= 2.0 * eps {
                        return Err(CycleError::Intersects { around: component.label.clone(), other: other.label.clone(), eps });
                    }
                }
            }
            sphere_cycle(eps, &p.coords, p.chart)
        }
        ZeroKind::Subvariety { tube: TubeSpec::ProjectiveHyperplane { index }, .. } => {
            let n = scene.n;
            let k = *index;
            if scene.projective.is_none() || k > n {
                return Err(CycleError::Invalid("hyperplane tube needs a projective scene".into()));
            }
            for (other, q) in scene.point_components() {
                let x = Projective::from_chart(q.chart, &q.coords);
                let rest: f64 = (0..=n).filter(|&m| m != k).map(|m| x[m].norm_sqr()).sum();
                if x[k].norm_sqr() <= 4.0 * eps * eps * rest {
                    return Err(CycleError::Intersects { around: component.label.clone(), other: other.label.clone(), eps });
                }
            }
            let pieces = (0..=n).filter(|&j| j != k).map(|j| hyperplane_tube_piece(n, k, j, eps)).collect::<Result<_, _>>()?;
            Ok(Cycle { kind: CycleKind::Tube, n, pieces })
        }
    }
}

/// Piece of the hyperplane tube in chart `j`, covering the region where
/// `|x_j|` is the largest of the coordinates other than `x_k`.
/// Parameters: `(ρ_m, α_m)` for each `m ∉ {j, k}`, then `θ`.
fn hyperplane_tube_piece(n: usize, k: usize, j: usize, eps: f64) -> Result<Piece, CycleError> {
    let others: Vec<usize> = (0..=n).filter(|&m| m != j && m != k).map(|m| Projective::coord_index(j, m)).collect();
    let kk = Projective::coord_index(j, k);
    let d = 2 * n - 1;
    let mut axes = Vec::new();
    for _ in &others {
        axes.push(Axis::interval(0.0, 1.0));
        axes.push(Axis::Periodic { nodes: None });
    }
    axes.push(Axis::Periodic { nodes: None });
    let oth = others.clone();
    let map = move |u: &[f64], z: &mut [Complex64], jac: &mut [Complex64]| {
        jac.fill(c(0.0, 0.0));
        let mut q = 1.0;
        for (i, &m) in oth.iter().enumerate() {
            let (rho, al) = (u[2 * i], u[2 * i + 1]);
            let ph = Complex64::from_polar(1.0, al);
            z[m] = ph * rho;
            jac[m * d + 2 * i] = ph;
            jac[m * d + 2 * i + 1] = c(0.0, rho) * ph;
            q += rho * rho;
        }
        let root = q.sqrt();
        let ph = Complex64::from_polar(1.0, u[d - 1]);
        z[kk] = ph * (eps * root);
        jac[kk * d + d - 1] = c(0.0, 1.0) * z[kk];
        for (i, _) in oth.iter().enumerate() {
            jac[kk * d + 2 * i] = ph * (eps * u[2 * i] / root);
        }
    };
    let mut piece = Piece { chart: j, axes, orientation: 1.0, map: Arc::new(map) };
    let normal = move |z: &[Complex64]| {
        (0..n).map(|m| if m == kk { z[m] } else if others.contains(&m) { -z[m] * (eps * eps) } else { c(0.0, 0.0) }).collect::<Vec<_>>()
    };
    piece.orientation = orientation_sign(&piece, n, Some(&normal))?;
    Ok(piece)
}
