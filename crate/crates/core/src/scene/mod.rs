//! Geometric data of a residue problem: charts and transitions, the bundle
//! trivializations, a Hermitian metric, the section `s`, the weight `ψ`
//! and the declared components of the zero locus.
//!
//! On each chart the bundle is trivialized by a holomorphic frame
//! `e_1..e_n`; `s = Σ s_i e_i` and `ψ = c · dz_1∧…∧dz_n ⊗ e_1∧…∧e_n`.
//! On an overlap with coordinate change `w = φ(z)` and frame change
//! `e^a_i = Σ_j G_ij e^b_j`, consistency means `s^b_j = Σ_i s^a_i G_ij` and
//! `c_b = c_a det G / det Dφ`.

pub(crate) mod growth;
mod library;
mod projective;

pub use growth::{growth_probe, GrowthReport, ShellSample};
pub use library::{fermat_scene, lg_scene, monomial_scene, plane_example, plane_example_with, affine_scene};
pub use projective::Projective;

use crate::algebra::{HermitianMetric, TensorForm};
use crate::expr::{Expr, Point};
use num_complex::Complex64;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SceneError {
    #[error("invalid scene: {0}")]
    Invalid(String),
    #[error("{what} is not holomorphic on chart {chart}")]
    NotHolomorphic { what: String, chart: usize },
    #[error("overlap {from}->{to} inconsistent at {at:?}: {detail}")]
    Overlap { from: usize, to: usize, at: Vec<Complex64>, detail: String },
    #[error("declared component '{label}' is not in the zero locus (|s| = {residual:.3e})")]
    NotAZero { label: String, residual: f64 },
    #[error("operation needs a single-chart affine scene")]
    NotAffine,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Chart {
    pub id: usize,
    pub name: String,
    pub coord_names: Vec<String>,
}

/// Coordinate and frame change from chart `from` to chart `to`, written in
/// the coordinates of `from`.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub from: usize,
    pub to: usize,
    pub coords: Vec<Expr>,
    pub frame: Vec<Vec<Expr>>,
}

/// Section, weight coefficient and metric on one chart.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartData {
    pub section: Vec<Expr>,
    pub weight: Expr,
    pub metric: HermitianMetric,
}

/// How a tube around a positive-dimensional component is built.
#[derive(Debug, Clone, PartialEq)]
pub enum TubeSpec {
    /// The coordinate hyperplane `{x_index = 0}` of a projective space, with
    /// tube `|x_index|² = ε² Σ_{j≠index} |x_j|²`.
    ProjectiveHyperplane { index: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub enum ZeroKind {
    Point(Point),
    /// A subvariety given per chart by coordinates as expressions in one
    /// complex parameter (written `z1`).
    Subvariety { pieces: Vec<(usize, Vec<Expr>)>, tube: TubeSpec },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZeroComponent {
    pub label: String,
    pub kind: ZeroKind,
}

impl ZeroComponent {
    pub fn point(label: impl Into<String>, chart: usize, coords: Vec<Complex64>) -> Self {
        ZeroComponent { label: label.into(), kind: ZeroKind::Point(Point::new(chart, coords)) }
    }

    pub fn as_point(&self) -> Option<&Point> {
        match &self.kind {
            ZeroKind::Point(p) => Some(p),
            _ => None,
        }
    }
}

/// Growth data for the exponential integral on `ℂⁿ`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GrowthData {
    /// Lower bound `|s|² ≥ C_0 (1 + d²)` outside a compact set.
    pub c0: Option<f64>,
    /// Radius of a ball containing the compact set.
    pub compact_radius: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub name: String,
    pub n: usize,
    pub charts: Vec<Chart>,
    pub data: Vec<ChartData>,
    pub transitions: Vec<Transition>,
    pub superpotential: Option<Expr>,
    pub components: Vec<ZeroComponent>,
    pub growth: GrowthData,
    pub projective: Option<Projective>,
}

fn rel_close(a: Complex64, b: Complex64, tol: f64) -> bool {
    (a - b).norm() <= tol * (1.0 + a.norm().max(b.norm()))
}

impl Scene {
    /// Single-chart scene on `ℂⁿ` with identity metric.
    pub fn affine(name: impl Into<String>, section: Vec<Expr>, weight: Expr) -> Self {
        let n = section.len();
        Scene {
            name: name.into(),
            n,
            charts: vec![Chart { id: 0, name: "C^n".into(), coord_names: (1..=n).map(|i| format!("z{i}")).collect() }],
            data: vec![ChartData { section, weight, metric: HermitianMetric::identity(n) }],
            transitions: Vec::new(),
            superpotential: None,
            components: Vec::new(),
            growth: GrowthData::default(),
            projective: None,
        }
    }

    pub fn with_components(mut self, components: Vec<ZeroComponent>) -> Self {
        self.components = components;
        self
    }

    pub fn with_weight(mut self, chart: usize, weight: Expr) -> Self {
        self.data[chart].weight = weight;
        self
    }

    pub fn with_metric(mut self, chart: usize, metric: HermitianMetric) -> Self {
        self.data[chart].metric = metric;
        self
    }

    pub fn is_affine(&self) -> bool {
        self.charts.len() == 1 && self.projective.is_none()
    }

    pub fn section(&self, chart: usize) -> &[Expr] {
        &self.data[chart].section
    }

    pub fn weight(&self, chart: usize) -> &Expr {
        &self.data[chart].weight
    }

    pub fn metric(&self, chart: usize) -> &HermitianMetric {
        &self.data[chart].metric
    }

    /// `s = Σ s_i e_i` as a form.
    pub fn section_form(&self, chart: usize) -> TensorForm {
        TensorForm::section(self.section(chart))
    }

    /// `ψ` as a form.
    pub fn weight_form(&self, chart: usize) -> TensorForm {
        TensorForm::top_weight(self.n, self.weight(chart).clone())
    }

    /// `|s|²_h` as an expression.
    pub fn norm_sq_s(&self, chart: usize) -> Expr {
        self.metric(chart).norm_sq_expr(self.section(chart))
    }

    /// Components `Σ_j h_{ij̄} conj(s_j)` of the covector `(·, s)_h`.
    fn dual_components(&self, chart: usize) -> Vec<Expr> {
        let h = self.metric(chart);
        let s = self.section(chart);
        (0..self.n).map(|i| Expr::sum((0..self.n).map(|j| h.entry(i, j).mul(&s[j].conj())))).collect()
    }

    /// `ξ = -(·, s)_h`, a section of V*.
    pub fn xi(&self, chart: usize) -> TensorForm {
        TensorForm::cosection(&self.dual_components(chart)).neg()
    }

    /// `s̄ = (·, s)_h / (s, s)_h`, defined where `s ≠ 0`.
    pub fn s_bar(&self, chart: usize) -> TensorForm {
        let inv = self.norm_sq_s(chart).recip();
        TensorForm::cosection(&self.dual_components(chart)).scale(&inv)
    }

    /// `S = -|s|² + ∂̄ξ` for the rescaled section `t·s`, i.e.
    /// `-t²|s|² + t ∂̄ξ`.
    pub fn action_s(&self, chart: usize, t: f64) -> TensorForm {
        assert!(t > 0.0, "t must be positive");
        let m = TensorForm::scalar(self.n, self.norm_sq_s(chart).scale(Complex64::new(-t * t, 0.0)));
        let d = self.xi(chart).dbar().scale(&Expr::real(t));
        m.add(&d).expect("same dimension")
    }

    /// Runs every structural check: dimensions, holomorphy, overlap
    /// consistency and membership of declared components.
    pub fn validate(&self) -> Result<(), SceneError> {
        let n = self.n;
        if n == 0 || n > crate::algebra::MAX_DIM {
            return Err(SceneError::Invalid(format!("dimension {n} unsupported")));
        }
        if self.charts.is_empty() || self.charts.len() != self.data.len() {
            return Err(SceneError::Invalid("every chart needs section, weight and metric".into()));
        }
        for (c, d) in self.data.iter().enumerate() {
            if d.section.len() != n {
                return Err(SceneError::Invalid(format!("chart {c}: section has {} components, rank must equal dimension {n}", d.section.len())));
            }
            if d.metric.dim() != n {
                return Err(SceneError::Invalid(format!("chart {c}: metric has size {}", d.metric.dim())));
            }
            let fits = |e: &Expr| e.max_index().is_none_or(|m| m < n);
            if !d.section.iter().all(fits) || !fits(&d.weight) {
                return Err(SceneError::Invalid(format!("chart {c}: expression uses a coordinate beyond z{n}")));
            }
            for (i, si) in d.section.iter().enumerate() {
                if !si.is_holomorphic() {
                    return Err(SceneError::NotHolomorphic { what: format!("s_{}", i + 1), chart: c });
                }
            }
            if !d.weight.is_holomorphic() {
                return Err(SceneError::NotHolomorphic { what: "weight".into(), chart: c });
            }
        }
        if let Some(w) = &self.superpotential {
            if !w.is_holomorphic() {
                return Err(SceneError::NotHolomorphic { what: "superpotential".into(), chart: 0 });
            }
        }
        for t in &self.transitions {
            self.check_overlap(t, 50)?;
        }
        for comp in &self.components {
            self.check_component(comp)?;
        }
        Ok(())
    }

    fn check_overlap(&self, t: &Transition, samples: usize) -> Result<(), SceneError> {
        let n = self.n;
        if t.from >= self.charts.len() || t.to >= self.charts.len() || t.coords.len() != n || t.frame.len() != n {
            return Err(SceneError::Invalid(format!("malformed transition {}->{}", t.from, t.to)));
        }
        let jac: Vec<Vec<Expr>> = t.coords.iter().map(|w| (0..n).map(|q| w.d_z(q)).collect()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed ^ (t.from as u64) << 8 ^ t.to as u64);
        let (a, b) = (&self.data[t.from], &self.data[t.to]);
        let mut checked = 0;
        let mut attempts = 0;
        while checked < samples && attempts < samples * 20 {
            attempts += 1;
            let z: Vec<Complex64> = (0..n)
                .map(|_| Complex64::from_polar(rng.random_range(0.3..2.5), rng.random_range(0.0..std::f64::consts::TAU)))
                .collect();
            let Ok(w) = t.coords.iter().map(|e| e.eval(&z)).collect::<Result<Vec<_>, _>>() else { continue };
            let Ok(g) = t.frame.iter().map(|r| r.iter().map(|e| e.eval(&z)).collect::<Result<Vec<_>, _>>()).collect::<Result<Vec<_>, _>>() else {
                continue;
            };
            let Ok(dphi) = jac.iter().map(|r| r.iter().map(|e| e.eval(&z)).collect::<Result<Vec<_>, _>>()).collect::<Result<Vec<_>, _>>() else {
                continue;
            };
            let (Ok(sa), Ok(sb)) = (
                a.section.iter().map(|e| e.eval(&z)).collect::<Result<Vec<_>, _>>(),
                b.section.iter().map(|e| e.eval(&w)).collect::<Result<Vec<_>, _>>(),
            ) else {
                continue;
            };
            for j in 0..n {
                let moved: Complex64 = (0..n).map(|i| sa[i] * g[i][j]).sum();
                if !rel_close(moved, sb[j], 1e-9) {
                    return Err(SceneError::Overlap { from: t.from, to: t.to, at: z, detail: format!("section component {} differs: {moved} vs {}", j + 1, sb[j]) });
                }
            }
            let det = |m: &Vec<Vec<Complex64>>| nalgebra::DMatrix::from_fn(n, n, |r, c| m[r][c]).determinant();
            let (dg, dj) = (det(&g), det(&dphi));
            if dj.norm() < 1e-12 {
                continue;
            }
            let (Ok(ca), Ok(cb)) = (a.weight.eval(&z), b.weight.eval(&w)) else { continue };
            let moved = ca * dg / dj;
            if !rel_close(moved, cb, 1e-9) {
                return Err(SceneError::Overlap { from: t.from, to: t.to, at: z, detail: format!("weight differs: {moved} vs {cb}") });
            }
            checked += 1;
        }
        if checked == 0 {
            return Err(SceneError::Invalid(format!("no valid sample points on overlap {}->{}", t.from, t.to)));
        }
        Ok(())
    }

    fn check_component(&self, comp: &ZeroComponent) -> Result<(), SceneError> {
        let residual = |chart: usize, z: &[Complex64]| -> Option<f64> {
            let mut m: f64 = 0.0;
            for e in self.section(chart) {
                m = m.max(e.eval(z).ok()?.norm());
            }
            Some(m)
        };
        match &comp.kind {
            ZeroKind::Point(p) => {
                if p.chart >= self.charts.len() || p.coords.len() != self.n {
                    return Err(SceneError::Invalid(format!("component '{}' has a malformed location", comp.label)));
                }
                let r = residual(p.chart, &p.coords).unwrap_or(f64::INFINITY);
                if r > 1e-10 {
                    return Err(SceneError::NotAZero { label: comp.label.clone(), residual: r });
                }
            }
            ZeroKind::Subvariety { pieces, .. } => {
                let mut rng = ChaCha8Rng::seed_from_u64(0xc0);
                for (chart, param) in pieces {
                    if *chart >= self.charts.len() || param.len() != self.n {
                        return Err(SceneError::Invalid(format!("component '{}' has a malformed piece", comp.label)));
                    }
                    for _ in 0..20 {
                        let tau = [Complex64::from_polar(rng.random_range(0.0..2.0), rng.random_range(0.0..std::f64::consts::TAU))];
                        let Ok(z) = param.iter().map(|e| e.eval(&tau)).collect::<Result<Vec<_>, _>>() else { continue };
                        if let Some(r) = residual(*chart, &z) {
                            if r > 1e-10 {
                                return Err(SceneError::NotAZero { label: comp.label.clone(), residual: r });
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Points among the declared components.
    pub fn point_components(&self) -> impl Iterator<Item = (&ZeroComponent, &Point)> {
        self.components.iter().filter_map(|c| c.as_point().map(|p| (c, p)))
    }

    pub fn component(&self, label: &str) -> Option<&ZeroComponent> {
        self.components.iter().find(|c| c.label == label)
    }
}

#[cfg(test)]
mod tests;
