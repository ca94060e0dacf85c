//! Atlases of projective space `ℙⁿ` with `V = ⊕ O(d_i)`.
//!
//! Chart `k` is `{x_k ≠ 0}` with coordinates `x_m / x_k` for `m ≠ k` in
//! increasing order, and frame `e_i` corresponding to `x_k^{d_i}`. A
//! homogeneous section `s_i(x)` has chart coefficient `s_i / x_k^{d_i}`, and
//! a weight given by a homogeneous polynomial `W` of degree
//! `Σd_i − n − 1` has chart coefficient `(−1)^k W / x_k^{deg W}`, which is
//! the restriction of `W · Ω` with `Ω = Σ (−1)^m x_m dx_0∧…∧dx̂_m∧…∧dx_n`.

use super::{Chart, ChartData, GrowthData, Scene, SceneError, Transition, TubeSpec, ZeroComponent, ZeroKind};
use crate::algebra::HermitianMetric;
use crate::expr::{Expr, Point};
use num_complex::Complex64;

#[derive(Debug, Clone, PartialEq)]
pub struct Projective {
    pub degrees: Vec<u32>,
    /// Homogeneous section components in `x_0..x_n` (expression indices `0..=n`).
    pub section: Vec<Expr>,
    /// Homogeneous weight polynomial.
    pub weight: Expr,
}

impl Projective {
    pub fn dim(&self) -> usize {
        self.degrees.len()
    }

    /// Position of homogeneous index `m` among the coordinates of chart `k`.
    pub fn coord_index(k: usize, m: usize) -> usize {
        assert_ne!(k, m);
        if m < k {
            m
        } else {
            m - 1
        }
    }

    /// Chart coordinates of a homogeneous point.
    pub fn to_chart(k: usize, x: &[Complex64]) -> Vec<Complex64> {
        (0..x.len()).filter(|&m| m != k).map(|m| x[m] / x[k]).collect()
    }

    /// Homogeneous representative with `x_k = 1`.
    pub fn from_chart(k: usize, u: &[Complex64]) -> Vec<Complex64> {
        let mut x = Vec::with_capacity(u.len() + 1);
        for m in 0..=u.len() {
            x.push(if m == k { Complex64::new(1.0, 0.0) } else { u[Projective::coord_index(k, m)] });
        }
        x
    }

    /// Chart whose coordinate `x_k` has the largest modulus.
    pub fn best_chart(x: &[Complex64]) -> usize {
        (0..x.len()).max_by(|&a, &b| x[a].norm().total_cmp(&x[b].norm())).unwrap_or(0)
    }

    /// Expression for homogeneous coordinate `x_m` in chart `k`.
    fn chart_var(k: usize, m: usize) -> Expr {
        if m == k {
            Expr::one()
        } else {
            Expr::z(Projective::coord_index(k, m))
        }
    }

    /// Restricts a homogeneous expression to chart `k` (`x_k = 1`).
    pub fn restrict(k: usize, n: usize, f: &Expr) -> Expr {
        let subs: Vec<Expr> = (0..=n).map(|m| Projective::chart_var(k, m)).collect();
        f.substitute(&subs)
    }

    /// Builds the scene with identity metrics on every chart and all
    /// pairwise transitions.
    pub fn scene(self, name: impl Into<String>, components: Vec<ZeroComponent>) -> Result<Scene, SceneError> {
        let n = self.dim();
        if self.section.len() != n {
            return Err(SceneError::Invalid("projective section must have one component per degree".into()));
        }
        let mut charts = Vec::new();
        let mut data = Vec::new();
        for k in 0..=n {
            charts.push(Chart {
                id: k,
                name: format!("x{k}!=0"),
                coord_names: (0..=n).filter(|&m| m != k).map(|m| format!("x{m}/x{k}")).collect(),
            });
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            data.push(ChartData {
                section: self.section.iter().map(|s| Projective::restrict(k, n, s)).collect(),
                weight: Projective::restrict(k, n, &self.weight).scale(Complex64::new(sign, 0.0)),
                metric: HermitianMetric::identity(n),
            });
        }
        let mut transitions = Vec::new();
        for a in 0..=n {
            for b in 0..=n {
                if a == b {
                    continue;
                }
                let xb = Projective::chart_var(a, b);
                let coords = (0..=n).filter(|&m| m != b).map(|m| Projective::chart_var(a, m).div(&xb)).collect();
                let frame = (0..n)
                    .map(|i| (0..n).map(|j| if i == j { xb.powi(-(self.degrees[i] as i32)) } else { Expr::zero() }).collect())
                    .collect();
                transitions.push(Transition { from: a, to: b, coords, frame });
            }
        }
        Ok(Scene {
            name: name.into(),
            n,
            charts,
            data,
            transitions,
            superpotential: None,
            components,
            growth: GrowthData::default(),
            projective: Some(self),
        })
    }

    /// Point component at homogeneous coordinates, placed in its best chart.
    pub fn point_component(label: impl Into<String>, x: &[Complex64]) -> ZeroComponent {
        let k = Projective::best_chart(x);
        ZeroComponent { label: label.into(), kind: ZeroKind::Point(Point::new(k, Projective::to_chart(k, x))) }
    }

    /// The hyperplane `{x_index = 0}` of `ℙⁿ`, sampled per chart along the
    /// curve where all remaining chart coordinates equal the parameter.
    pub fn hyperplane_component(label: impl Into<String>, n: usize, index: usize) -> ZeroComponent {
        let pieces = (0..=n)
            .filter(|&j| j != index)
            .map(|j| {
                let coords = (0..=n)
                    .filter(|&m| m != j)
                    .map(|m| if m == index { Expr::zero() } else { Expr::z(0) })
                    .collect();
                (j, coords)
            })
            .collect();
        ZeroComponent { label: label.into(), kind: ZeroKind::Subvariety { pieces, tube: TubeSpec::ProjectiveHyperplane { index } } }
    }
}
