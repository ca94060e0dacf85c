//! Built-in scenes: monomial sections, Landau-Ginzburg gradients and the
//! two-parameter family of sections of `O(2) ⊕ O(2)` over `ℙ²`.

use super::{Projective, Scene, SceneError, ZeroComponent};
use crate::expr::{parse_homogeneous, Expr};
use num_complex::Complex64;

/// Single-chart scene on `ℂⁿ` from a section and a weight coefficient.
pub fn affine_scene(name: impl Into<String>, section: Vec<Expr>, weight: Expr, zeros: Vec<Vec<Complex64>>) -> Scene {
    let comps = zeros.into_iter().enumerate().map(|(i, z)| ZeroComponent::point(format!("p{i}"), 0, z)).collect();
    Scene::affine(name, section, weight).with_components(comps)
}

/// `s = (z_1^{a_1}, …, z_n^{a_n})` with weight coefficient `g`; the zero
/// locus is the origin.
pub fn monomial_scene(a: &[u32], g: Expr) -> Scene {
    let n = a.len();
    let section = a.iter().enumerate().map(|(i, &k)| Expr::z(i).powi(k as i32)).collect();
    let label = a.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(",");
    affine_scene(format!("monomial({label})"), section, g, vec![vec![Complex64::new(0.0, 0.0); n]])
}

/// `V = Ω` trivialized by `dz_i`, `s = dW`, weight coefficient `f`.
/// Zero components are the given critical points.
pub fn lg_scene(name: impl Into<String>, w: Expr, n: usize, f: Expr, critical: Vec<Vec<Complex64>>) -> Result<Scene, SceneError> {
    if !w.is_holomorphic() {
        return Err(SceneError::NotHolomorphic { what: "superpotential".into(), chart: 0 });
    }
    let section = (0..n).map(|i| w.d_z(i)).collect();
    let mut sc = affine_scene(name, section, f, critical);
    sc.superpotential = Some(w);
    Ok(sc)
}

/// Fermat superpotential `Σ z_i^k / k`, whose gradient has a fat point at 0.
pub fn fermat_scene(n: usize, k: u32, f: Expr) -> Scene {
    let w = Expr::sum((0..n).map(|i| Expr::z(i).powi(k as i32).scale(Complex64::new(1.0 / k as f64, 0.0))));
    lg_scene(format!("fermat(n={n},k={k})"), w, n, f, vec![vec![Complex64::new(0.0, 0.0); n]]).expect("holomorphic by construction")
}

/// The family `s_t = (x0 x1, (x0 + t(x1 − x2)) x2)` of sections of
/// `O(2) ⊕ O(2)` over `ℙ²` with weight the linear form
/// `ℓ = a0 x0 + a1 x1 + a2 x2` (a section of `K ⊗ det V = O(1)`).
///
/// For `t ≠ 0` the zeros are `[0,1,0], [1,0,0], [t,0,1], [0,1,1]`; for
/// `t = 0` they are the line `{x0 = 0}` and the point `[1,0,0]`.
pub fn plane_example(t: f64, ell: [Complex64; 3]) -> Scene {
    let section = format!("x0*x1; (x0 + {t}*(x1 - x2))*x2");
    plane_example_with(&section, ell, t).expect("built-in scene is valid")
}

/// Variant of [`plane_example`] with custom homogeneous section text
/// (components separated by `;`). Components are declared for the two
/// standard sections only when `t` identifies them.
pub fn plane_example_with(section: &str, ell: [Complex64; 3], t: f64) -> Result<Scene, SceneError> {
    let parts: Vec<Expr> = section
        .split(';')
        .map(|p| parse_homogeneous(p.trim(), 3).map_err(|e| SceneError::Invalid(e.to_string())))
        .collect::<Result<_, _>>()?;
    let weight = Expr::sum((0..3).map(|m| Expr::z(m).scale(ell[m])));
    let c = |re: f64| Complex64::new(re, 0.0);
    let comps = if t != 0.0 {
        vec![
            Projective::point_component("[0,1,0]", &[c(0.0), c(1.0), c(0.0)]),
            Projective::point_component("[1,0,0]", &[c(1.0), c(0.0), c(0.0)]),
            Projective::point_component(format!("[{t},0,1]"), &[c(t), c(0.0), c(1.0)]),
            Projective::point_component("[0,1,1]", &[c(0.0), c(1.0), c(1.0)]),
        ]
    } else {
        vec![Projective::hyperplane_component("L0", 2, 0), Projective::point_component("[1,0,0]", &[c(1.0), c(0.0), c(0.0)])]
    };
    let proj = Projective { degrees: vec![2, 2], section: parts, weight };
    proj.scene(format!("plane(t={t})"), comps)
}
