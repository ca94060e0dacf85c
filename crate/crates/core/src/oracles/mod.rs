//! Independent ground truth: series coefficients for monomial
//! denominators, sums over nondegenerate critical points, and a Newton
//! solver that locates them.

use crate::expr::{Expr, Point};
use crate::koszul::{det_expr, section_jacobian};
use crate::scene::Scene;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OracleError {
    #[error("weight is not a polynomial in z: {0}")]
    NotPolynomial(String),
    #[error("exponent list has length {got}, expected {want}")]
    Arity { got: usize, want: usize },
    #[error("critical point {at:?} is degenerate (|H| = {h:.3e})")]
    Degenerate { at: Vec<Complex64>, h: f64 },
    #[error("scene has no superpotential")]
    NoSuperpotential,
    #[error("{0}")]
    Eval(String),
}

/// Hessian determinants at or below this are degenerate.
pub const DEGENERATE_HESSIAN: f64 = 1e-8;
/// Newton results closer than this are the same point.
pub const DEDUPE_DISTANCE: f64 = 1e-6;
pub const NEWTON_MAX_ITERS: usize = 100;

/// Residue of `g dz / (z_1^{a_1}⋯z_n^{a_n})` at the origin: the
/// coefficient of `z_1^{a_1−1}⋯z_n^{a_n−1}` in `g`.
pub fn coeff_oracle(g: &Expr, a: &[u32]) -> Result<Complex64, OracleError> {
    let n = a.len();
    if g.max_index().is_some_and(|m| m >= n) {
        return Err(OracleError::Arity { got: n, want: g.max_index().unwrap_or(0) + 1 });
    }
    let coeffs = g.polynomial_coefficients(n).ok_or_else(|| OracleError::NotPolynomial(g.to_string()))?;
    let key: Vec<u32> = a.iter().map(|&k| k.saturating_sub(1)).collect();
    if a.contains(&0) {
        return Ok(Complex64::new(0.0, 0.0));
    }
    Ok(coeffs.get(&key).copied().unwrap_or_default())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriticalPoint {
    pub location: Point,
    pub hessian: Complex64,
    pub nondegenerate: bool,
}

/// Outcome of a Newton search: the deduplicated points and one message
/// per seed that failed to converge.
#[derive(Debug, Clone, PartialEq)]
pub struct NewtonReport {
    pub points: Vec<CriticalPoint>,
    pub warnings: Vec<String>,
}

fn hessian_exprs(w: &Expr, n: usize) -> Vec<Vec<Expr>> {
    (0..n).map(|i| (0..n).map(|j| w.d_z(i).d_z(j)).collect()).collect()
}

fn eval_matrix(m: &[Vec<Expr>], z: &[Complex64]) -> Result<DMatrix<Complex64>, OracleError> {
    let n = m.len();
    let mut out = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            out[(i, j)] = m[i][j].eval(z).map_err(|e| OracleError::Eval(e.to_string()))?;
        }
    }
    Ok(out)
}

/// Newton iteration on `dW = 0` from each seed. Converged points are
/// deduplicated and annotated with `det(∂_i∂_j W)`; seeds that do not
/// reach `|dW| ≤ tol` within the iteration cap are reported and dropped.
pub fn newton_critical_points(w: &Expr, n: usize, seeds: &[Vec<Complex64>], tol: f64) -> Result<NewtonReport, OracleError> {
    if !w.is_holomorphic() {
        return Err(OracleError::Eval("superpotential must be holomorphic".into()));
    }
    let grad: Vec<Expr> = (0..n).map(|i| w.d_z(i)).collect();
    let hess = hessian_exprs(w, n);
    let hdet = det_expr(&hess);
    let mut points: Vec<CriticalPoint> = Vec::new();
    let mut warnings = Vec::new();
    for seed in seeds {
        let mut z = seed.clone();
        let mut converged = false;
        for _ in 0..NEWTON_MAX_ITERS {
            let g = DVector::from_iterator(n, grad.iter().map(|e| e.eval(&z).unwrap_or(Complex64::new(f64::NAN, 0.0))));
            // keep polishing after the residual test passes: at a multiple
            // root the residual drops long before the location settles
            converged |= g.iter().all(|c| c.norm() <= tol);
            let h = eval_matrix(&hess, &z)?;
            let Some(step) = h.lu().solve(&g) else { break };
            if converged && step.norm() <= 1e-13 * (1.0 + z.iter().map(|c| c.norm()).fold(0.0, f64::max)) {
                break;
            }
            for k in 0..n {
                z[k] -= step[k];
            }
            if z.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
                converged = false;
                break;
            }
        }
        if !converged {
            warnings.push(format!("Newton from {seed:?} did not converge in {NEWTON_MAX_ITERS} iterations"));
            continue;
        }
        if points.iter().any(|p| p.location.coords.iter().zip(&z).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt() < DEDUPE_DISTANCE) {
            continue;
        }
        let h = hdet.eval(&z).map_err(|e| OracleError::Eval(e.to_string()))?;
        points.push(CriticalPoint { location: Point::new(0, z), hessian: h, nondegenerate: h.norm() > DEGENERATE_HESSIAN });
    }
    Ok(NewtonReport { points, warnings })
}

/// `Σ_p f(p) / H(p)` over nondegenerate critical points of the scene's
/// superpotential.
pub fn vafa_sum(sc: &Scene, f: &Expr, points: &[CriticalPoint]) -> Result<Complex64, OracleError> {
    let w = sc.superpotential.as_ref().ok_or(OracleError::NoSuperpotential)?;
    let hdet = det_expr(&hessian_exprs(w, sc.n));
    let mut acc = Complex64::new(0.0, 0.0);
    for p in points {
        let h = hdet.eval(&p.location.coords).map_err(|e| OracleError::Eval(e.to_string()))?;
        if h.norm() <= DEGENERATE_HESSIAN {
            return Err(OracleError::Degenerate { at: p.location.coords.clone(), h: h.norm() });
        }
        acc += f.eval(&p.location.coords).map_err(|e| OracleError::Eval(e.to_string()))? / h;
    }
    Ok(acc)
}

/// `ψ-coefficient(p) / det(∂s_i/∂z_j)(p)` at a simple zero.
pub fn point_residue_nondegenerate(sc: &Scene, p: &Point) -> Result<Complex64, OracleError> {
    let eval = |e: &Expr| e.eval(&p.coords).map_err(|e| OracleError::Eval(e.to_string()));
    let jac = eval(&det_expr(&section_jacobian(sc, p.chart)))?;
    if jac.norm() <= DEGENERATE_HESSIAN {
        return Err(OracleError::Degenerate { at: p.coords.clone(), h: jac.norm() });
    }
    Ok(eval(sc.weight(p.chart))? / jac)
}

#[cfg(test)]
mod tests;
