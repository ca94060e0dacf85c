//! Hermitian metrics on V and the induced pointwise norms on the algebra.

use super::{Blade, TensorForm};
use crate::expr::{EvalError, Expr};
use nalgebra::DMatrix;
use num_complex::Complex64;
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricError {
    #[error("metric entries are not Hermitian at ({0}, {1})")]
    NotHermitian(usize, usize),
    #[error("metric is not positive definite at the evaluation point")]
    NotPositiveDefinite,
    #[error("metric must be {0}x{0}")]
    Shape(usize),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// `h = Σ h_{ij̄} t^i ⊗ conj(t^j)` in a holomorphic frame, entries as
/// expressions so that non-constant metrics can be declared.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMetric {
    n: usize,
    entries: Vec<Vec<Expr>>,
}

impl HermitianMetric {
    pub fn identity(n: usize) -> Self {
        let entries = (0..n).map(|i| (0..n).map(|j| if i == j { Expr::one() } else { Expr::zero() }).collect()).collect();
        HermitianMetric { n, entries }
    }

    pub fn diagonal(d: &[f64]) -> Self {
        let n = d.len();
        let entries = (0..n).map(|i| (0..n).map(|j| if i == j { Expr::real(d[i]) } else { Expr::zero() }).collect()).collect();
        HermitianMetric { n, entries }
    }

    /// Builds a metric from its entries, checking the Hermitian symmetry
    /// `h_{ij̄} = conj(h_{jī})` symbolically.
    pub fn new(entries: Vec<Vec<Expr>>) -> Result<Self, MetricError> {
        let n = entries.len();
        if entries.iter().any(|r| r.len() != n) {
            return Err(MetricError::Shape(n));
        }
        for i in 0..n {
            for j in i..n {
                if entries[i][j] != entries[j][i].conj() {
                    return Err(MetricError::NotHermitian(i, j));
                }
            }
        }
        Ok(HermitianMetric { n, entries })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn entry(&self, i: usize, j: usize) -> &Expr {
        &self.entries[i][j]
    }

    pub fn is_identity(&self) -> bool {
        (0..self.n).all(|i| (0..self.n).all(|j| if i == j { self.entries[i][j].is_one() } else { self.entries[i][j].is_zero() }))
    }

    pub fn is_constant(&self) -> bool {
        self.entries.iter().flatten().all(|e| e.as_const().is_some())
    }

    /// Numerical matrix `H[i][j] = h_{ij̄}` at `z`, verified positive
    /// definite by a Cholesky factorization.
    pub fn eval(&self, z: &[Complex64]) -> Result<DMatrix<Complex64>, MetricError> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                m[(i, j)] = self.entries[i][j].eval(z)?;
            }
        }
        if !positive_pivots(&m) {
            return Err(MetricError::NotPositiveDefinite);
        }
        Ok(m)
    }

    /// `(s, s)_h = Σ h_{ij̄} s_i conj(s_j)` as an expression.
    pub fn norm_sq_expr(&self, s: &[Expr]) -> Expr {
        let mut parts = Vec::new();
        for i in 0..self.n {
            for j in 0..self.n {
                if !self.entries[i][j].is_zero() {
                    parts.push(self.entries[i][j].mul(&s[i]).mul(&s[j].conj()));
                }
            }
        }
        Expr::sum(parts)
    }
}

/// Positive definiteness of a Hermitian matrix via the pivots of Gaussian
/// elimination without row exchanges (all must be real and positive).
fn positive_pivots(m: &DMatrix<Complex64>) -> bool {
    let mut a = m.clone();
    let n = a.nrows();
    let scale = m.iter().map(|x| x.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    for k in 0..n {
        let p = a[(k, k)];
        if !(p.re > 1e-12 * scale) || p.im.abs() > 1e-9 * scale {
            return false;
        }
        for i in k + 1..n {
            let f = a[(i, k)] / p;
            for j in k..n {
                let v = a[(k, j)];
                a[(i, j)] -= f * v;
            }
        }
    }
    true
}

fn lane_indices(mask: u16) -> Vec<usize> {
    (0..16).filter(|i| mask >> i & 1 == 1).collect()
}

fn minor(m: &DMatrix<Complex64>, rows: &[usize], cols: &[usize]) -> Complex64 {
    if rows.is_empty() {
        return Complex64::new(1.0, 0.0);
    }
    DMatrix::from_fn(rows.len(), cols.len(), |a, b| m[(rows[a], cols[b])]).determinant()
}

/// Pointwise squared norm of `a` at `z`. Form parts use the chart metric in
/// which `dz_i` and `dzb_i` are orthonormal; bundle parts use the metrics
/// induced by `h` on `∧^k V` and `∧^l V*` (Gram determinants).
pub fn norm_sq(a: &TensorForm, h: &HermitianMetric, z: &[Complex64]) -> Result<f64, MetricError> {
    let hm = h.eval(z)?;
    // (e^i, e^j) = h^{ij̄} with Σ_k h^{ik̄} h_{jk̄} = δ, i.e. H* = (H^T)^{-1}
    let hs = hm.transpose().try_inverse().ok_or(MetricError::NotPositiveDefinite)?;
    let mut groups: BTreeMap<(u16, u16), Vec<(Blade, Complex64)>> = BTreeMap::new();
    for (b, c) in a.terms() {
        groups.entry((b.dz(), b.dzb())).or_default().push((*b, c.eval(z)?));
    }
    let mut total = 0.0;
    for terms in groups.values() {
        for (b1, c1) in terms {
            let (k1, l1) = (lane_indices(b1.e()), lane_indices(b1.es()));
            for (b2, c2) in terms {
                if b1.e().count_ones() != b2.e().count_ones() || b1.es().count_ones() != b2.es().count_ones() {
                    continue;
                }
                let (k2, l2) = (lane_indices(b2.e()), lane_indices(b2.es()));
                let g = minor(&hm, &k1, &k2) * minor(&hs, &l1, &l2);
                total += (c1 * c2.conj() * g).re;
            }
        }
    }
    Ok(total.max(0.0))
}
