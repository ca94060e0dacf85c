//! Seeded generators of random polynomial forms for property checks.

use super::{Blade, TensorForm};
use crate::expr::Expr;
use num_complex::Complex64;
use rand::RngExt;

/// Constraints on the blades of a random form; `None` leaves a degree free.
#[derive(Debug, Clone, Copy, Default)]
pub struct Shape {
    pub p: Option<u32>,
    pub q: Option<u32>,
    pub k: Option<u32>,
    pub l: Option<u32>,
}

impl Shape {
    pub fn any() -> Self {
        Shape::default()
    }

    pub fn new(p: Option<u32>, q: Option<u32>, k: Option<u32>, l: Option<u32>) -> Self {
        Shape { p, q, k, l }
    }

    /// Pure bidegree `(p, q)` with values in `∧^k V ⊗ ∧^l V*`.
    pub fn exact(p: u32, q: u32, k: u32, l: u32) -> Self {
        Shape { p: Some(p), q: Some(q), k: Some(k), l: Some(l) }
    }
}

fn random_mask<R: RngExt + ?Sized>(rng: &mut R, n: usize, size: Option<u32>) -> u16 {
    let size = size.unwrap_or_else(|| rng.random_range(0..=n as u32)) as usize;
    let mut idx: Vec<usize> = (0..n).collect();
    for i in 0..size {
        let j = rng.random_range(i..n);
        idx.swap(i, j);
    }
    idx[..size].iter().fold(0u16, |m, &i| m | 1 << i)
}

/// Random polynomial with small Gaussian-integer coefficients, so that
/// algebraic identities among such polynomials hold exactly in floating point.
pub fn random_poly<R: RngExt + ?Sized>(rng: &mut R, n: usize, terms: usize, max_deg: u32, holomorphic: bool) -> Expr {
    let mut parts = Vec::with_capacity(terms);
    for _ in 0..terms {
        let c = Complex64::new(rng.random_range(-3..=3) as f64, rng.random_range(-2..=2) as f64);
        let mut m = Expr::constant(c);
        for _ in 0..rng.random_range(0..=max_deg) {
            let i = rng.random_range(0..n);
            let v = if holomorphic || rng.random_bool(0.5) { Expr::z(i) } else { Expr::zb(i) };
            m = m.mul(&v);
        }
        parts.push(m);
    }
    Expr::sum(parts)
}

/// Random form whose blades obey `shape`, with `terms` attempted blades.
pub fn random_form<R: RngExt + ?Sized>(rng: &mut R, n: usize, shape: Shape, terms: usize, holomorphic: bool) -> TensorForm {
    let mut out = TensorForm::zero(n);
    for _ in 0..terms {
        let b = Blade::new(
            random_mask(rng, n, shape.p),
            random_mask(rng, n, shape.q),
            random_mask(rng, n, shape.k),
            random_mask(rng, n, shape.l),
        );
        let c = random_poly(rng, n, 2, 2, holomorphic);
        out = out.add(&TensorForm::term(n, b, c)).expect("same dimension");
    }
    out
}

/// Random section of V or V* (one-term-per-index, no form part).
pub fn random_section<R: RngExt + ?Sized>(rng: &mut R, n: usize, dual: bool, holomorphic: bool) -> TensorForm {
    let coeffs: Vec<Expr> = (0..n).map(|_| random_poly(rng, n, 2, 2, holomorphic)).collect();
    if dual {
        TensorForm::cosection(&coeffs)
    } else {
        TensorForm::section(&coeffs)
    }
}

/// Random point in the box `[-r, r]^{2n}`.
pub fn random_point<R: RngExt + ?Sized>(rng: &mut R, n: usize, r: f64) -> Vec<Complex64> {
    (0..n).map(|_| Complex64::new(rng.random_range(-r..r), rng.random_range(-r..r))).collect()
}
