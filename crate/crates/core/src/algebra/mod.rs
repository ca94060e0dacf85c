//! Differential forms on a chart with values in `∧V ⊗ ∧V*`, for a
//! holomorphically trivialized bundle `V` of rank equal to the dimension.
//!
//! Elements are finite sums of [`Blade`]s with [`Expr`] coefficients. The
//! product is the graded-commutative wedge product; `∂̄` acts on
//! coefficients only, because the frame is holomorphic. The three
//! contractions are computed from their defining pairing relations.

mod blade;
mod metric;
pub mod random;

pub use blade::{Blade, Family, MAX_DIM};
pub use metric::{norm_sq, HermitianMetric, MetricError};

use crate::expr::{EvalError, Expr};
use num_complex::Complex64;
use std::collections::BTreeMap;
use std::fmt;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AlgebraError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("contraction needs k >= l, got k = {k}, l = {l}")]
    DegreeViolation { k: u32, l: u32 },
    #[error("argument of {op} has the wrong type: {detail}")]
    TypeViolation { op: &'static str, detail: String },
}

/// An element of the algebra on one chart of dimension `n`.
#[derive(Clone, PartialEq, Eq)]
pub struct TensorForm {
    n: usize,
    terms: BTreeMap<Blade, Expr>,
}

fn signed(e: Expr, sign: i32) -> Expr {
    if sign >= 0 {
        e
    } else {
        e.neg()
    }
}

fn parity_sign(exp: i64) -> i32 {
    if exp.rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

impl TensorForm {
    pub fn zero(n: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&n), "dimension {n} outside 1..={MAX_DIM}");
        TensorForm { n, terms: BTreeMap::new() }
    }

    pub fn term(n: usize, blade: Blade, coeff: Expr) -> Self {
        let mut t = TensorForm::zero(n);
        if let Some(m) = blade.max_index() {
            assert!(m < n, "blade {blade} does not fit dimension {n}");
        }
        if !coeff.is_zero() {
            t.terms.insert(blade, coeff);
        }
        t
    }

    pub fn scalar(n: usize, coeff: Expr) -> Self {
        TensorForm::term(n, Blade::ONE, coeff)
    }

    pub fn one(n: usize) -> Self {
        TensorForm::scalar(n, Expr::one())
    }

    pub fn generator(n: usize, family: Family, index: usize) -> Self {
        TensorForm::term(n, Blade::generator(family, index), Expr::one())
    }

    pub fn dz(n: usize, i: usize) -> Self {
        TensorForm::generator(n, Family::Dz, i)
    }

    pub fn dzb(n: usize, i: usize) -> Self {
        TensorForm::generator(n, Family::Dzb, i)
    }

    pub fn e(n: usize, i: usize) -> Self {
        TensorForm::generator(n, Family::E, i)
    }

    pub fn es(n: usize, i: usize) -> Self {
        TensorForm::generator(n, Family::Es, i)
    }

    /// `Σ c_i e_i`, a section of V.
    pub fn section(coeffs: &[Expr]) -> Self {
        let n = coeffs.len();
        TensorForm::from_terms(n, coeffs.iter().enumerate().map(|(i, c)| (Blade::generator(Family::E, i), c.clone())))
    }

    /// `Σ c_i es_i`, a section of V*.
    pub fn cosection(coeffs: &[Expr]) -> Self {
        let n = coeffs.len();
        TensorForm::from_terms(n, coeffs.iter().enumerate().map(|(i, c)| (Blade::generator(Family::Es, i), c.clone())))
    }

    /// `dz_1 ∧ … ∧ dz_n ⊗ e_1 ∧ … ∧ e_n` times `coeff`: a weight.
    pub fn top_weight(n: usize, coeff: Expr) -> Self {
        let full = ((1u32 << n) - 1) as u16;
        TensorForm::term(n, Blade::new(full, 0, full, 0), coeff)
    }

    /// The blade `dz_1 … dz_n dzb_1 … dzb_n` of scalar top forms.
    pub fn volume_blade(n: usize) -> Blade {
        let full = ((1u32 << n) - 1) as u16;
        Blade::new(full, full, 0, 0)
    }

    pub fn from_terms<I: IntoIterator<Item = (Blade, Expr)>>(n: usize, items: I) -> Self {
        let mut t = TensorForm::zero(n);
        for (b, c) in items {
            t.add_term(b, c);
        }
        t
    }

    fn add_term(&mut self, b: Blade, c: Expr) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&b) {
            Some(v) => {
                let s = v.add(&c);
                if s.is_zero() {
                    self.terms.remove(&b);
                } else {
                    *v = s;
                }
            }
            None => {
                self.terms.insert(b, c);
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Blade, &Expr)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, b: Blade) -> Expr {
        self.terms.get(&b).cloned().unwrap_or_else(Expr::zero)
    }

    fn check_dim(&self, other: &TensorForm) -> Result<(), AlgebraError> {
        if self.n == other.n {
            Ok(())
        } else {
            Err(AlgebraError::DimensionMismatch(self.n, other.n))
        }
    }

    pub fn add(&self, other: &TensorForm) -> Result<TensorForm, AlgebraError> {
        self.check_dim(other)?;
        let mut out = self.clone();
        for (b, c) in &other.terms {
            out.add_term(*b, c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &TensorForm) -> Result<TensorForm, AlgebraError> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> TensorForm {
        self.map_coeffs(|c| c.neg())
    }

    /// Multiplies every coefficient by a scalar function.
    pub fn scale(&self, f: &Expr) -> TensorForm {
        self.map_coeffs(|c| c.mul(f))
    }

    pub fn map_coeffs(&self, f: impl Fn(&Expr) -> Expr) -> TensorForm {
        TensorForm::from_terms(self.n, self.terms.iter().map(|(b, c)| (*b, f(c))))
    }

    /// Keeps the terms whose blade satisfies `pred`.
    pub fn filter(&self, pred: impl Fn(Blade) -> bool) -> TensorForm {
        TensorForm { n: self.n, terms: self.terms.iter().filter(|(b, _)| pred(**b)).map(|(b, c)| (*b, c.clone())).collect() }
    }

    /// The part of form bidegree `(p, q)`.
    pub fn bidegree_part(&self, p: u32, q: u32) -> TensorForm {
        self.filter(|b| b.bidegree() == (p, q))
    }

    /// Coefficient of `dz_1 … dz_n dzb_1 … dzb_n` with no bundle part.
    pub fn top_scalar(&self) -> Expr {
        self.coeff(TensorForm::volume_blade(self.n))
    }

    /// Wedge product.
    pub fn wedge(&self, other: &TensorForm) -> Result<TensorForm, AlgebraError> {
        self.check_dim(other)?;
        let mut acc: BTreeMap<Blade, Vec<Expr>> = BTreeMap::new();
        for (ba, ca) in &self.terms {
            for (bb, cb) in &other.terms {
                if let Some((s, b)) = ba.mul(*bb) {
                    acc.entry(b).or_default().push(signed(ca.mul(cb), s as i32));
                }
            }
        }
        Ok(TensorForm::from_terms(self.n, acc.into_iter().map(|(b, cs)| (b, Expr::sum(cs)))))
    }

    /// Applies the dual pairing of the bundle factors, leaving a scalar form.
    pub fn kappa(&self) -> TensorForm {
        TensorForm::from_terms(self.n, self.terms.iter().filter_map(|(b, c)| b.kappa().map(|k| (k, c.clone()))))
    }

    /// `<a, b> = κ(a b)`.
    pub fn pairing(&self, other: &TensorForm) -> Result<TensorForm, AlgebraError> {
        Ok(self.wedge(other)?.kappa())
    }

    /// `∂̄` acting on coefficients, with `dzb_j` entering from the left.
    pub fn dbar(&self) -> TensorForm {
        let mut acc: BTreeMap<Blade, Vec<Expr>> = BTreeMap::new();
        for (b, c) in &self.terms {
            for j in 0..self.n {
                let d = c.d_zbar(j);
                if d.is_zero() {
                    continue;
                }
                if let Some((s, nb)) = Blade::generator(Family::Dzb, j).mul(*b) {
                    acc.entry(nb).or_default().push(signed(d, s as i32));
                }
            }
        }
        TensorForm::from_terms(self.n, acc.into_iter().map(|(b, cs)| (b, Expr::sum(cs))))
    }

    /// `∂` acting on coefficients, with `dz_j` entering from the left.
    pub fn del(&self) -> TensorForm {
        let mut acc: BTreeMap<Blade, Vec<Expr>> = BTreeMap::new();
        for (b, c) in &self.terms {
            for j in 0..self.n {
                let d = c.d_z(j);
                if d.is_zero() {
                    continue;
                }
                if let Some((s, nb)) = Blade::generator(Family::Dz, j).mul(*b) {
                    acc.entry(nb).or_default().push(signed(d, s as i32));
                }
            }
        }
        TensorForm::from_terms(self.n, acc.into_iter().map(|(b, cs)| (b, Expr::sum(cs))))
    }

    /// The contraction `u ⌟ θ` of a `∧^k V`-valued form against a
    /// `∧^l V*`-valued form, characterized by
    /// `<u⌟θ, ν*> = (-1)^{(i+j)l + (p+q)♯u + l(l-1)/2} <u, θ∧ν*>`.
    pub fn contract_weight(u: &TensorForm, theta: &TensorForm) -> Result<TensorForm, AlgebraError> {
        u.check_dim(theta)?;
        if let Some(b) = u.terms.keys().find(|b| b.es() != 0) {
            return Err(AlgebraError::TypeViolation { op: "contract_weight", detail: format!("left factor has V* part {b}") });
        }
        if let Some(b) = theta.terms.keys().find(|b| b.e() != 0) {
            return Err(AlgebraError::TypeViolation { op: "contract_weight", detail: format!("right factor has V part {b}") });
        }
        let mut acc: BTreeMap<Blade, Vec<Expr>> = BTreeMap::new();
        for (bu, cu) in &u.terms {
            let k = bu.e().count_ones();
            for (bt, ct) in &theta.terms {
                let l = bt.es().count_ones();
                if k < l {
                    return Err(AlgebraError::DegreeViolation { k, l });
                }
                if bt.es() & !bu.e() != 0 {
                    continue;
                }
                let rest = bu.e() & !bt.es();
                let Some((s1, b1)) = bu.mul(*bt) else { continue };
                let Some((s2, b2)) = b1.mul(Blade::new(0, 0, 0, rest)) else { continue };
                let form = b2.kappa().expect("index sets match by construction");
                let (ij, pq, l) = (bu.form_degree() as i64, bt.form_degree() as i64, l as i64);
                let exp = ij * l + pq * bu.degree() as i64 + l * (l - 1) / 2;
                let sign = s1 as i32 * s2 as i32 * parity_sign(exp);
                acc.entry(form.with_lane(Family::E, rest)).or_default().push(signed(cu.mul(ct), sign));
            }
        }
        Ok(TensorForm::from_terms(u.n, acc.into_iter().map(|(b, cs)| (b, Expr::sum(cs)))))
    }

    /// `ι_α w` for a section `α` of V and a `∧^k V*`-valued form `w`,
    /// characterized by `<ν, ι_α w> = <α∧ν, w>`.
    pub fn iota_section(alpha: &TensorForm, w: &TensorForm) -> Result<TensorForm, AlgebraError> {
        alpha.check_dim(w)?;
        if let Some(b) = alpha.terms.keys().find(|b| b.e().count_ones() != 1 || b.es() != 0 || b.form_degree() != 0) {
            return Err(AlgebraError::TypeViolation { op: "iota_section", detail: format!("expected a section of V, found {b}") });
        }
        if let Some(b) = w.terms.keys().find(|b| b.e() != 0) {
            return Err(AlgebraError::TypeViolation { op: "iota_section", detail: format!("expected a V*-valued form, found {b}") });
        }
        let mut acc: BTreeMap<Blade, Vec<Expr>> = BTreeMap::new();
        for (ba, ca) in &alpha.terms {
            for (bw, cw) in &w.terms {
                if ba.e() & bw.es() == 0 {
                    continue;
                }
                let m = bw.es() & !ba.e();
                let k = bw.es().count_ones() as i64;
                let Some((s1, b1)) = ba.mul(Blade::new(0, 0, m, 0)) else { continue };
                let Some((s2, b2)) = b1.mul(*bw) else { continue };
                let form = b2.kappa().expect("index sets match by construction");
                let sign = s1 as i32 * s2 as i32 * parity_sign((k - 1) * bw.form_degree() as i64);
                acc.entry(form.with_lane(Family::Es, m)).or_default().push(signed(ca.mul(cw), sign));
            }
        }
        Ok(TensorForm::from_terms(w.n, acc.into_iter().map(|(b, cs)| (b, Expr::sum(cs)))))
    }

    /// `ι_γ v` for a section `γ` of V* and a `∧^k V`-valued form `v`,
    /// characterized by `<ι_γ v, w> = (-1)^{i+j} <v, γ∧w>`.
    pub fn iota_covector(gamma: &TensorForm, v: &TensorForm) -> Result<TensorForm, AlgebraError> {
        gamma.check_dim(v)?;
        if let Some(b) = gamma.terms.keys().find(|b| b.es().count_ones() != 1 || b.e() != 0 || b.form_degree() != 0) {
            return Err(AlgebraError::TypeViolation { op: "iota_covector", detail: format!("expected a section of V*, found {b}") });
        }
        if let Some(b) = v.terms.keys().find(|b| b.es() != 0) {
            return Err(AlgebraError::TypeViolation { op: "iota_covector", detail: format!("expected a V-valued form, found {b}") });
        }
        let mut acc: BTreeMap<Blade, Vec<Expr>> = BTreeMap::new();
        for (bg, cg) in &gamma.terms {
            for (bv, cv) in &v.terms {
                if bg.es() & bv.e() == 0 {
                    continue;
                }
                let m = bv.e() & !bg.es();
                let Some((s1, b1)) = bv.mul(*bg) else { continue };
                let Some((s2, b2)) = b1.mul(Blade::new(0, 0, 0, m)) else { continue };
                let form = b2.kappa().expect("index sets match by construction");
                let sign = s1 as i32 * s2 as i32 * parity_sign(bv.form_degree() as i64);
                acc.entry(form.with_lane(Family::E, m)).or_default().push(signed(cv.mul(cg), sign));
            }
        }
        Ok(TensorForm::from_terms(v.n, acc.into_iter().map(|(b, cs)| (b, Expr::sum(cs)))))
    }

    /// Evaluates all coefficients at a point.
    pub fn eval(&self, z: &[Complex64]) -> Result<Vec<(Blade, Complex64)>, EvalError> {
        self.terms.iter().map(|(b, c)| Ok((*b, c.eval(z)?))).collect()
    }

    /// Largest coefficient modulus at a point; zero for the zero form.
    pub fn max_abs_at(&self, z: &[Complex64]) -> Result<f64, EvalError> {
        let mut m: f64 = 0.0;
        for c in self.terms.values() {
            m = m.max(c.eval(z)?.norm());
        }
        Ok(m)
    }

    /// Substitutes each coefficient; useful to specialize parameters.
    pub fn substitute(&self, subs: &[Expr]) -> TensorForm {
        self.map_coeffs(|c| c.substitute(subs))
    }
}

impl fmt::Display for TensorForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (b, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({c})*{b}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for TensorForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
