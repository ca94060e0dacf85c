//! Symbolic expressions in the chart coordinates `z_i` and their conjugates.
//!
//! Expressions are immutable, reference-counted trees kept in a normal form:
//! a sum of products, where each product is a complex coefficient times
//! integer powers of atoms. Atoms are variables, exponentials and sums that
//! carry a negative exponent (reciprocals are negative powers). Constants
//! are folded, like terms are merged and positive powers of sums are
//! multiplied out. No factorization is ever attempted.
//!
//! Because the variables `z_i` and `zb_i` are independent symbols, the
//! Wirtinger derivatives [`Expr::d_z`] and [`Expr::d_zbar`] are plain
//! partial derivatives on this representation.

mod eval;
mod parse;
mod print;

pub use eval::{EvalError, Point, Tape, TapeScratch};
pub use parse::{parse, parse_homogeneous, ParseError};

use num_complex::Complex64;
use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

/// A coordinate symbol: `z_{index+1}` or, when `conj` is set, `zb_{index+1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var {
    pub index: usize,
    pub conj: bool,
}

impl Var {
    pub fn z(index: usize) -> Self {
        Var { index, conj: false }
    }

    pub fn zb(index: usize) -> Self {
        Var { index, conj: true }
    }
}

/// Factor list of a product term: atoms with nonzero integer exponents,
/// sorted by atom order.
pub(crate) type Factors = Vec<(Expr, i32)>;

#[derive(Debug)]
pub(crate) enum Node {
    Const(Complex64),
    Var(Var),
    Exp(Expr),
    /// Two or more terms, none of them a sum, sorted by their factor lists.
    Sum(Vec<Expr>),
    /// Nonzero coefficient times a non-empty factor list. A bare atom with
    /// coefficient one and exponent one is never wrapped.
    Product(Complex64, Factors),
}

struct Inner {
    hash: u64,
    node: Node,
}

/// Immutable symbolic expression in normal form. Cloning is cheap.
#[derive(Clone)]
pub struct Expr(Arc<Inner>);

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

fn mix(h: u64, v: u64) -> u64 {
    splitmix(h ^ splitmix(v))
}

fn canon(c: Complex64) -> Complex64 {
    // folds -0.0 into 0.0 so that equal values hash identically
    Complex64::new(c.re + 0.0, c.im + 0.0)
}

fn hash_c(c: Complex64) -> u64 {
    mix(c.re.to_bits(), c.im.to_bits())
}

impl Node {
    fn rank(&self) -> u8 {
        match self {
            Node::Const(_) => 0,
            Node::Var(_) => 1,
            Node::Exp(_) => 2,
            Node::Sum(_) => 3,
            Node::Product(..) => 4,
        }
    }

    fn compute_hash(&self) -> u64 {
        let mut h = self.rank() as u64;
        match self {
            Node::Const(c) => h = mix(h, hash_c(*c)),
            Node::Var(v) => h = mix(h, (v.index as u64) << 1 | v.conj as u64),
            Node::Exp(e) => h = mix(h, e.0.hash),
            Node::Sum(ts) => {
                for t in ts {
                    h = mix(h, t.0.hash);
                }
            }
            Node::Product(c, fs) => {
                h = mix(h, hash_c(*c));
                for (f, k) in fs {
                    h = mix(mix(h, f.0.hash), *k as i64 as u64);
                }
            }
        }
        h
    }
}

impl Expr {
    fn from_node(node: Node) -> Self {
        let hash = node.compute_hash();
        Expr(Arc::new(Inner { hash, node }))
    }

    pub(crate) fn node(&self) -> &Node {
        &self.0.node
    }

    pub fn constant(c: Complex64) -> Self {
        Expr::from_node(Node::Const(canon(c)))
    }

    pub fn real(x: f64) -> Self {
        Expr::constant(Complex64::new(x, 0.0))
    }

    pub fn zero() -> Self {
        Expr::real(0.0)
    }

    pub fn one() -> Self {
        Expr::real(1.0)
    }

    pub fn imag_unit() -> Self {
        Expr::constant(Complex64::i())
    }

    pub fn var(v: Var) -> Self {
        Expr::from_node(Node::Var(v))
    }

    /// Holomorphic coordinate `z_{index+1}` (0-based index).
    pub fn z(index: usize) -> Self {
        Expr::var(Var::z(index))
    }

    /// Antiholomorphic coordinate `zb_{index+1}` (0-based index).
    pub fn zb(index: usize) -> Self {
        Expr::var(Var::zb(index))
    }

    pub fn as_const(&self) -> Option<Complex64> {
        match self.node() {
            Node::Const(c) => Some(*c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.node(), Node::Const(c) if *c == Complex64::new(0.0, 0.0))
    }

    pub fn is_one(&self) -> bool {
        matches!(self.node(), Node::Const(c) if *c == Complex64::new(1.0, 0.0))
    }

    /// Number of nodes in the tree, counting shared subterms once per use.
    pub fn size(&self) -> usize {
        match self.node() {
            Node::Const(_) | Node::Var(_) => 1,
            Node::Exp(e) => 1 + e.size(),
            Node::Sum(ts) => 1 + ts.iter().map(Expr::size).sum::<usize>(),
            Node::Product(_, fs) => 1 + fs.iter().map(|(f, _)| f.size()).sum::<usize>(),
        }
    }

    /// Visits every variable occurring in the expression.
    pub fn for_each_var(&self, f: &mut impl FnMut(Var)) {
        match self.node() {
            Node::Const(_) => {}
            Node::Var(v) => f(*v),
            Node::Exp(e) => e.for_each_var(f),
            Node::Sum(ts) => ts.iter().for_each(|t| t.for_each_var(f)),
            Node::Product(_, fs) => fs.iter().for_each(|(a, _)| a.for_each_var(f)),
        }
    }

    /// Largest 0-based coordinate index used, if any variable occurs.
    pub fn max_index(&self) -> Option<usize> {
        let mut m = None;
        self.for_each_var(&mut |v| m = Some(m.map_or(v.index, |x: usize| x.max(v.index))));
        m
    }

    /// True when no antiholomorphic variable occurs. Normal forms push
    /// conjugation down to the variables, so this is a syntactic check.
    pub fn is_holomorphic(&self) -> bool {
        let mut ok = true;
        self.for_each_var(&mut |v| ok &= !v.conj);
        ok
    }

    // ---------------------------------------------------------------
    // smart constructors

    fn terms(&self) -> &[Expr] {
        match self.node() {
            Node::Sum(ts) => ts,
            _ => std::slice::from_ref(self),
        }
    }

    /// Splits a non-sum expression into coefficient and factor list.
    fn split_term(&self) -> (Complex64, Factors) {
        match self.node() {
            Node::Const(c) => (*c, Vec::new()),
            Node::Product(c, fs) => (*c, fs.clone()),
            Node::Sum(_) => (Complex64::new(1.0, 0.0), vec![(self.clone(), 1)]),
            _ => (Complex64::new(1.0, 0.0), vec![(self.clone(), 1)]),
        }
    }

    fn build_term(c: Complex64, fs: Factors) -> Expr {
        if c == Complex64::new(0.0, 0.0) {
            return Expr::zero();
        }
        if fs.is_empty() {
            return Expr::constant(c);
        }
        if c == Complex64::new(1.0, 0.0) && fs.len() == 1 && fs[0].1 == 1 {
            return fs[0].0.clone();
        }
        Expr::from_node(Node::Product(canon(c), fs))
    }

    /// Sum of an arbitrary collection of expressions.
    pub fn sum<I: IntoIterator<Item = Expr>>(items: I) -> Expr {
        let mut acc: BTreeMap<Factors, Complex64> = BTreeMap::new();
        for e in items {
            for t in e.terms() {
                let (c, fs) = t.split_term();
                *acc.entry(fs).or_insert(Complex64::new(0.0, 0.0)) += c;
            }
        }
        let mut out: Vec<Expr> = acc
            .into_iter()
            .filter(|(_, c)| *c != Complex64::new(0.0, 0.0))
            .map(|(fs, c)| Expr::build_term(c, fs))
            .collect();
        match out.len() {
            0 => Expr::zero(),
            1 => out.pop().unwrap(),
            _ => Expr::from_node(Node::Sum(out)),
        }
    }

    pub fn add(&self, other: &Expr) -> Expr {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        Expr::sum([self.clone(), other.clone()])
    }

    pub fn sub(&self, other: &Expr) -> Expr {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Expr {
        self.scale(Complex64::new(-1.0, 0.0))
    }

    pub fn scale(&self, c: Complex64) -> Expr {
        if c == Complex64::new(1.0, 0.0) {
            return self.clone();
        }
        if c == Complex64::new(0.0, 0.0) {
            return Expr::zero();
        }
        Expr::sum(self.terms().iter().map(|t| {
            let (k, fs) = t.split_term();
            Expr::build_term(k * c, fs)
        }))
    }

    fn mul_terms(a: &Expr, b: &Expr) -> Expr {
        let (ca, fa) = a.split_term();
        let (cb, fb) = b.split_term();
        let c = ca * cb;
        if c == Complex64::new(0.0, 0.0) {
            return Expr::zero();
        }
        let mut merged: BTreeMap<Expr, i32> = BTreeMap::new();
        for (f, k) in fa.into_iter().chain(fb) {
            *merged.entry(f).or_insert(0) += k;
        }
        let mut fs = Vec::with_capacity(merged.len());
        let mut expand = Vec::new();
        for (f, k) in merged {
            if k == 0 {
                continue;
            }
            if k > 0 && matches!(f.node(), Node::Sum(_)) {
                expand.push((f, k));
            } else {
                fs.push((f, k));
            }
        }
        let mut out = Expr::build_term(c, fs);
        for (f, k) in expand {
            out = out.mul(&f.powi(k));
        }
        out
    }

    pub fn mul(&self, other: &Expr) -> Expr {
        if self.is_zero() || other.is_zero() {
            return Expr::zero();
        }
        if self.is_one() {
            return other.clone();
        }
        if other.is_one() {
            return self.clone();
        }
        if let Some(c) = self.as_const() {
            return other.scale(c);
        }
        if let Some(c) = other.as_const() {
            return self.scale(c);
        }
        let (ta, tb) = (self.terms(), other.terms());
        if ta.len() == 1 && tb.len() == 1 {
            return Expr::mul_terms(&ta[0], &tb[0]);
        }
        // a sum meeting its own reciprocal cancels as an atom instead of
        // being distributed
        if tb.len() == 1 && self.has_reciprocal_factor_in(&tb[0]) {
            return Expr::mul_terms(self, &tb[0]);
        }
        if ta.len() == 1 && other.has_reciprocal_factor_in(&ta[0]) {
            return Expr::mul_terms(&ta[0], other);
        }
        let mut parts = Vec::with_capacity(ta.len() * tb.len());
        for a in ta {
            for b in tb {
                parts.push(Expr::mul_terms(a, b));
            }
        }
        Expr::sum(parts)
    }

    fn has_reciprocal_factor_in(&self, term: &Expr) -> bool {
        match term.node() {
            Node::Product(_, fs) => fs.iter().any(|(f, k)| *k < 0 && f == self),
            _ => false,
        }
    }

    pub fn product<I: IntoIterator<Item = Expr>>(items: I) -> Expr {
        items.into_iter().fold(Expr::one(), |acc, e| acc.mul(&e))
    }

    /// Integer power. Negative exponents are reciprocals and evaluate to an
    /// error wherever the base vanishes.
    pub fn powi(&self, k: i32) -> Expr {
        if k == 0 {
            return Expr::one();
        }
        if k == 1 {
            return self.clone();
        }
        match self.node() {
            Node::Const(c) => {
                if *c != Complex64::new(0.0, 0.0) {
                    Expr::constant(c.powi(k))
                } else if k > 0 {
                    Expr::zero()
                } else {
                    Expr::from_node(Node::Product(Complex64::new(1.0, 0.0), vec![(self.clone(), k)]))
                }
            }
            Node::Sum(_) if k > 0 => {
                let mut base = self.clone();
                let mut acc = Expr::one();
                let mut e = k;
                while e > 0 {
                    if e & 1 == 1 {
                        acc = acc.mul(&base);
                    }
                    e >>= 1;
                    if e > 0 {
                        base = base.mul(&base);
                    }
                }
                acc
            }
            Node::Product(c, fs) => {
                let mut plain = Vec::new();
                let mut expand = Vec::new();
                for (f, e) in fs {
                    let ke = e * k;
                    if ke > 0 && matches!(f.node(), Node::Sum(_)) {
                        expand.push((f.clone(), ke));
                    } else {
                        plain.push((f.clone(), ke));
                    }
                }
                let mut out = Expr::build_term(c.powi(k), plain);
                for (f, e) in expand {
                    out = out.mul(&f.powi(e));
                }
                out
            }
            _ => Expr::from_node(Node::Product(Complex64::new(1.0, 0.0), vec![(self.clone(), k)])),
        }
    }

    pub fn recip(&self) -> Expr {
        self.powi(-1)
    }

    pub fn div(&self, other: &Expr) -> Expr {
        self.mul(&other.recip())
    }

    pub fn exp(&self) -> Expr {
        match self.node() {
            Node::Const(c) => Expr::constant(c.exp()),
            _ => Expr::from_node(Node::Exp(self.clone())),
        }
    }

    /// Complex conjugate, pushed down to the variables.
    pub fn conj(&self) -> Expr {
        match self.node() {
            Node::Const(c) => Expr::constant(c.conj()),
            Node::Var(v) => Expr::var(Var { index: v.index, conj: !v.conj }),
            Node::Exp(e) => e.conj().exp(),
            Node::Sum(ts) => Expr::sum(ts.iter().map(Expr::conj)),
            Node::Product(c, fs) => {
                let mut out = Expr::constant(c.conj());
                for (f, k) in fs {
                    out = out.mul(&f.conj().powi(*k));
                }
                out
            }
        }
    }

    /// Partial derivative with respect to one symbol, treating `z_i` and
    /// `zb_i` as independent.
    pub fn diff(&self, v: Var) -> Expr {
        match self.node() {
            Node::Const(_) => Expr::zero(),
            Node::Var(w) => {
                if *w == v {
                    Expr::one()
                } else {
                    Expr::zero()
                }
            }
            Node::Exp(e) => {
                let de = e.diff(v);
                if de.is_zero() {
                    Expr::zero()
                } else {
                    self.mul(&de)
                }
            }
            Node::Sum(ts) => Expr::sum(ts.iter().map(|t| t.diff(v))),
            Node::Product(c, fs) => {
                let mut parts = Vec::new();
                for (i, (f, k)) in fs.iter().enumerate() {
                    let df = f.diff(v);
                    if df.is_zero() {
                        continue;
                    }
                    let mut rest: Factors = fs
                        .iter()
                        .enumerate()
                        .filter(|(j, _)| *j != i)
                        .map(|(_, p)| p.clone())
                        .collect();
                    if *k != 1 {
                        rest.push((f.clone(), k - 1));
                        rest.sort();
                    }
                    let coeff = *c * Complex64::new(*k as f64, 0.0);
                    let head = Expr::build_term(coeff, rest);
                    parts.push(head.mul(&df));
                }
                Expr::sum(parts)
            }
        }
    }

    /// Wirtinger derivative d/dz_i (0-based index).
    pub fn d_z(&self, index: usize) -> Expr {
        self.diff(Var::z(index))
    }

    /// Wirtinger derivative d/dzbar_i (0-based index).
    pub fn d_zbar(&self, index: usize) -> Expr {
        self.diff(Var::zb(index))
    }

    /// Coefficients of a polynomial in the holomorphic variables, keyed by
    /// exponent vectors of length `n`. Returns `None` if the expression uses
    /// conjugates, reciprocals or exponentials.
    pub fn polynomial_coefficients(&self, n: usize) -> Option<BTreeMap<Vec<u32>, Complex64>> {
        let mut out = BTreeMap::new();
        for t in self.terms() {
            let (c, fs) = t.split_term();
            let mut exps = vec![0u32; n];
            for (f, k) in &fs {
                match f.node() {
                    Node::Var(v) if !v.conj && v.index < n && *k > 0 => exps[v.index] += *k as u32,
                    _ => return None,
                }
            }
            *out.entry(exps).or_insert(Complex64::new(0.0, 0.0)) += c;
        }
        Some(out)
    }

    /// Replaces every variable by the given expressions, `z_i -> subs[i]`
    /// and `zb_i -> conj(subs[i])`.
    pub fn substitute(&self, subs: &[Expr]) -> Expr {
        let conj: Vec<Expr> = subs.iter().map(Expr::conj).collect();
        self.substitute_with(subs, &conj)
    }

    fn substitute_with(&self, subs: &[Expr], conj: &[Expr]) -> Expr {
        match self.node() {
            Node::Const(_) => self.clone(),
            Node::Var(v) => {
                if v.conj {
                    conj[v.index].clone()
                } else {
                    subs[v.index].clone()
                }
            }
            Node::Exp(e) => e.substitute_with(subs, conj).exp(),
            Node::Sum(ts) => Expr::sum(ts.iter().map(|t| t.substitute_with(subs, conj))),
            Node::Product(c, fs) => {
                let mut out = Expr::constant(*c);
                for (f, k) in fs {
                    out = out.mul(&f.substitute_with(subs, conj).powi(*k));
                }
                out
            }
        }
    }
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Expr {}

impl Hash for Expr {
    fn hash<H: Hasher>(&self, state: &mut H) {
        state.write_u64(self.0.hash);
    }
}

impl PartialOrd for Expr {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn cmp_c(a: &Complex64, b: &Complex64) -> Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

impl Ord for Expr {
    fn cmp(&self, other: &Self) -> Ordering {
        if Arc::ptr_eq(&self.0, &other.0) {
            return Ordering::Equal;
        }
        let (a, b) = (self.node(), other.node());
        let r = a.rank().cmp(&b.rank());
        if r != Ordering::Equal {
            return r;
        }
        match (a, b) {
            (Node::Const(x), Node::Const(y)) => cmp_c(x, y),
            (Node::Var(x), Node::Var(y)) => x.cmp(y),
            _ => {
                // composite nodes order by hash first; ties fall back to a
                // structural comparison so that Eq stays exact
                let h = self.0.hash.cmp(&other.0.hash);
                if h != Ordering::Equal {
                    return h;
                }
                match (a, b) {
                    (Node::Exp(x), Node::Exp(y)) => x.cmp(y),
                    (Node::Sum(x), Node::Sum(y)) => x.cmp(y),
                    (Node::Product(cx, fx), Node::Product(cy, fy)) => {
                        cmp_c(cx, cy).then_with(|| fx.cmp(fy))
                    }
                    _ => unreachable!(),
                }
            }
        }
    }
}

impl std::fmt::Debug for Expr {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        std::fmt::Display::fmt(self, f)
    }
}

impl From<f64> for Expr {
    fn from(x: f64) -> Self {
        Expr::real(x)
    }
}

impl From<Complex64> for Expr {
    fn from(c: Complex64) -> Self {
        Expr::constant(c)
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $f:ident) => {
        impl std::ops::$tr<&Expr> for &Expr {
            type Output = Expr;
            fn $m(self, rhs: &Expr) -> Expr {
                Expr::$f(self, rhs)
            }
        }
        impl std::ops::$tr<Expr> for Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                Expr::$f(&self, &rhs)
            }
        }
        impl std::ops::$tr<&Expr> for Expr {
            type Output = Expr;
            fn $m(self, rhs: &Expr) -> Expr {
                Expr::$f(&self, rhs)
            }
        }
    };
}

binop!(Add, add, add);
binop!(Sub, sub, sub);
binop!(Mul, mul, mul);
binop!(Div, div, div);

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(&self)
    }
}

impl std::ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(self)
    }
}

#[cfg(test)]
mod tests;
