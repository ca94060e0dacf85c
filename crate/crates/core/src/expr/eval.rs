//! Numerical evaluation: a direct tree walk for one-off use and a compiled
//! register tape for quadrature hot loops.

use super::{Expr, Node};
use num_complex::Complex64;
use std::collections::HashMap;

/// An evaluation site: chart id plus holomorphic coordinates. Conjugate
/// variables are bound to the conjugates of these coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    pub chart: usize,
    pub coords: Vec<Complex64>,
}

impl Point {
    pub fn new(chart: usize, coords: Vec<Complex64>) -> Self {
        Point { chart, coords }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("reciprocal of zero")]
    ReciprocalOfZero,
    #[error("evaluation overflowed to a non-finite value")]
    Overflow,
    #[error("expression uses coordinate {index} but the point has dimension {dim}")]
    Dimension { index: usize, dim: usize },
}

fn ipow(x: Complex64, k: i32) -> Result<Complex64, EvalError> {
    let (mut base, mut e) = if k < 0 {
        if x == Complex64::new(0.0, 0.0) {
            return Err(EvalError::ReciprocalOfZero);
        }
        (x.inv(), k.unsigned_abs())
    } else {
        (x, k as u32)
    };
    let mut acc = Complex64::new(1.0, 0.0);
    while e > 0 {
        if e & 1 == 1 {
            acc *= base;
        }
        e >>= 1;
        if e > 0 {
            base *= base;
        }
    }
    Ok(acc)
}

fn finite(c: Complex64) -> Result<Complex64, EvalError> {
    if c.re.is_finite() && c.im.is_finite() {
        Ok(c)
    } else {
        Err(EvalError::Overflow)
    }
}

impl Expr {
    /// Evaluates at the given coordinates with `zb_i = conj(z_i)`.
    pub fn eval(&self, z: &[Complex64]) -> Result<Complex64, EvalError> {
        finite(self.eval_raw(z)?)
    }

    pub fn eval_at(&self, p: &Point) -> Result<Complex64, EvalError> {
        self.eval(&p.coords)
    }

    fn eval_raw(&self, z: &[Complex64]) -> Result<Complex64, EvalError> {
        Ok(match self.node() {
            Node::Const(c) => *c,
            Node::Var(v) => {
                let x = *z.get(v.index).ok_or(EvalError::Dimension { index: v.index, dim: z.len() })?;
                if v.conj {
                    x.conj()
                } else {
                    x
                }
            }
            Node::Exp(e) => e.eval_raw(z)?.exp(),
            Node::Sum(ts) => {
                let mut acc = Complex64::new(0.0, 0.0);
                for t in ts {
                    acc += t.eval_raw(z)?;
                }
                acc
            }
            Node::Product(c, fs) => {
                let mut acc = *c;
                for (f, k) in fs {
                    acc *= ipow(f.eval_raw(z)?, *k)?;
                }
                acc
            }
        })
    }
}

#[derive(Debug, Clone)]
enum Op {
    Const(Complex64),
    Var(usize),
    ConjVar(usize),
    Exp(u32),
    Sum { start: u32, len: u32 },
    Prod { coeff: Complex64, start: u32, len: u32 },
}

/// A batch of expressions compiled to straight-line register code with
/// common subexpressions shared. Evaluation allocates nothing once a
/// scratch buffer exists.
#[derive(Debug, Clone)]
pub struct Tape {
    ops: Vec<Op>,
    sum_args: Vec<u32>,
    prod_args: Vec<(u32, i32)>,
    outputs: Vec<u32>,
    dim: usize,
}

/// Reusable register file for [`Tape::eval`].
#[derive(Debug, Clone, Default)]
pub struct TapeScratch {
    regs: Vec<Complex64>,
}

struct Builder<'a> {
    tape: &'a mut Tape,
    memo: HashMap<Expr, u32>,
}

impl Builder<'_> {
    fn push(&mut self, op: Op) -> u32 {
        self.tape.ops.push(op);
        (self.tape.ops.len() - 1) as u32
    }

    fn emit(&mut self, e: &Expr) -> u32 {
        if let Some(&r) = self.memo.get(e) {
            return r;
        }
        let r = match e.node() {
            Node::Const(c) => self.push(Op::Const(*c)),
            Node::Var(v) => {
                self.tape.dim = self.tape.dim.max(v.index + 1);
                self.push(if v.conj { Op::ConjVar(v.index) } else { Op::Var(v.index) })
            }
            Node::Exp(a) => {
                let ra = self.emit(a);
                self.push(Op::Exp(ra))
            }
            Node::Sum(ts) => {
                let regs: Vec<u32> = ts.iter().map(|t| self.emit(t)).collect();
                let start = self.tape.sum_args.len() as u32;
                self.tape.sum_args.extend(regs);
                self.push(Op::Sum { start, len: ts.len() as u32 })
            }
            Node::Product(c, fs) => {
                let regs: Vec<(u32, i32)> = fs.iter().map(|(f, k)| (self.emit(f), *k)).collect();
                let start = self.tape.prod_args.len() as u32;
                self.tape.prod_args.extend(regs);
                self.push(Op::Prod { coeff: *c, start, len: fs.len() as u32 })
            }
        };
        self.memo.insert(e.clone(), r);
        r
    }
}

impl Tape {
    pub fn compile(exprs: &[Expr]) -> Tape {
        let mut tape = Tape { ops: Vec::new(), sum_args: Vec::new(), prod_args: Vec::new(), outputs: Vec::new(), dim: 0 };
        let mut b = Builder { tape: &mut tape, memo: HashMap::new() };
        let outs: Vec<u32> = exprs.iter().map(|e| b.emit(e)).collect();
        tape.outputs = outs;
        tape
    }

    pub fn len(&self) -> usize {
        self.outputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outputs.is_empty()
    }

    /// Number of instructions after sharing.
    pub fn op_count(&self) -> usize {
        self.ops.len()
    }

    /// Evaluates every compiled expression at `z`, writing into `out`.
    pub fn eval(&self, z: &[Complex64], scratch: &mut TapeScratch, out: &mut [Complex64]) -> Result<(), EvalError> {
        if z.len() < self.dim {
            return Err(EvalError::Dimension { index: self.dim - 1, dim: z.len() });
        }
        let regs = &mut scratch.regs;
        regs.clear();
        regs.reserve(self.ops.len());
        for op in &self.ops {
            let v = match *op {
                Op::Const(c) => c,
                Op::Var(i) => z[i],
                Op::ConjVar(i) => z[i].conj(),
                Op::Exp(r) => regs[r as usize].exp(),
                Op::Sum { start, len } => {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for &r in &self.sum_args[start as usize..(start + len) as usize] {
                        acc += regs[r as usize];
                    }
                    acc
                }
                Op::Prod { coeff, start, len } => {
                    let mut acc = coeff;
                    for &(r, k) in &self.prod_args[start as usize..(start + len) as usize] {
                        let x = regs[r as usize];
                        acc *= match k {
                            1 => x,
                            2 => x * x,
                            _ => ipow(x, k)?,
                        };
                    }
                    acc
                }
            };
            regs.push(v);
        }
        for (o, &r) in out.iter_mut().zip(&self.outputs) {
            *o = finite(regs[r as usize])?;
        }
        Ok(())
    }

    /// Convenience wrapper returning a fresh vector.
    pub fn eval_vec(&self, z: &[Complex64]) -> Result<Vec<Complex64>, EvalError> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.outputs.len()];
        self.eval(z, &mut TapeScratch::default(), &mut out)?;
        Ok(out)
    }
}
