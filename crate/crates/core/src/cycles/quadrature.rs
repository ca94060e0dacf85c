//! Tensor-product quadrature of pulled-back forms with refinement-level
//! error estimates.

use super::{Axis, Cycle, CycleError, Piece};
use crate::algebra::TensorForm;
use crate::expr::{Expr, Tape, TapeScratch};
use gauss_quad::legendre::GaussLegendre;
use num_complex::Complex64;
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::io::Write;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    /// Trapezoid on periodic axes, Gauss–Legendre on intervals.
    #[default]
    Product,
    /// Trapezoid everywhere (composite on intervals).
    TrapezoidPeriodic,
    /// Gauss–Legendre everywhere, periodic axes treated as `[0, 2π]`.
    GaussLegendre,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct QuadratureSpec {
    /// Base node count per axis (per panel on split intervals).
    pub nodes: usize,
    /// Number of refinement levels; level `ℓ` doubles the nodes `ℓ` times.
    pub levels: usize,
    pub rule: Rule,
    /// Whether periodic axes are refined too. Turning this off is exact
    /// when the integrand is a trigonometric polynomial of known degree in
    /// the angles and the node count exceeds it.
    pub refine_periodic: bool,
    /// Refinement difference above which the result is flagged unconverged.
    pub tol: f64,
    /// Node counts for the periodic axes in axis order, overriding `nodes`.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub periodic_nodes: Vec<usize>,
    /// Equal panels per interval segment, each with `nodes` points.
    pub panels: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec { nodes: 16, levels: 2, rule: Rule::Product, refine_periodic: true, tol: 1e-8, periodic_nodes: Vec::new(), panels: 1 }
    }
}

impl QuadratureSpec {
    pub fn new(nodes: usize) -> Self {
        QuadratureSpec { nodes, ..Default::default() }
    }

    pub fn levels(mut self, levels: usize) -> Self {
        self.levels = levels;
        self
    }

    pub fn tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn fixed_periodic(mut self) -> Self {
        self.refine_periodic = false;
        self
    }

    /// Fixed node counts on the periodic axes, for integrands that are
    /// trigonometric polynomials in the angles of known degree.
    pub fn periodic(mut self, nodes: Vec<usize>) -> Self {
        self.periodic_nodes = nodes;
        self.refine_periodic = false;
        self
    }

    pub fn panels(mut self, panels: usize) -> Self {
        self.panels = panels;
        self
    }

    pub fn validate(&self) -> Result<(), CycleError> {
        if self.panels == 0 {
            return Err(CycleError::Spec("need at least one panel per interval".into()));
        }
        if self.nodes < 4 || self.periodic_nodes.iter().any(|&k| k < 4) {
            return Err(CycleError::Spec(format!("need at least 4 nodes per axis, got {}", self.nodes)));
        }
        if self.levels < 2 {
            return Err(CycleError::Spec("need at least 2 refinement levels for an error estimate".into()));
        }
        if self.levels > 12 {
            return Err(CycleError::Spec(format!("{} refinement levels is excessive", self.levels)));
        }
        if !(self.tol >= 0.0) {
            return Err(CycleError::Spec("tolerance must be non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct LevelTrace {
    pub level: usize,
    pub value: Complex64,
    /// Difference to the previous level (0 for the first).
    pub error: f64,
    pub nodes: usize,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct IntegralResult {
    pub value: Complex64,
    pub error: f64,
    /// Integrand evaluations summed over all levels (or samples).
    pub count: usize,
    pub converged: bool,
    pub trace: Vec<LevelTrace>,
}

impl IntegralResult {
    pub fn scaled(&self, f: Complex64) -> IntegralResult {
        let mut r = self.clone();
        r.value *= f;
        r.error *= f.norm();
        for t in &mut r.trace {
            t.value *= f;
            t.error *= f.norm();
        }
        r
    }

    /// Convergence trace as CSV with columns `level,value_re,value_im,error`.
    pub fn write_trace_csv<W: Write>(&self, w: W) -> csv::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["level", "value_re", "value_im", "error"])?;
        for t in &self.trace {
            out.write_record([t.level.to_string(), format!("{:e}", t.value.re), format!("{:e}", t.value.im), format!("{:e}", t.error)])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// What to integrate on each chart: a form, plus an optional guard
/// expression that must stay above a threshold at every node.
#[derive(Debug, Clone, Default)]
pub struct Integrand {
    charts: BTreeMap<usize, (TensorForm, Option<Expr>)>,
    guard_min: f64,
}

impl Integrand {
    pub fn new() -> Self {
        Integrand::default()
    }

    pub fn single(form: TensorForm) -> Self {
        Integrand::new().chart(0, form)
    }

    pub fn chart(mut self, chart: usize, form: TensorForm) -> Self {
        let guard = self.charts.remove(&chart).and_then(|(_, g)| g);
        self.charts.insert(chart, (form, guard));
        self
    }

    /// Requires `|guard| > min` at every node of `chart`.
    pub fn guard(mut self, chart: usize, guard: Expr, min: f64) -> Self {
        if let Some(entry) = self.charts.get_mut(&chart) {
            entry.1 = Some(guard);
        }
        self.guard_min = min;
        self
    }
}

fn rule_1d(axis: &Axis, base: usize, level: usize, spec: &QuadratureSpec) -> Vec<(f64, f64)> {
    let scale = 1usize << level;
    match axis {
        Axis::Periodic { nodes } => {
            let n0 = nodes.unwrap_or(base);
            let n = if spec.refine_periodic { n0 * scale } else { n0 };
            if spec.rule == Rule::GaussLegendre {
                return gauss(0.0, 2.0 * PI, n);
            }
            let w = 2.0 * PI / n as f64;
            (0..n).map(|j| (w * j as f64, w)).collect()
        }
        Axis::Interval { lo, hi, breaks } => {
            let mut cuts = vec![*lo];
            cuts.extend(breaks.iter().copied().filter(|b| b > lo && b < hi));
            cuts.push(*hi);
            let k = spec.panels;
            let edges: Vec<f64> = cuts
                .windows(2)
                .flat_map(|w| (0..k).map(move |j| w[0] + (w[1] - w[0]) * j as f64 / k as f64))
                .chain(std::iter::once(*hi))
                .collect();
            let n = base * scale;
            let mut out = Vec::new();
            for p in edges.windows(2) {
                if spec.rule == Rule::TrapezoidPeriodic {
                    let h = (p[1] - p[0]) / n as f64;
                    for j in 0..=n {
                        let w = if j == 0 || j == n { 0.5 * h } else { h };
                        out.push((p[0] + h * j as f64, w));
                    }
                } else {
                    out.extend(gauss(p[0], p[1], n));
                }
            }
            out
        }
    }
}

fn gauss(a: f64, b: f64, n: usize) -> Vec<(f64, f64)> {
    let rule = GaussLegendre::new(n.try_into().expect("positive node count"));
    let (h, m) = (0.5 * (b - a), 0.5 * (b + a));
    rule.as_node_weight_pairs().iter().map(|&(x, w)| (m + h * x, h * w)).collect()
}

/// Determinant of a small complex matrix by partial pivoting, destroying
/// the input.
fn det(a: &mut [Complex64], d: usize) -> Complex64 {
    let mut acc = Complex64::new(1.0, 0.0);
    for col in 0..d {
        let mut piv = col;
        let mut best = a[col * d + col].norm_sqr();
        for r in col + 1..d {
            let v = a[r * d + col].norm_sqr();
            if v > best {
                best = v;
                piv = r;
            }
        }
        if best == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if piv != col {
            for k in 0..d {
                a.swap(col * d + k, piv * d + k);
            }
            acc = -acc;
        }
        let p = a[col * d + col];
        acc *= p;
        let inv = p.inv();
        for r in col + 1..d {
            let f = a[r * d + col] * inv;
            if f != Complex64::new(0.0, 0.0) {
                for k in col + 1..d {
                    let t = a[col * d + k];
                    a[r * d + k] -= f * t;
                }
            }
        }
    }
    acc
}

/// Per-chart compiled integrand: tape outputs are the extra factors, the
/// blade coefficients and the guard, in that order.
struct Compiled {
    tape: Tape,
    rows: Vec<Vec<(usize, bool)>>,
    nfactors: usize,
    guard: bool,
}

fn compile(form: &TensorForm, guard: &Option<Expr>, factors: &[Expr], d: usize) -> Result<Compiled, CycleError> {
    let mut exprs: Vec<Expr> = factors.to_vec();
    let mut rows = Vec::new();
    for (b, coeff) in form.terms() {
        if b.form_degree() as usize != d {
            continue;
        }
        if b.e() != 0 || b.es() != 0 {
            return Err(CycleError::NotScalar { degree: d as u32 });
        }
        let mut r = Vec::new();
        for i in 0..16 {
            if b.dz() >> i & 1 == 1 {
                r.push((i, false));
            }
        }
        for i in 0..16 {
            if b.dzb() >> i & 1 == 1 {
                r.push((i, true));
            }
        }
        rows.push(r);
        exprs.push(coeff.clone());
    }
    if let Some(g) = guard {
        exprs.push(g.clone());
    }
    Ok(Compiled { tape: Tape::compile(&exprs), rows, nfactors: factors.len(), guard: guard.is_some() })
}

const CHUNK: usize = 2048;

fn integrate_piece(
    piece: &Piece,
    n: usize,
    compiled: &Compiled,
    guard_min: f64,
    rules: &[Vec<(f64, f64)>],
) -> Result<Vec<Complex64>, CycleError> {
    let d = piece.dim();
    let total: usize = rules.iter().map(Vec::len).product();
    let nf = compiled.nfactors.max(1);
    let chunks: Vec<usize> = (0..total.div_ceil(CHUNK)).collect();
    let partial: Vec<Result<Vec<Complex64>, CycleError>> = chunks
        .par_iter()
        .map(|&ci| {
            let zero = Complex64::new(0.0, 0.0);
            let mut acc = vec![zero; nf];
            let mut scratch = TapeScratch::default();
            let mut out = vec![zero; compiled.tape.len()];
            let mut z = vec![zero; n];
            let mut jac = vec![zero; n * d];
            let mut u = vec![0.0; d];
            let mut m = vec![zero; d * d];
            for flat in ci * CHUNK..((ci + 1) * CHUNK).min(total) {
                let mut rest = flat;
                let mut w = piece.orientation;
                for a in (0..d).rev() {
                    let len = rules[a].len();
                    let (x, wa) = rules[a][rest % len];
                    rest /= len;
                    u[a] = x;
                    w *= wa;
                }
                piece.eval(&u, &mut z, &mut jac);
                compiled.tape.eval(&z, &mut scratch, &mut out).map_err(|e| CycleError::NonFinite { at: z.clone(), source: e })?;
                if compiled.guard {
                    let g = out[out.len() - 1].norm();
                    if !(g > guard_min) {
                        return Err(CycleError::MeetsZeroLocus { at: z.clone(), value: g, min: guard_min });
                    }
                }
                let mut pulled = zero;
                for (t, row) in compiled.rows.iter().enumerate() {
                    let cf = out[compiled.nfactors + t];
                    if cf == zero {
                        continue;
                    }
                    for (r, &(i, conj)) in row.iter().enumerate() {
                        for j in 0..d {
                            let v = jac[i * d + j];
                            m[r * d + j] = if conj { v.conj() } else { v };
                        }
                    }
                    pulled += cf * det(&mut m, d);
                }
                let pulled = pulled * w;
                if compiled.nfactors == 0 {
                    acc[0] += pulled;
                } else {
                    for (a, f) in acc.iter_mut().zip(&out[..compiled.nfactors]) {
                        *a += f * pulled;
                    }
                }
            }
            Ok(acc)
        })
        .collect();
    let mut acc = vec![Complex64::new(0.0, 0.0); nf];
    for p in partial {
        for (a, v) in acc.iter_mut().zip(p?) {
            *a += v;
        }
    }
    Ok(acc)
}

/// Integrates `factor_i · form` over the cycle for each factor (a single
/// result with no factors). Forms are looked up by the chart of each piece.
pub fn pullback_integrate_batch(integrand: &Integrand, factors: &[Expr], cycle: &Cycle, spec: &QuadratureSpec) -> Result<Vec<IntegralResult>, CycleError> {
    spec.validate()?;
    let overridden;
    let cycle = if spec.periodic_nodes.is_empty() {
        cycle
    } else {
        overridden = cycle.clone().with_periodic_nodes(&spec.periodic_nodes);
        &overridden
    };
    let d = cycle.dim();
    let mut compiled = BTreeMap::new();
    for p in &cycle.pieces {
        if compiled.contains_key(&p.chart) {
            continue;
        }
        let (form, guard) = integrand.charts.get(&p.chart).ok_or_else(|| CycleError::Invalid(format!("no integrand given on chart {}", p.chart)))?;
        if form.dim() != cycle.n {
            return Err(CycleError::Invalid(format!("form dimension {} differs from cycle dimension {}", form.dim(), cycle.n)));
        }
        compiled.insert(p.chart, compile(form, guard, factors, d)?);
    }
    let nf = factors.len().max(1);
    let mut traces: Vec<Vec<LevelTrace>> = vec![Vec::new(); nf];
    let mut count = 0;
    for level in 0..spec.levels {
        let mut values = vec![Complex64::new(0.0, 0.0); nf];
        let mut nodes = 0;
        for p in &cycle.pieces {
            let rules: Vec<Vec<(f64, f64)>> = p.axes.iter().map(|a| rule_1d(a, spec.nodes, level, spec)).collect();
            nodes += rules.iter().map(Vec::len).product::<usize>();
            let v = integrate_piece(p, cycle.n, &compiled[&p.chart], integrand.guard_min, &rules)?;
            for (a, b) in values.iter_mut().zip(v) {
                *a += b;
            }
        }
        count += nodes;
        for (t, v) in traces.iter_mut().zip(values) {
            let error = t.last().map_or(0.0, |prev| (v - prev.value).norm());
            t.push(LevelTrace { level, value: v, error, nodes });
        }
    }
    Ok(traces
        .into_iter()
        .map(|trace| {
            let last = trace[trace.len() - 1];
            IntegralResult { value: last.value, error: last.error, count, converged: last.error <= spec.tol, trace }
        })
        .collect())
}

/// Integrates a scalar form over a cycle all of whose pieces lie in one
/// chart (or the same form is meant on every chart).
pub fn pullback_integrate(form: &TensorForm, cycle: &Cycle, spec: &QuadratureSpec) -> Result<IntegralResult, CycleError> {
    let mut ig = Integrand::new();
    for p in &cycle.pieces {
        ig = ig.chart(p.chart, form.clone());
    }
    Ok(pullback_integrate_batch(&ig, &[], cycle, spec)?.remove(0))
}
