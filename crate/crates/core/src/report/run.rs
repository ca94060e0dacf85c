use super::cache::{digest, Cache, Lookup};
use super::scenario::{load_scenario, IntegratorChoice, Method, MethodSettings, ScenarioFile};
use super::{Deformation, MethodError, ResidueReport, Row, ScenarioInfo, Skipped, Status, Value, Verdict, REPORT_SCHEMA_ID, TOOL_VERSION};
use crate::cycles::{IntegralResult, LevelTrace};
use crate::expr::Point;
use crate::koszul::{residue_boundary, residue_contour_adapted, section_jacobian};
use crate::mq::{residue_mq, MqIntegrator, MC_SIGMAS};
use crate::oracles::{coeff_oracle, point_residue_nondegenerate, OracleError};
use crate::scene::{Projective, Scene, TubeSpec, ZeroKind};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::json;
use std::path::PathBuf;
use std::time::Instant;

/// Command-line adjustments applied on top of the scenario settings.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub nodes: Option<usize>,
    pub budget: Option<usize>,
    pub eps: Option<f64>,
    pub t: Option<f64>,
    pub tol_floor: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scenario: PathBuf,
    /// Methods to run; the scenario's choice when empty.
    pub methods: Vec<Method>,
    pub seed: u64,
    pub overrides: Overrides,
}

impl RunConfig {
    pub fn new(scenario: impl Into<PathBuf>) -> Self {
        RunConfig { scenario: scenario.into(), methods: Vec::new(), seed: 0, overrides: Overrides::default() }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    /// The scenario or the request is invalid; nothing was computed.
    #[error("{0}")]
    Validation(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub file: String,
    pub levels: Vec<LevelTrace>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub report: ResidueReport,
    pub traces: Vec<Trace>,
}

/// Coordinates of `q` in `chart`, when it lies in that chart.
fn in_chart(sc: &Scene, q: &Point, chart: usize) -> Option<Vec<Complex64>> {
    if q.chart == chart {
        return Some(q.coords.clone());
    }
    sc.projective.as_ref()?;
    let x = Projective::from_chart(q.chart, &q.coords);
    (x[chart].norm() > 1e-12).then(|| Projective::to_chart(chart, &x))
}

/// Default tube size around a point: a quarter, shrunk to stay clear of
/// every other zero component visible from the point's chart.
fn default_radius(sc: &Scene, p: &Point) -> f64 {
    let mut nearest = f64::INFINITY;
    for comp in &sc.components {
        match &comp.kind {
            ZeroKind::Point(q) => {
                if let Some(c) = in_chart(sc, q, p.chart) {
                    let d = c.iter().zip(&p.coords).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
                    if d > 0.0 {
                        nearest = nearest.min(d);
                    }
                }
            }
            ZeroKind::Subvariety { tube: TubeSpec::ProjectiveHyperplane { index }, .. } => {
                if *index != p.chart {
                    nearest = nearest.min(p.coords[Projective::coord_index(p.chart, *index)].norm());
                }
            }
        }
    }
    0.25f64.min(0.4 * nearest)
}

/// Torus size for the Jacobian-adapted contour, whose physical extent is
/// `δ·√n·‖J⁻¹‖` in the chart coordinates.
fn default_delta(sc: &Scene, p: &Point) -> f64 {
    let r = default_radius(sc, p);
    let n = sc.n;
    let jac = section_jacobian(sc, p.chart);
    let mut m = nalgebra::DMatrix::<Complex64>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            match jac[i][j].eval(&p.coords) {
                Ok(v) => m[(i, j)] = v,
                Err(_) => return r,
            }
        }
    }
    if m.determinant().norm() <= 1e-8 {
        return r;
    }
    match m.try_inverse() {
        Some(inv) => r / ((n as f64).sqrt() * inv.norm()),
        None => r,
    }
}

const SUBVARIETY_EPS: f64 = 0.05;

fn apply(settings: &MethodSettings, o: &Overrides, seed: u64) -> MethodSettings {
    let mut s = settings.clone();
    if let Some(n) = o.nodes {
        s.contour.quadrature.nodes = n;
        s.boundary.quadrature.nodes = n;
        s.mq.quadrature.nodes = n;
    }
    if let Some(b) = o.budget {
        s.mq.monte_carlo.budget = b;
    }
    if let Some(e) = o.eps {
        s.contour.delta = Some(e);
        s.boundary.eps = Some(e);
    }
    if let Some(t) = o.t {
        s.mq.t = t;
    }
    s.mq.monte_carlo.seed = seed;
    s
}

fn integrator(s: &MethodSettings, n: usize) -> MqIntegrator {
    match s.mq.integrator {
        IntegratorChoice::Ball => MqIntegrator::Ball(s.mq.quadrature.clone()),
        IntegratorChoice::MonteCarlo => MqIntegrator::MonteCarlo(s.mq.monte_carlo.clone()),
        IntegratorChoice::Auto if n == 1 => MqIntegrator::Ball(s.mq.quadrature.clone()),
        IntegratorChoice::Auto => MqIntegrator::MonteCarlo(s.mq.monte_carlo.clone()),
    }
}

fn default_methods(file: &ScenarioFile, sc: &Scene) -> Vec<Method> {
    let mut out = Vec::new();
    if sc.point_components().next().is_some() {
        out.push(Method::Contour);
    }
    out.push(Method::Boundary);
    if sc.is_affine() {
        out.push(Method::Mq);
    }
    if file.monomial_exponents().is_some() || sc.point_components().next().is_some() {
        out.push(Method::Oracle);
    }
    out
}

/// One requested computation, before it runs.
struct Job {
    component: String,
    method: Method,
    params: serde_json::Value,
    deformation: Option<Deformation>,
    monte_carlo: bool,
    compute: Box<dyn Fn() -> Result<IntegralResult, String>>,
}

fn exact(v: Complex64) -> IntegralResult {
    IntegralResult { value: v, error: 0.0, count: 0, converged: true, trace: Vec::new() }
}

enum Plan {
    Job(Job),
    Skip(Skipped),
}

fn plan(file: &ScenarioFile, sc: &Scene, s: &MethodSettings, methods: &[Method]) -> Vec<Plan> {
    let mut out = Vec::new();
    for &m in methods {
        match m {
            Method::Contour => {
                for comp in &sc.components {
                    let Some(p) = comp.as_point() else {
                        out.push(Plan::Skip(Skipped { component: comp.label.clone(), method: m, reason: "the torus needs a point component".into() }));
                        continue;
                    };
                    let delta = s.contour.delta.unwrap_or_else(|| default_delta(sc, p));
                    let q = s.contour.quadrature.clone();
                    let (sc2, p2) = (sc.clone(), p.clone());
                    out.push(Plan::Job(Job {
                        component: comp.label.clone(),
                        method: m,
                        params: json!({ "delta": delta, "quadrature": q }),
                        deformation: None,
                        monte_carlo: false,
                        compute: Box::new(move || {
                            residue_contour_adapted(&sc2, &p2, delta, &[sc2.weight(p2.chart).clone()], &q).map(|mut v| v.remove(0)).map_err(|e| e.to_string())
                        }),
                    }));
                }
            }
            Method::Boundary => {
                for comp in &sc.components {
                    let eps = s.boundary.eps.unwrap_or_else(|| match &comp.kind {
                        ZeroKind::Point(p) => default_radius(sc, p),
                        ZeroKind::Subvariety { .. } => SUBVARIETY_EPS,
                    });
                    let q = s.boundary.quadrature.clone();
                    let (sc2, label) = (sc.clone(), comp.label.clone());
                    out.push(Plan::Job(Job {
                        component: comp.label.clone(),
                        method: m,
                        params: json!({ "eps": eps, "quadrature": q }),
                        deformation: None,
                        monte_carlo: false,
                        compute: Box::new(move || residue_boundary(&sc2, &label, eps, &q).map_err(|e| e.to_string())),
                    }));
                }
            }
            Method::Mq => {
                let ig = integrator(s, sc.n);
                let t = s.mq.t;
                let params = match &ig {
                    MqIntegrator::Ball(q) => json!({ "t": t, "ball": q }),
                    MqIntegrator::MonteCarlo(mc) => json!({ "t": t, "monte_carlo": mc }),
                };
                let sc2 = sc.clone();
                out.push(Plan::Job(Job {
                    component: "total".into(),
                    method: m,
                    params,
                    deformation: Some(Deformation::ExpT { t }),
                    monte_carlo: ig.is_monte_carlo(),
                    compute: Box::new(move || residue_mq(&sc2, t, &ig).map_err(|e| e.to_string())),
                }));
            }
            Method::Oracle => {
                for comp in &sc.components {
                    let Some(p) = comp.as_point() else {
                        out.push(Plan::Skip(Skipped { component: comp.label.clone(), method: m, reason: "no oracle for positive-dimensional components".into() }));
                        continue;
                    };
                    if let Some(a) = file.monomial_exponents() {
                        let (g, a) = (sc.weight(0).clone(), a.to_vec());
                        out.push(Plan::Job(Job {
                            component: comp.label.clone(),
                            method: m,
                            params: json!({ "oracle": "coefficient" }),
                            deformation: None,
                            monte_carlo: false,
                            compute: Box::new(move || coeff_oracle(&g, &a).map(exact).map_err(|e| e.to_string())),
                        }));
                        continue;
                    }
                    match point_residue_nondegenerate(sc, p) {
                        Err(OracleError::Degenerate { .. }) => out.push(Plan::Skip(Skipped {
                            component: comp.label.clone(),
                            method: m,
                            reason: "degenerate zero: no closed-form residue".into(),
                        })),
                        r => {
                            let r = r.map(exact).map_err(|e| e.to_string());
                            out.push(Plan::Job(Job {
                                component: comp.label.clone(),
                                method: m,
                                params: json!({ "oracle": "jacobian" }),
                                deformation: None,
                                monte_carlo: false,
                                compute: Box::new(move || r.clone()),
                            }));
                        }
                    }
                }
            }
        }
    }
    out
}

fn slug(s: &str) -> String {
    s.chars().map(|c| if c.is_ascii_alphanumeric() { c } else { '_' }).collect()
}

fn tolerance(a: &Row, b: &Row, mc: bool, floor: f64) -> f64 {
    if mc {
        MC_SIGMAS * a.error.hypot(b.error)
    } else {
        floor.max(a.error + b.error)
    }
}

/// Runs a parsed scenario. `path` is recorded in the report only.
pub fn run_file(file: &ScenarioFile, path: Option<&str>, config: &RunConfig, cache: Option<&Cache>) -> Result<RunOutcome, RunError> {
    let sc = file.build().map_err(|e| RunError::Validation(e.to_string()))?;
    let settings = apply(&file.methods, &config.overrides, config.seed);
    let methods: Vec<Method> = if !config.methods.is_empty() {
        config.methods.clone()
    } else if !file.methods.run.is_empty() {
        file.methods.run.clone()
    } else {
        default_methods(file, &sc)
    };
    let mut methods = methods;
    methods.sort();
    methods.dedup();
    if let Some(t) = config.overrides.t {
        if !(t > 0.0 && t.is_finite()) {
            return Err(RunError::Validation(format!("t must be positive, got {t}")));
        }
    }
    let floor = config.overrides.tol_floor.unwrap_or(file.tolerance.floor);
    let scene_json = serde_json::to_string(&file.scene).expect("scene specs serialize");
    let scene_digest = digest(&[&scene_json]);
    let hash = digest(&[&serde_json::to_string(file).expect("scenarios serialize")]);

    let mut rows = Vec::new();
    let mut errors = Vec::new();
    let mut skipped = Vec::new();
    let mut traces = Vec::new();
    let mut mc_rows = std::collections::HashSet::new();
    for item in plan(file, &sc, &settings, &methods) {
        let job = match item {
            Plan::Job(j) => j,
            Plan::Skip(s) => {
                skipped.push(s);
                continue;
            }
        };
        let params_text = serde_json::to_string(&json!({ "component": job.component, "params": job.params })).expect("params serialize");
        let key = cache.map(|c| c.key(&scene_digest, job.method.name(), &params_text));
        let t0 = Instant::now();
        let mut cached = false;
        let mut result = None;
        if let (Some(c), Some(k)) = (cache, &key) {
            match c.lookup(k) {
                Ok(Lookup::Hit(r)) => {
                    cached = true;
                    result = Some(Ok(r));
                }
                Ok(Lookup::Corrupt(why)) => eprintln!("warning: ignoring corrupt cache entry {why}"),
                Ok(Lookup::Miss | Lookup::Stale(_)) => {}
                Err(e) => eprintln!("warning: cache unavailable: {e}"),
            }
        }
        let result = result.unwrap_or_else(|| (job.compute)());
        let wall_seconds = t0.elapsed().as_secs_f64();
        match result {
            Ok(r) => {
                if let (Some(c), Some(k), false) = (cache, &key, cached) {
                    if let Err(e) = c.store(k, &r) {
                        eprintln!("warning: cannot write cache entry: {e}");
                    }
                }
                let trace = (!r.trace.is_empty()).then(|| {
                    let file = format!("traces/{:02}-{}-{}.csv", rows.len(), job.method.name(), slug(&job.component));
                    traces.push(super::Trace { file: file.clone(), levels: r.trace.clone() });
                    file
                });
                if job.monte_carlo {
                    mc_rows.insert((job.component.clone(), job.method));
                }
                rows.push(Row {
                    component: job.component,
                    method: job.method,
                    value: r.value.into(),
                    error: r.error,
                    count: r.count,
                    converged: r.converged,
                    derived: false,
                    deformation: job.deformation,
                    params: job.params,
                    cached,
                    wall_seconds,
                    trace,
                });
            }
            Err(message) => errors.push(MethodError { component: job.component, method: job.method, message }),
        }
    }

    // Totals over components for the per-component methods.
    let labels: Vec<String> = sc.components.iter().map(|c| c.label.clone()).collect();
    for &m in &methods {
        if m == Method::Mq {
            continue;
        }
        let parts: Vec<&Row> = labels.iter().filter_map(|l| rows.iter().find(|r| &r.component == l && r.method == m)).collect();
        if parts.len() != labels.len() || labels.len() < 2 {
            continue;
        }
        let value: Complex64 = parts.iter().map(|r| Complex64::from(r.value)).sum();
        rows.push(Row {
            component: "total".into(),
            method: m,
            value: value.into(),
            error: parts.iter().map(|r| r.error).sum(),
            count: parts.iter().map(|r| r.count).sum(),
            converged: parts.iter().all(|r| r.converged),
            derived: true,
            deformation: None,
            params: json!({}),
            cached: parts.iter().all(|r| r.cached),
            wall_seconds: parts.iter().map(|r| r.wall_seconds).sum(),
            trace: None,
        });
    }

    let mut verdicts = Vec::new();
    let mut components: Vec<String> = labels.clone();
    components.push("total".into());
    for comp in &components {
        let here: Vec<&Row> = rows.iter().filter(|r| &r.component == comp).collect();
        for i in 0..here.len() {
            for j in i + 1..here.len() {
                let (a, b) = (here[i], here[j]);
                let mc = mc_rows.contains(&(a.component.clone(), a.method)) || mc_rows.contains(&(b.component.clone(), b.method));
                let delta = (Complex64::from(a.value) - Complex64::from(b.value)).norm();
                let tol = tolerance(a, b, mc, floor);
                verdicts.push(Verdict { component: comp.clone(), left: a.method, right: Some(b.method), expected: None, delta, tolerance: tol, passed: delta <= tol });
            }
        }
    }
    if sc.projective.is_some() {
        // Residues over a compact manifold sum to zero.
        for r in rows.iter().filter(|r| r.component == "total" && r.method == Method::Boundary) {
            let delta = Complex64::from(r.value).norm();
            let tol = floor.max(r.error);
            verdicts.push(Verdict {
                component: "total".into(),
                left: r.method,
                right: None,
                expected: Some(Value { re: 0.0, im: 0.0 }),
                delta,
                tolerance: tol,
                passed: delta <= tol,
            });
        }
    }

    let status = if !errors.is_empty() {
        Status::MethodFailed
    } else if verdicts.iter().any(|v| !v.passed) {
        Status::CrossCheckFailed
    } else {
        Status::Pass
    };
    let generated_unix = std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let report = ResidueReport {
        schema: REPORT_SCHEMA_ID.into(),
        tool_version: TOOL_VERSION.into(),
        scenario: ScenarioInfo { name: file.name.clone(), path: path.map(str::to_string), hash },
        seed: config.seed,
        methods,
        rows,
        errors,
        skipped,
        verdicts,
        status,
        generated_unix,
    };
    Ok(RunOutcome { report, traces })
}

/// Loads the scenario at `config.scenario` and runs it.
pub fn run(config: &RunConfig, cache: Option<&Cache>) -> Result<RunOutcome, RunError> {
    let file = load_scenario(&config.scenario).map_err(|e| RunError::Validation(e.to_string()))?;
    run_file(&file, Some(&config.scenario.display().to_string()), config, cache)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SweepParam {
    /// Quadrature nodes per axis.
    Nodes,
    /// Monte-Carlo sample budget.
    Budget,
    /// Tube and torus size.
    Eps,
    /// Deformation parameter of `e^{tS}`.
    T,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::Nodes => "nodes",
            SweepParam::Budget => "budget",
            SweepParam::Eps => "eps",
            SweepParam::T => "t",
        }
    }

    fn applies(self, m: Method, monte_carlo: bool) -> bool {
        match self {
            SweepParam::Nodes => matches!(m, Method::Contour | Method::Boundary) || (m == Method::Mq && !monte_carlo),
            SweepParam::Budget => m == Method::Mq && monte_carlo,
            SweepParam::Eps => matches!(m, Method::Contour | Method::Boundary),
            SweepParam::T => m == Method::Mq,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub parameter: String,
    pub value: f64,
    pub component: String,
    pub method: Method,
    pub value_re: f64,
    pub value_im: f64,
    pub error: f64,
    pub count: usize,
}

/// Runs the scenario once per parameter value, keeping the rows of the
/// methods the parameter affects. The status is the worst over all runs.
pub fn sweep(config: &RunConfig, param: SweepParam, values: &[f64], cache: Option<&Cache>) -> Result<(Vec<SweepRow>, Status), RunError> {
    let file = load_scenario(&config.scenario).map_err(|e| RunError::Validation(e.to_string()))?;
    let sc = file.build().map_err(|e| RunError::Validation(e.to_string()))?;
    if values.is_empty() {
        return Err(RunError::Validation("no sweep values".into()));
    }
    let mut methods = if !config.methods.is_empty() {
        config.methods.clone()
    } else if !file.methods.run.is_empty() {
        file.methods.run.clone()
    } else {
        default_methods(&file, &sc)
    };
    let mc = integrator(&file.methods, sc.n).is_monte_carlo();
    methods.retain(|&m| param.applies(m, mc));
    if methods.is_empty() {
        return Err(RunError::Validation(format!("parameter {} does not apply to any enabled method", param.name())));
    }
    let mut out = Vec::new();
    let mut status = Status::Pass;
    for &v in values {
        let mut cfg = config.clone();
        cfg.methods = methods.clone();
        let integral = || -> Result<usize, RunError> {
            if v >= 1.0 && v.fract() == 0.0 && v < 1e12 {
                Ok(v as usize)
            } else {
                Err(RunError::Validation(format!("{} needs positive integers, got {v}", param.name())))
            }
        };
        match param {
            SweepParam::Nodes => cfg.overrides.nodes = Some(integral()?),
            SweepParam::Budget => cfg.overrides.budget = Some(integral()?),
            SweepParam::Eps => cfg.overrides.eps = Some(v),
            SweepParam::T => cfg.overrides.t = Some(v),
        }
        let outcome = run_file(&file, None, &cfg, cache)?;
        status = match (status, outcome.report.status) {
            (Status::MethodFailed, _) | (_, Status::MethodFailed) => Status::MethodFailed,
            (Status::CrossCheckFailed, _) | (_, Status::CrossCheckFailed) => Status::CrossCheckFailed,
            _ => Status::Pass,
        };
        for e in &outcome.report.errors {
            eprintln!("{}={v}: {} {}: {}", param.name(), e.method.name(), e.component, e.message);
        }
        for r in outcome.report.rows {
            out.push(SweepRow {
                parameter: param.name().into(),
                value: v,
                component: r.component,
                method: r.method,
                value_re: r.value.re,
                value_im: r.value.im,
                error: r.error,
                count: r.count,
            });
        }
    }
    Ok((out, status))
}
