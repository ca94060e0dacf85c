//! Scenario files: a versioned TOML description of a scene together with
//! method settings.

use crate::algebra::HermitianMetric;
use crate::cycles::{MCSpec, QuadratureSpec};
use crate::expr::{parse, Expr};
use crate::scene::{affine_scene, fermat_scene, lg_scene, monomial_scene, plane_example_with, Chart, ChartData, Scene, Transition, ZeroComponent};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const SCENARIO_SCHEMA: &str = "vres-scenario/1";

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("malformed scenario: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("unsupported scenario schema '{0}' (expected '{SCENARIO_SCHEMA}')")]
    Schema(String),
    #[error("{what}: {message}")]
    Expr { what: String, message: String },
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error(transparent)]
    Scene(#[from] crate::scene::SceneError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub schema: String,
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub scene: SceneSpec,
    #[serde(default)]
    pub methods: MethodSettings,
    #[serde(default)]
    pub tolerance: ToleranceSettings,
}

/// A zero component given by its coordinates on one chart. Coordinates are
/// complex constants such as `"1"`, `"-0.5 + 2i"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZeroSpec {
    pub label: String,
    #[serde(default)]
    pub chart: usize,
    pub point: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChartSpec {
    pub name: String,
    pub section: Vec<String>,
    pub weight: String,
    /// Diagonal of a constant metric; identity when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransitionSpec {
    pub from: usize,
    pub to: usize,
    pub coords: Vec<String>,
    pub frame: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SceneSpec {
    /// Section and weight on `ℂⁿ`; the dimension is the number of section
    /// components.
    Affine {
        section: Vec<String>,
        weight: String,
        #[serde(default)]
        zeros: Vec<ZeroSpec>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        metric: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        c0: Option<f64>,
    },
    /// `s = (z_1^{a_1}, …, z_n^{a_n})`.
    Monomial {
        exponents: Vec<u32>,
        #[serde(default = "one")]
        weight: String,
    },
    /// `s = dW` with the given critical points as zeros.
    Lg {
        superpotential: String,
        dimension: usize,
        #[serde(default = "one")]
        weight: String,
        critical: Vec<Vec<String>>,
    },
    /// `W = Σ z_i^k / k`.
    Fermat {
        dimension: usize,
        degree: u32,
        #[serde(default = "one")]
        weight: String,
    },
    /// The family on `ℙ²` with weight `ℓ = a0 x0 + a1 x1 + a2 x2`.
    Plane {
        t: f64,
        weight: [String; 3],
        #[serde(default, skip_serializing_if = "Option::is_none")]
        section: Option<String>,
    },
    /// Several charts glued by transitions; zeros must be points.
    Atlas {
        dimension: usize,
        charts: Vec<ChartSpec>,
        #[serde(default)]
        transitions: Vec<TransitionSpec>,
        #[serde(default)]
        zeros: Vec<ZeroSpec>,
    },
}

fn one() -> String {
    "1".into()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Contour,
    Boundary,
    Mq,
    Oracle,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Contour, Method::Boundary, Method::Mq, Method::Oracle];

    pub fn name(self) -> &'static str {
        match self {
            Method::Contour => "contour",
            Method::Boundary => "boundary",
            Method::Mq => "mq",
            Method::Oracle => "oracle",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MethodSettings {
    /// Methods to run; every applicable one when empty.
    pub run: Vec<Method>,
    pub contour: ContourSettings,
    pub boundary: BoundarySettings,
    pub mq: MqSettings,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ContourSettings {
    /// Torus size; defaults to a fraction of the distance to the nearest
    /// other zero.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    pub quadrature: QuadratureSpec,
}

impl Default for ContourSettings {
    fn default() -> Self {
        ContourSettings { delta: None, quadrature: QuadratureSpec::new(32) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundarySettings {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    pub quadrature: QuadratureSpec,
}

impl Default for BoundarySettings {
    fn default() -> Self {
        BoundarySettings { eps: None, quadrature: QuadratureSpec::new(24) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IntegratorChoice {
    /// Ball quadrature in dimension one, Monte Carlo above.
    #[default]
    Auto,
    Ball,
    MonteCarlo,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MqSettings {
    /// Deformation parameter of `e^{tS}`.
    pub t: f64,
    pub integrator: IntegratorChoice,
    pub quadrature: QuadratureSpec,
    pub monte_carlo: MCSpec,
}

impl Default for MqSettings {
    fn default() -> Self {
        MqSettings { t: 1.0, integrator: IntegratorChoice::Auto, quadrature: QuadratureSpec::new(32).levels(3).tol(1e-9), monte_carlo: MCSpec::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToleranceSettings {
    /// Smallest tolerance for deterministic cross-checks.
    pub floor: f64,
}

impl Default for ToleranceSettings {
    fn default() -> Self {
        ToleranceSettings { floor: 1e-6 }
    }
}

/// Reads and parses a scenario file without building the scene.
pub fn load_scenario(path: &Path) -> Result<ScenarioFile, ScenarioError> {
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Read { path: path.display().to_string(), source })?;
    parse_scenario(&text)
}

pub fn parse_scenario(text: &str) -> Result<ScenarioFile, ScenarioError> {
    let file: ScenarioFile = toml::from_str(text)?;
    if file.schema != SCENARIO_SCHEMA {
        return Err(ScenarioError::Schema(file.schema));
    }
    Ok(file)
}

fn expr(text: &str, n: usize, what: impl Fn() -> String) -> Result<Expr, ScenarioError> {
    parse(text, n).map_err(|e| ScenarioError::Expr { what: what(), message: e.to_string() })
}

fn constant(text: &str, what: impl Fn() -> String) -> Result<Complex64, ScenarioError> {
    let e = expr(text, 0, &what)?;
    e.eval(&[]).map_err(|err| ScenarioError::Expr { what: what(), message: err.to_string() })
}

fn exprs(texts: &[String], n: usize, what: &str) -> Result<Vec<Expr>, ScenarioError> {
    texts.iter().enumerate().map(|(i, t)| expr(t, n, || format!("{what}[{}]", i + 1))).collect()
}

fn point(z: &ZeroSpec) -> Result<Vec<Complex64>, ScenarioError> {
    z.point.iter().enumerate().map(|(i, t)| constant(t, || format!("zero {} coordinate {}", z.label, i + 1))).collect()
}

fn metric(d: &Option<Vec<f64>>, n: usize) -> Result<HermitianMetric, ScenarioError> {
    match d {
        None => Ok(HermitianMetric::identity(n)),
        Some(d) if d.len() == n && d.iter().all(|&x| x > 0.0 && x.is_finite()) => Ok(HermitianMetric::diagonal(d)),
        Some(d) => Err(ScenarioError::Invalid(format!("metric diagonal {d:?} must have {n} positive entries"))),
    }
}

impl ScenarioFile {
    /// Builds and validates the scene.
    pub fn build(&self) -> Result<Scene, ScenarioError> {
        let sc = match &self.scene {
            SceneSpec::Affine { section, weight, zeros, metric: m, c0 } => {
                let n = section.len();
                let sec = exprs(section, n, "section")?;
                let w = expr(weight, n, || "weight".into())?;
                let pts = zeros.iter().map(point).collect::<Result<Vec<_>, _>>()?;
                let mut sc = affine_scene(&self.name, sec, w, Vec::new());
                sc.components = zeros.iter().zip(pts).map(|(z, p)| ZeroComponent::point(&z.label, 0, p)).collect();
                sc.growth.c0 = *c0;
                sc.with_metric(0, metric(m, n)?)
            }
            SceneSpec::Monomial { exponents, weight } => {
                if exponents.is_empty() || exponents.contains(&0) {
                    return Err(ScenarioError::Invalid("monomial exponents must be positive".into()));
                }
                let w = expr(weight, exponents.len(), || "weight".into())?;
                let mut sc = monomial_scene(exponents, w);
                sc.name = self.name.clone();
                sc
            }
            SceneSpec::Lg { superpotential, dimension, weight, critical } => {
                let n = *dimension;
                let w = expr(superpotential, n, || "superpotential".into())?;
                let f = expr(weight, n, || "weight".into())?;
                let pts = critical
                    .iter()
                    .enumerate()
                    .map(|(i, c)| point(&ZeroSpec { label: format!("p{i}"), chart: 0, point: c.clone() }))
                    .collect::<Result<Vec<_>, _>>()?;
                lg_scene(&self.name, w, n, f, pts)?
            }
            SceneSpec::Fermat { dimension, degree, weight } => {
                if *degree < 2 {
                    return Err(ScenarioError::Invalid("Fermat degree must be at least 2".into()));
                }
                let f = expr(weight, *dimension, || "weight".into())?;
                let mut sc = fermat_scene(*dimension, *degree, f);
                sc.name = self.name.clone();
                sc
            }
            SceneSpec::Plane { t, weight, section } => {
                let mut ell = [Complex64::new(0.0, 0.0); 3];
                for (k, a) in ell.iter_mut().enumerate() {
                    *a = constant(&weight[k], || format!("weight coefficient a{k}"))?;
                }
                let text = section.clone().unwrap_or_else(|| format!("x0*x1; (x0 + {t}*(x1 - x2))*x2"));
                let mut sc = plane_example_with(&text, ell, *t)?;
                sc.name = self.name.clone();
                sc
            }
            SceneSpec::Atlas { dimension, charts, transitions, zeros } => {
                let n = *dimension;
                if charts.is_empty() {
                    return Err(ScenarioError::Invalid("an atlas needs at least one chart".into()));
                }
                let mut sc = Scene::affine(&self.name, vec![Expr::one(); n], Expr::one());
                sc.charts.clear();
                sc.data.clear();
                for (id, c) in charts.iter().enumerate() {
                    sc.charts.push(Chart { id, name: c.name.clone(), coord_names: (1..=n).map(|i| format!("z{i}")).collect() });
                    sc.data.push(ChartData {
                        section: exprs(&c.section, n, &format!("chart {} section", c.name))?,
                        weight: expr(&c.weight, n, || format!("chart {} weight", c.name))?,
                        metric: metric(&c.metric, n)?,
                    });
                }
                for t in transitions {
                    let frame = t.frame.iter().map(|row| exprs(row, n, "transition frame")).collect::<Result<Vec<_>, _>>()?;
                    sc.transitions.push(Transition { from: t.from, to: t.to, coords: exprs(&t.coords, n, "transition coords")?, frame });
                }
                for z in zeros {
                    if z.chart >= charts.len() {
                        return Err(ScenarioError::Invalid(format!("zero {} lives on unknown chart {}", z.label, z.chart)));
                    }
                    sc.components.push(ZeroComponent::point(&z.label, z.chart, point(z)?));
                }
                sc
            }
        };
        sc.validate()?;
        if sc.components.is_empty() {
            return Err(ScenarioError::Invalid("no zero components declared".into()));
        }
        Ok(sc)
    }

    /// Whether the weight is a polynomial against a monomial section, so the
    /// coefficient oracle applies.
    pub fn monomial_exponents(&self) -> Option<&[u32]> {
        match &self.scene {
            SceneSpec::Monomial { exponents, .. } => Some(exponents),
            _ => None,
        }
    }
}
