//! Scenario runs: method orchestration, cross-check verdicts, the
//! versioned JSON report and CSV convergence traces.

pub mod cache;
mod run;
pub mod scenario;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::{Path, PathBuf};

pub use cache::{Cache, CacheError, Lookup, CACHE_ENV, TOOL_VERSION};
pub use run::{run, run_file, sweep, Overrides, RunConfig, RunError, RunOutcome, SweepParam, SweepRow, Trace};
pub use scenario::{load_scenario, parse_scenario, Method, ScenarioError, ScenarioFile, SceneSpec, SCENARIO_SCHEMA};

pub const REPORT_SCHEMA_ID: &str = "vres-report/1";
/// JSON Schema every emitted report validates against.
pub const REPORT_SCHEMA: &str = include_str!("../../schema/report.schema.json");
/// Column header of convergence traces.
pub const TRACE_COLUMNS: [&str; 4] = ["level", "value_re", "value_im", "error"];

/// Overall outcome of a run, with its process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    CrossCheckFailed,
    MethodFailed,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::CrossCheckFailed => 1,
            Status::MethodFailed => 3,
        }
    }
}

/// Exit code for scenario validation failures.
pub const EXIT_VALIDATION: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Value {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for Value {
    fn from(c: Complex64) -> Self {
        Value { re: c.re, im: c.im }
    }
}

impl From<Value> for Complex64 {
    fn from(v: Value) -> Self {
        Complex64::new(v.re, v.im)
    }
}

/// The one deformation a row was computed under. A row never carries
/// both the `e^{tS}` parameter and a rescaled section.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Deformation {
    /// The integrand `ψ⌟e^{tS}`.
    ExpT { t: f64 },
    /// The section replaced by `t·s`.
    SectionScale { t: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    /// Zero component label, or `total` for whole-scene values.
    pub component: String,
    pub method: Method,
    pub value: Value,
    pub error: f64,
    /// Quadrature nodes or Monte-Carlo samples.
    pub count: usize,
    pub converged: bool,
    /// Sum of per-component rows rather than a computation of its own.
    pub derived: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub deformation: Option<Deformation>,
    pub params: serde_json::Value,
    pub cached: bool,
    pub wall_seconds: f64,
    /// Trace file relative to the report, when levels were recorded.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodError {
    pub component: String,
    pub method: Method,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Skipped {
    pub component: String,
    pub method: Method,
    pub reason: String,
}

/// Comparison of two rows, or of one row with a known value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub component: String,
    pub left: Method,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub right: Option<Method>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected: Option<Value>,
    pub delta: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioInfo {
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    /// sha256 of the canonical scenario contents.
    pub hash: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidueReport {
    pub schema: String,
    pub tool_version: String,
    pub scenario: ScenarioInfo,
    pub seed: u64,
    pub methods: Vec<Method>,
    pub rows: Vec<Row>,
    pub errors: Vec<MethodError>,
    pub skipped: Vec<Skipped>,
    pub verdicts: Vec<Verdict>,
    pub status: Status,
    pub generated_unix: u64,
}

impl ResidueReport {
    pub fn row(&self, component: &str, method: Method) -> Option<&Row> {
        self.rows.iter().find(|r| r.component == component && r.method == method)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> std::io::Error + '_ {
    move |e| std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))
}

/// Writes `report.json` and the trace CSVs under `dir`; returns the report
/// path.
pub fn write_outputs(outcome: &RunOutcome, dir: &Path) -> std::io::Result<PathBuf> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    for t in &outcome.traces {
        let p = dir.join(&t.file);
        if let Some(parent) = p.parent() {
            std::fs::create_dir_all(parent).map_err(io_err(parent))?;
        }
        let mut w = csv::Writer::from_path(&p).map_err(|e| std::io::Error::other(format!("{}: {e}", p.display())))?;
        w.write_record(TRACE_COLUMNS)?;
        for l in &t.levels {
            w.write_record([l.level.to_string(), l.value.re.to_string(), l.value.im.to_string(), l.error.to_string()])?;
        }
        w.flush()?;
    }
    let p = dir.join("report.json");
    let mut f = std::fs::File::create(&p).map_err(io_err(&p))?;
    f.write_all(outcome.report.to_json().as_bytes())?;
    f.write_all(b"\n")?;
    Ok(p)
}

/// Writes sweep rows as CSV.
pub fn write_sweep<W: Write>(rows: &[SweepRow], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
