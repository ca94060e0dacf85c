//! Property suites over random inputs and the bundled scenes, shared by
//! the `check` command and the acceptance run.

use num_complex::Complex64;
use serde::Serialize;

mod algebra;
mod residues;

pub use algebra::{algebra_suite, check_commutator, check_inequa1, check_inequa2, check_kob, check_mm, check_sign, check_sign1};
pub use residues::{
    check_calibration, check_ladder, check_plane_sum, check_quasi_iso, check_radius_independence, check_trace_of_exact, koszul_suite, mq_suite,
    mq_scenes, oracles_suite, suite_scenes,
};

/// Result of one invariant over many cases.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub suite: String,
    pub name: String,
    pub cases: usize,
    pub failures: usize,
    /// Largest residual, or largest ratio for inequalities.
    pub worst: f64,
    pub note: Option<String>,
}

impl CheckOutcome {
    pub fn passed(&self) -> bool {
        self.failures == 0 && self.cases > 0
    }

    pub fn line(&self) -> String {
        let mut s = format!(
            "{} {}/{}: {} cases, {} failures, worst {:.3e}",
            if self.passed() { "PASS" } else { "FAIL" },
            self.suite,
            self.name,
            self.cases,
            self.failures,
            self.worst
        );
        if let Some(n) = &self.note {
            s.push_str(" (");
            s.push_str(n);
            s.push(')');
        }
        s
    }
}

pub(crate) struct Tally {
    suite: &'static str,
    name: String,
    cases: usize,
    failures: usize,
    worst: f64,
    note: Option<String>,
}

impl Tally {
    pub(crate) fn new(suite: &'static str, name: impl Into<String>) -> Self {
        Tally { suite, name: name.into(), cases: 0, failures: 0, worst: 0.0, note: None }
    }

    /// Records one case with residual `r` against tolerance `tol`.
    pub(crate) fn record(&mut self, r: f64, tol: f64) {
        self.cases += 1;
        if !(r <= tol) {
            self.failures += 1;
        }
        if r.is_nan() || r > self.worst {
            self.worst = r;
        }
    }

    pub(crate) fn fail(&mut self, why: impl std::fmt::Display) {
        self.cases += 1;
        self.failures += 1;
        if self.note.is_none() {
            self.note = Some(why.to_string());
        }
    }

    /// Attaches a remark unless a failure already left one.
    pub(crate) fn note(mut self, s: impl Into<String>) -> Self {
        self.note.get_or_insert_with(|| s.into());
        self
    }

    pub(crate) fn done(self) -> CheckOutcome {
        CheckOutcome { suite: self.suite.into(), name: self.name, cases: self.cases, failures: self.failures, worst: self.worst, note: self.note }
    }
}

/// Runs a named suite: `algebra`, `koszul`, `mq`, `oracles` or `all`.
pub fn run_suite(name: &str, seed: u64) -> Option<Vec<CheckOutcome>> {
    Some(match name {
        "algebra" => algebra_suite(seed, 200),
        "koszul" => koszul_suite(seed),
        "mq" => mq_suite(seed),
        "oracles" => oracles_suite(),
        "all" => {
            let mut v = algebra_suite(seed, 200);
            v.extend(koszul_suite(seed));
            v.extend(mq_suite(seed));
            v.extend(oracles_suite());
            v
        }
        _ => return None,
    })
}

pub const SUITES: [&str; 5] = ["algebra", "koszul", "mq", "oracles", "all"];

pub(crate) fn dist(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm()
}
