//! `vres`: run residue scenarios, property suites and parameter sweeps.
//!
//! Exit codes: 0 all cross-checks pass, 1 a cross-check failed, 2 the
//! scenario or request is invalid, 3 a method failed (partial report
//! written).

use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use virtual_residue::checks::{run_suite, SUITES};
use virtual_residue::report::{run, sweep, write_outputs, write_sweep, Cache, Method, Overrides, RunConfig, RunError, SweepParam, CACHE_ENV, EXIT_VALIDATION};

#[derive(Parser)]
#[command(name = "vres", version, about = "Residues of holomorphic sections by contour, Koszul boundary and exponential integrals")]
struct Cli {
    /// Ignore the result cache.
    #[arg(long, global = true)]
    no_cache: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Clone)]
struct Common {
    /// Scenario file (TOML).
    scenario: PathBuf,
    /// Methods to run (repeatable); defaults to the scenario's choice.
    #[arg(long = "method", value_enum)]
    methods: Vec<Method>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Quadrature nodes per axis for every deterministic method.
    #[arg(long)]
    nodes: Option<usize>,
    /// Monte-Carlo sample budget.
    #[arg(long)]
    budget: Option<usize>,
    /// Tube and torus size.
    #[arg(long)]
    eps: Option<f64>,
    /// Deformation parameter of e^{tS}.
    #[arg(long)]
    t: Option<f64>,
    /// Smallest tolerance for deterministic cross-checks.
    #[arg(long)]
    tol: Option<f64>,
}

impl Common {
    fn config(&self) -> RunConfig {
        RunConfig {
            scenario: self.scenario.clone(),
            methods: self.methods.clone(),
            seed: self.seed,
            overrides: Overrides { nodes: self.nodes, budget: self.budget, eps: self.eps, t: self.t, tol_floor: self.tol },
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write report.json plus CSV traces.
    Run {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "vres-out")]
        out: PathBuf,
    },
    /// Run a property suite.
    Check {
        /// algebra, koszul, mq, oracles or all
        suite: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Rerun a scenario over several values of one parameter; CSV on stdout.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        param: SweepParam,
        #[arg(long, num_args = 1.., required = true)]
        values: Vec<f64>,
    },
    /// Maintain the result cache.
    Cache {
        #[command(subcommand)]
        action: CacheAction,
    },
}

#[derive(Subcommand)]
enum CacheAction {
    /// Remove stale and corrupt entries.
    Gc,
}

fn open_cache(disabled: bool) -> Option<Cache> {
    if disabled {
        return None;
    }
    match Cache::from_env() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("warning: {e}; running without a cache");
            None
        }
    }
}

fn code(c: i32) -> ExitCode {
    ExitCode::from(c as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { common, out } => {
            let cache = open_cache(cli.no_cache);
            match run(&common.config(), cache.as_ref()) {
                Ok(outcome) => {
                    for r in &outcome.report.rows {
                        println!("{:<10} {:<9} {:>24.15} ± {:.1e}{}", r.component, r.method.name(), num_complex::Complex64::from(r.value), r.error, if r.cached { " (cached)" } else { "" });
                    }
                    for e in &outcome.report.errors {
                        eprintln!("error: {} {}: {}", e.method.name(), e.component, e.message);
                    }
                    for v in outcome.report.verdicts.iter().filter(|v| !v.passed) {
                        let other = v.right.map(|m| m.name().to_string()).unwrap_or_else(|| "expected".into());
                        eprintln!("cross-check failed: {} {} vs {}: |Δ| {:.2e} > {:.2e}", v.component, v.left.name(), other, v.delta, v.tolerance);
                    }
                    match write_outputs(&outcome, &out) {
                        Ok(p) => println!("report: {}", p.display()),
                        Err(e) => {
                            eprintln!("error: cannot write outputs: {e}");
                            return code(3);
                        }
                    }
                    code(outcome.report.status.exit_code())
                }
                Err(RunError::Validation(msg)) => {
                    eprintln!("error: {msg}");
                    code(EXIT_VALIDATION)
                }
            }
        }
        Command::Check { suite, seed } => match run_suite(&suite, seed) {
            Some(outcomes) => {
                for o in &outcomes {
                    println!("{}", o.line());
                }
                code(if outcomes.iter().all(|o| o.passed()) { 0 } else { 1 })
            }
            None => {
                eprintln!("error: unknown suite '{suite}' (expected one of {})", SUITES.join(", "));
                code(EXIT_VALIDATION)
            }
        },
        Command::Sweep { common, param, values } => {
            let cache = open_cache(cli.no_cache);
            match sweep(&common.config(), param, &values, cache.as_ref()) {
                Ok((rows, status)) => {
                    if let Err(e) = write_sweep(&rows, std::io::stdout().lock()) {
                        eprintln!("error: {e}");
                        return code(3);
                    }
                    code(status.exit_code())
                }
                Err(RunError::Validation(msg)) => {
                    eprintln!("error: {msg}");
                    code(EXIT_VALIDATION)
                }
            }
        }
        Command::Cache { action: CacheAction::Gc } => match Cache::from_env() {
            Ok(Some(c)) => match c.gc() {
                Ok(r) => {
                    println!("{}: kept {}, removed {} stale and {} corrupt", c.dir().display(), r.kept, r.removed_stale, r.removed_corrupt);
                    code(0)
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    code(3)
                }
            },
            Ok(None) => {
                eprintln!("error: set {CACHE_ENV} to the cache directory");
                code(EXIT_VALIDATION)
            }
            Err(e) => {
                eprintln!("error: {e}");
                code(EXIT_VALIDATION)
            }
        },
    }
}
