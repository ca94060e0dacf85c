//! Running a scenario file without the command line: load, run every
//! method, print the rows and cross-check verdicts.

use virtual_residue::report::{run, RunConfig};

fn main() {
    let path = std::env::args().nth(1).unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/plane-t03.toml").into());
    let outcome = run(&RunConfig::new(&path), None).unwrap();
    let r = &outcome.report;
    for row in &r.rows {
        println!("{:<10} {:<9} {:.10} ± {:.1e}", row.component, row.method.name(), virtual_residue::Complex64::from(row.value), row.error);
    }
    for v in &r.verdicts {
        let other = v.right.map_or("expected", |m| m.name());
        println!("{:<10} {} vs {other}: |Δ| {:.1e}, tolerance {:.1e}, {}", v.component, v.left.name(), v.delta, v.tolerance, if v.passed { "ok" } else { "FAILED" });
    }
    println!("status {:?}, {} traces", r.status, outcome.traces.len());
}
