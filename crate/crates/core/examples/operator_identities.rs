//! Homotopy identities of the cut-off operators and the algebraic lemmas
//! they rest on, on random forms.

use virtual_residue::checks::{algebra_suite, check_quasi_iso, check_trace_of_exact};

fn main() {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(3);
    for o in algebra_suite(seed, 50) {
        println!("{}", o.line());
    }
    println!("{}", check_quasi_iso(seed, 5).line());
    println!("{}", check_trace_of_exact(seed, 3).line());
}
