//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

use heattrace::verify::{run_all, CheckResult};

fn main() {
    let quick = std::env::args().any(|a| a == "--quick") || std::env::var_os("HEATTRACE_QUICK").is_some();
    let results: Vec<CheckResult> = run_all(quick);
    for r in &results {
        println!("{r}");
    }
    let failed = results.iter().filter(|r| !r.passed).count();
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
