//! Runs the ten acceptance criteria and prints one PASS/FAIL line per criterion.

use comblab::verify::{run_criterion, VerifyConfig};

fn main() {
    let cfg = VerifyConfig::default();
    let mut failed = Vec::new();
    for n in 1..=10u8 {
        let r = run_criterion(n, &cfg);
        for c in &r.checks {
            println!("    {c}");
        }
        println!("{} {}", r.summary(), r.title);
        if !r.pass() {
            failed.push(n);
        }
    }
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
