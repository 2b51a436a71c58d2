//! Runs every verification criterion and prints the report.

use cotangent::scenario::{verify, VerificationReport};

fn main() {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    let report = VerificationReport::new("full-verify", seed, verify::full_verify(seed), Vec::new());
    print!("{}", report.to_text(true));
    std::process::exit(if report.passed { 0 } else { 1 });
}
