//! The self-checks behind `pistonbeam verify`: energy conservation, the
//! discrete energy identity, the lowest clamped eigenvalue and the
//! skew-symmetry of the first-derivative operator.
//!
//! ```text
//! cargo run --release --example verification
//! ```

use pistonbeam::verify::run_all;

fn main() -> pistonbeam::Result<()> {
    let report = run_all()?;
    for c in &report.checks {
        println!(
            "{} {:<24} {:.3e} (limit {:.1e})  {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.value,
            c.threshold,
            c.detail
        );
    }
    std::process::exit(if report.passed { 0 } else { 2 });
}
