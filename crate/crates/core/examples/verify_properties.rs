//! Runs the coefficient and energy inequality suites over a grid of orders
//! and decay rates and prints the tallies.

use fracstep::properties::{run_verify, VerifyConfig};
use fracstep::report::verify_markdown;

fn main() -> fracstep::Result<()> {
    let cfg = VerifyConfig::default();
    let jobs = std::thread::available_parallelism().map_or(1, |n| n.get());
    let report = run_verify(&cfg, 2024, jobs)?;
    print!("{}", verify_markdown(&report));
    Ok(())
}
