//! A time refinement study for the compact scheme at fixed `h = 1/500`,
//! rendered as CSV and as a Markdown table.

use fracstep::report::{study_csv, study_markdown};
use fracstep::{make_test2, run_study, Coupling, Scheme};

fn main() -> fracstep::Result<()> {
    let problem = make_test2(2.0, 0.5)?;
    let jobs = std::thread::available_parallelism().map_or(1, |n| n.get());
    let report = run_study(
        &problem,
        Scheme::Compact,
        &Coupling::FixedH { n: 500 },
        &[10, 20, 40, 80, 160, 320],
        jobs,
    )?;
    print!("{}", study_csv(&report)?);
    println!();
    print!("{}", study_markdown(&report));
    Ok(())
}
