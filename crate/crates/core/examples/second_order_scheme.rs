//! One run of the second-order scheme on the variable-coefficient problem
//! `k = 2 − cos(xt)`, `q = 1 − sin(xt)`, `λ = e^{−t}`, with its error
//! against the exact solution and the a priori estimate.

use fracstep::analysis::errors_against;
use fracstep::{make_test1, solve, stability_audit, Scheme};

fn main() -> fracstep::Result<()> {
    let problem = make_test1(1.0, 0.9)?;
    let exact = problem
        .exact
        .clone()
        .expect("built-in problem has an exact solution");
    for (n, m) in [(30, 10), (60, 20), (120, 40)] {
        let history = solve(&problem, n, m)?;
        let e = errors_against(&history, |x, t| exact(x, t));
        let audit = stability_audit(Scheme::SecondOrder, &history, &problem);
        println!(
            "N = {n:3}, M = {m:2}: max L2 error {:.6e}, max error {:.6e}, estimate ratio {:.2e}",
            e.l2, e.max, audit.worst_ratio
        );
    }
    let history = solve(&problem, 10, 5)?;
    println!("u(x, 1) on N = 10:");
    for (x, u) in history.grid.nodes().iter().zip(history.last()) {
        println!("  {x:.1}  {u:.6}  (exact {:.6})", exact(*x, 1.0));
    }
    Ok(())
}
