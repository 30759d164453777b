//! The fourth-order compact scheme with a fine time step: halving `h`
//! divides the error by about 16.

use fracstep::analysis::errors_against;
use fracstep::{make_test2, solve_compact, solve_scheme, Scheme};

fn main() -> fracstep::Result<()> {
    let problem = make_test2(1.0, 0.9)?;
    let exact = problem
        .exact
        .clone()
        .expect("built-in problem has an exact solution");
    let m = 2000;
    let mut prev: Option<f64> = None;
    for n in [4, 8, 16, 32] {
        let compact = solve_compact(&problem, n, m)?;
        let plain = solve_scheme(Scheme::SecondOrder, &problem, n, m)?;
        let ec = errors_against(&compact, |x, t| exact(x, t)).l2;
        let ep = errors_against(&plain, |x, t| exact(x, t)).l2;
        let ratio = prev.map(|p| format!("{:.2}", p / ec)).unwrap_or_default();
        println!("h = 1/{n:<2}  compact {ec:.6e} {ratio:>6}   second-order {ep:.6e}");
        prev = Some(ec);
    }
    Ok(())
}
