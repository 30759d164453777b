//! A problem given as expression strings, the way a run config supplies it.
//! Here `u = t² sin(πx)` with `λ ≡ 1`, `k = 1`, `q = 0`, so
//! `f = (2t^{1.5}/Γ(2.5) + π²t²) sin(πx)` for `α = 0.5`.

use fracstep::analysis::errors_against;
use fracstep::{load_problem, solve_scheme, ProblemConfig, Scheme};

fn main() -> fracstep::Result<()> {
    let cfg: ProblemConfig = serde_json::from_str(
        r#"{
            "problem": "custom",
            "alpha": 0.5,
            "weight": "const",
            "k": "1",
            "q": "0",
            "f": "(2*t^1.5/1.329340388179137 + pi^2*t^2)*sin(pi*x)",
            "u0": "0",
            "exact": "t^2*sin(pi*x)"
        }"#,
    )?;
    let problem = load_problem(&cfg)?;
    println!("coefficients depend on t only: {:?}", problem.kind);
    let exact = problem
        .exact
        .clone()
        .expect("config gives an exact solution");
    for scheme in [Scheme::SecondOrder, Scheme::Compact] {
        for m in [10, 20, 40] {
            let h = solve_scheme(scheme, &problem, 200, m)?;
            let e = errors_against(&h, |x, t| exact(x, t));
            println!(
                "{:>12}, M = {m:2}: max L2 error {:.4e}",
                scheme.label(),
                e.l2
            );
        }
    }
    Ok(())
}
