//! Discrete weighted Caputo derivative of a smooth function against a
//! quadrature reference, showing second-order convergence in τ.

use fracstep::{order_study, FractionalOrder, SmoothFunction, WeightFunction};

fn main() -> fracstep::Result<()> {
    let cases = [
        ("t3", 0.1, 1.0),
        ("t3", 0.5, 1.0),
        ("t3", 0.9, 1.0),
        ("t3", 0.5, 0.0),
        ("t2", 0.9, 3.0),
        ("t", 0.5, 0.0),
    ];
    for (name, alpha, b) in cases {
        let v = SmoothFunction::by_name(name)?;
        let w = WeightFunction::exponential(b)?;
        let r = order_study(
            &v,
            FractionalOrder::new(alpha)?,
            &w,
            1.0,
            &[20, 40, 80, 160],
            1e-12,
        )?;
        println!("v = {}, alpha = {alpha}, lambda = {}", r.function, r.weight);
        for l in &r.levels {
            let slope = l.slope.map(|s| format!("{s:.3}")).unwrap_or_default();
            println!(
                "  M = {:4}  max error = {:.4e}  slope = {slope}",
                l.m, l.max_error
            );
        }
    }
    Ok(())
}
