//! The `a`, `b` and `c` weights of the discrete derivative, and why the
//! stable evaluation of `b_l` matters for long time runs.

use fracstep::coefficients::{a_coeff, b_coeff, b_coeff_naive, c_coeffs};
use fracstep::{FractionalOrder, WeightFunction};

fn main() -> fracstep::Result<()> {
    let order = FractionalOrder::new(0.5)?;
    println!("alpha = {}, sigma = {}", order.alpha(), order.sigma());
    for l in 0..4 {
        let b = if l == 0 {
            String::from("-")
        } else {
            format!("{:.12}", b_coeff(order, l)?)
        };
        println!("  a_{l} = {:.12}   b_{l} = {b}", a_coeff(order, l));
    }

    let fine = FractionalOrder::new(0.9)?;
    for l in [10, 100, 1000, 2560] {
        let stable = b_coeff(fine, l)?;
        let naive = b_coeff_naive(fine, l);
        println!(
            "  alpha = 0.9, b_{l}: stable {stable:.6e}, plain difference {naive:.6e}, relative gap {:.1e}",
            ((naive - stable) / stable).abs()
        );
    }

    let w = WeightFunction::exponential(1.0)?;
    let table = c_coeffs(order, &w, 0.1, 10)?;
    println!("c_s for lambda = exp(-t), tau = 0.1, j = 10:");
    for (s, c) in table.c.iter().enumerate() {
        println!("  c_{s:<2} = {c:.10}");
    }
    println!(
        "g_s increases with s: {:?}",
        table.g().windows(2).all(|p| p[0] < p[1])
    );
    Ok(())
}
