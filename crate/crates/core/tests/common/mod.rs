#![allow(dead_code)]

use fracstep::{make_test1, reference_derivative, FractionalOrder, WeightFunction};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Fourth-order central difference of `f` at `x`.
fn d1(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h)
}

/// Largest gap between the built-in source of the variable-coefficient problem
/// and `∂^{α,λ}u − (k u_x)_x + q u`, with the fractional derivative from
/// quadrature and the flux derivative from nested finite differences.
pub fn manufactured_gap(b: f64, alpha: f64, points: usize, seed: u64) -> f64 {
    let p = make_test1(b, alpha).unwrap();
    let order = FractionalOrder::new(alpha).unwrap();
    let w = WeightFunction::exponential(b).unwrap();
    let exact = p.exact.clone().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..points {
        let x: f64 = rng.gen_range(0.0..=1.0);
        let t: f64 = rng.gen_range(1e-3..=1.0);
        let sx = (std::f64::consts::PI * x).sin();
        // ∂_t u = sin(πx)·t³e^{−bt}
        let ut = |s: f64| sx * s.powi(3) * (-b * s).exp();
        let frac = reference_derivative(ut, order, &w, t, 1e-11).unwrap();
        let h = 1e-3;
        let flux = |y: f64| (p.k)(y, t) * d1(|z| exact(z, t), y, h);
        let lu = d1(flux, x, h) - (p.q)(x, t) * exact(x, t);
        worst = worst.max(((p.f)(x, t) - (frac - lu)).abs());
    }
    worst
}
