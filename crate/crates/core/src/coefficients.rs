//! The a, b and c coefficient families of the λL2-1σ formula.
//!
//! `a_l` and `b_l` depend only on α and are cached in [`PowerCoefficients`].
//! The convolution weights `c_s` additionally depend on λ, τ and the time
//! level `j`, so a [`CoefficientTable`] is rebuilt for every level.

use crate::error::{Error, Result};
use crate::weights::{FractionalOrder, WeightFunction};

/// Relative accuracy below which the naive difference-of-powers form of
/// `b_l` is replaced by its series expansion.
pub const DEFAULT_CANCELLATION_TOL: f64 = 1e-12;

/// Anything that can hand out `a_l` and `b_l` for a fixed order.
///
/// Exists so the property suites can be run against a deliberately broken
/// source and prove that they notice.
pub trait CoefficientSource {
    fn order(&self) -> FractionalOrder;
    fn a(&self, l: usize) -> f64;
    fn b(&self, l: usize) -> f64;
}

/// `a_0 = σ^{1−α}`, `a_l = (l+σ)^{1−α} − (l−1+σ)^{1−α}`.
///
/// The difference is evaluated as `x^p [(1+u)^p − (1−u)^p]` around the
/// midpoint `x = l + σ − 1/2`, `u = 1/(2x)`, with each bracket term formed by
/// `expm1(p·ln_1p(±u))`; the two terms have opposite signs so nothing cancels.
pub fn a_coeff(order: FractionalOrder, l: usize) -> f64 {
    let p = 1.0 - order.alpha();
    if l == 0 {
        return order.sigma().powf(p);
    }
    let x = l as f64 + order.sigma() - 0.5;
    let u = 0.5 / x;
    x.powf(p) * ((p * u.ln_1p()).exp_m1() - (p * (-u).ln_1p()).exp_m1())
}

/// Textbook evaluation of `a_l`; kept as a cross-check for [`a_coeff`].
pub fn a_coeff_naive(order: FractionalOrder, l: usize) -> f64 {
    let (p, s) = (1.0 - order.alpha(), order.sigma());
    if l == 0 {
        return s.powf(p);
    }
    let l = l as f64;
    (l + s).powf(p) - (l - 1.0 + s).powf(p)
}

/// `b_l = [(l+σ)^{2−α} − (l−1+σ)^{2−α}]/(2−α) − [(l+σ)^{1−α} + (l−1+σ)^{1−α}]/2`, `l ≥ 1`.
pub fn b_coeff(order: FractionalOrder, l: usize) -> Result<f64> {
    if l == 0 {
        return Err(Error::arg("b_l is only defined for l >= 1"));
    }
    Ok(b_coeff_with_tol(order, l, DEFAULT_CANCELLATION_TOL))
}

fn b_coeff_with_tol(order: FractionalOrder, l: usize, tol: f64) -> f64 {
    let alpha = order.alpha();
    let x = l as f64 + order.sigma() - 0.5;
    // The naive form subtracts terms of size ~x^{1−α} to produce a value of
    // size ~α(1−α)x^{−1−α}/12, so it loses a factor 12x²/(α(1−α)).
    let amplification = 12.0 * x * x / (alpha * (1.0 - alpha));
    if amplification * f64::EPSILON > tol {
        b_coeff_series(order, l)
    } else {
        b_coeff_naive(order, l)
    }
}

/// Textbook evaluation of `b_l`, exact for small `l`, cancellation-prone for large `l`.
pub fn b_coeff_naive(order: FractionalOrder, l: usize) -> f64 {
    let (alpha, s) = (order.alpha(), order.sigma());
    let l = l as f64;
    let (hi, lo) = (l + s, l - 1.0 + s);
    (hi.powf(2.0 - alpha) - lo.powf(2.0 - alpha)) / (2.0 - alpha)
        - 0.5 * (hi.powf(1.0 - alpha) + lo.powf(1.0 - alpha))
}

/// Binomial-series form of `b_l` about the interval midpoint:
/// `b_l = −x^{1−α} Σ_{m even ≥ 2} C(1−α, m) u^m m/(m+1)` with `x = l+σ−1/2`, `u = 1/(2x)`.
/// Every term is positive, so the sum is free of cancellation.
pub fn b_coeff_series(order: FractionalOrder, l: usize) -> f64 {
    let p = 1.0 - order.alpha();
    let x = l as f64 + order.sigma() - 0.5;
    let u = 0.5 / x;
    let u2 = u * u;
    // C(p, m) u^m, advanced two orders at a time.
    let mut binom_pow = 1.0;
    let mut sum = 0.0;
    let mut m = 0usize;
    loop {
        let (m1, m2) = ((m + 1) as f64, (m + 2) as f64);
        binom_pow *= (p - m as f64) * (p - m1) / (m1 * m2) * u2;
        m += 2;
        let term = binom_pow * m as f64 / (m as f64 + 1.0);
        sum += term;
        if term.abs() <= f64::EPSILON * 0.25 * sum.abs() || m > 400 {
            break;
        }
    }
    -x.powf(p) * sum
}

/// Lazily extended cache of `a_l` and `b_l` for one fractional order.
#[derive(Debug, Clone)]
pub struct PowerCoefficients {
    order: FractionalOrder,
    tol: f64,
    a: Vec<f64>,
    // b[0] is a placeholder; b_0 is never used.
    b: Vec<f64>,
}

impl PowerCoefficients {
    pub fn new(order: FractionalOrder) -> Self {
        Self::with_tolerance(order, DEFAULT_CANCELLATION_TOL)
    }

    /// `tol` is the relative accuracy the naive `b_l` formula must be able to
    /// deliver before the series form takes over.
    pub fn with_tolerance(order: FractionalOrder, tol: f64) -> Self {
        Self {
            order,
            tol,
            a: Vec::new(),
            b: vec![f64::NAN],
        }
    }

    /// Makes `a_0..=a_l` and `b_1..=b_l` available.
    pub fn extend_to(&mut self, l: usize) {
        while self.a.len() <= l {
            let next = self.a.len();
            self.a.push(a_coeff(self.order, next));
        }
        while self.b.len() <= l {
            let next = self.b.len();
            self.b.push(b_coeff_with_tol(self.order, next, self.tol));
        }
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }
}

impl CoefficientSource for PowerCoefficients {
    fn order(&self) -> FractionalOrder {
        self.order
    }

    fn a(&self, l: usize) -> f64 {
        self.a[l]
    }

    fn b(&self, l: usize) -> f64 {
        debug_assert!(l >= 1);
        self.b[l]
    }
}

/// The convolution weights `c_0..=c_j` for time level `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientTable {
    pub alpha: f64,
    pub sigma: f64,
    pub tau: f64,
    pub j: usize,
    pub c: Vec<f64>,
}

impl CoefficientTable {
    /// Builds the table from cached powers. `source` must cover index `j + 1`.
    ///
    /// λ is evaluated at the fractional grid points `(s+σ−1/2)τ` and `(s+σ)τ`
    /// directly from the continuous function.
    pub fn build<S: CoefficientSource + ?Sized>(
        source: &S,
        w: &WeightFunction,
        tau: f64,
        j: usize,
    ) -> Self {
        let order = source.order();
        let sigma = order.sigma();
        let lam = |s: f64| w.value(s * tau);
        let mut c = Vec::with_capacity(j + 1);
        if j == 0 {
            c.push(lam(sigma - 0.5) * source.a(0));
        } else {
            c.push(lam(sigma - 0.5) * source.a(0) + lam(sigma) * source.b(1));
            for s in 1..j {
                let sf = s as f64;
                c.push(
                    lam(sf + sigma - 0.5) * source.a(s)
                        + lam(sf + sigma) * (source.b(s + 1) - source.b(s)),
                );
            }
            let jf = j as f64;
            c.push(lam(jf + sigma - 0.5) * source.a(j) - lam(jf + sigma) * source.b(j));
        }
        Self {
            alpha: order.alpha(),
            sigma,
            tau,
            j,
            c,
        }
    }

    /// The λ ≡ 1 table, assembled from `a` and `b` alone.
    pub fn classic<S: CoefficientSource + ?Sized>(source: &S, tau: f64, j: usize) -> Self {
        let order = source.order();
        let mut c = Vec::with_capacity(j + 1);
        if j == 0 {
            c.push(source.a(0));
        } else {
            c.push(source.a(0) + source.b(1));
            for s in 1..j {
                c.push(source.a(s) + (source.b(s + 1) - source.b(s)));
            }
            c.push(source.a(j) - source.b(j));
        }
        Self {
            alpha: order.alpha(),
            sigma: order.sigma(),
            tau,
            j,
            c,
        }
    }

    /// Scale turning `c` into the g-form `g_s^{j+1} = τ^{−α}/Γ(2−α)·c_{j−s}`.
    pub fn g_scale(&self) -> f64 {
        self.tau.powf(-self.alpha) / crate::gamma(2.0 - self.alpha)
    }

    /// `g_s^{j+1}` for `s = 0..=j` (increasing in `s`).
    pub fn g(&self) -> Vec<f64> {
        let scale = self.g_scale();
        self.c.iter().rev().map(|&c| c * scale).collect()
    }
}

/// Builds the level-`j` table after checking λ > 0, λ' ≤ 0 at every point it samples.
pub fn c_coeffs(
    order: FractionalOrder,
    w: &WeightFunction,
    tau: f64,
    j: usize,
) -> Result<CoefficientTable> {
    if !(tau > 0.0) {
        return Err(Error::arg(format!("time step must be positive, got {tau}")));
    }
    let sigma = order.sigma();
    for s in 0..=j {
        for t in [(s as f64 + sigma - 0.5) * tau, (s as f64 + sigma) * tau] {
            let (v, d) = (w.value(t), w.d1(t));
            if !(v > 0.0) {
                return Err(Error::InvalidWeight(format!("λ <= 0 at t={t} (λ={v})")));
            }
            if !(d <= 0.0) {
                return Err(Error::InvalidWeight(format!("λ' > 0 at t={t} (λ'={d})")));
            }
        }
    }
    let mut powers = PowerCoefficients::new(order);
    powers.extend_to(j + 1);
    Ok(if w.is_constant() {
        CoefficientTable::classic(&powers, tau, j)
    } else {
        CoefficientTable::build(&powers, w, tau, j)
    })
}
