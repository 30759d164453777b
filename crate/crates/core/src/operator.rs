//! The discrete λL2-1σ operator and a quadrature oracle for the continuous
//! generalized Caputo derivative
//! `∂^{α,λ} v(t) = 1/Γ(1−α) ∫₀^t λ(t−η)(t−η)^{−α} v'(η) dη`.

use std::sync::Arc;

use serde::Serialize;

use crate::coefficients::{CoefficientSource, CoefficientTable, PowerCoefficients};
use crate::error::{Error, Result};
use crate::gamma;
use crate::quadrature;
use crate::weights::{FractionalOrder, WeightFunction};

/// Default absolute tolerance for [`reference_derivative`].
pub const ORACLE_TOL: f64 = 1e-10;

/// Grid values `v^0, v^1, …` on the uniform time grid `t_s = sτ`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    tau: f64,
    values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(tau: f64, values: Vec<f64>) -> Result<Self> {
        if !(tau > 0.0) {
            return Err(Error::arg(format!("time step must be positive, got {tau}")));
        }
        if values.len() < 2 {
            return Err(Error::arg("a time series needs at least two values"));
        }
        Ok(Self { tau, values })
    }

    /// Samples `v` at `t_0..=t_len−1`.
    pub fn sample(tau: f64, len: usize, v: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(tau, (0..len).map(|s| v(s as f64 * tau)).collect())
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            tau: self.tau,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }
}

/// `τ^{1−α}/Γ(2−α) Σ_{s=0}^{j} c_{j−s} v_{t,s}` with `v_{t,s} = (v^{s+1} − v^s)/τ`,
/// using a prebuilt table for level `j`.
pub fn apply_with_table(values: &[f64], table: &CoefficientTable) -> f64 {
    let j = table.j;
    debug_assert!(values.len() >= j + 2);
    let sum: f64 = (0..=j)
        .map(|s| table.c[j - s] * (values[s + 1] - values[s]))
        .sum();
    // τ^{1−α} · (1/τ) folded into τ^{−α}.
    sum * table.g_scale()
}

/// The discrete derivative at `t_{j+σ}`. Only entries `0..=j+1` of the series are read.
pub fn apply_discrete(
    series: &TimeSeries,
    order: FractionalOrder,
    w: &WeightFunction,
    j: usize,
) -> Result<f64> {
    if series.values.len() < j + 2 {
        return Err(Error::arg(format!(
            "level {j} needs {} history values, series has {}",
            j + 2,
            series.values.len()
        )));
    }
    let mut powers = PowerCoefficients::new(order);
    powers.extend_to(j + 1);
    let table = table_for(&powers, w, series.tau, j);
    Ok(apply_with_table(&series.values, &table))
}

pub(crate) fn table_for<S: CoefficientSource + ?Sized>(
    source: &S,
    w: &WeightFunction,
    tau: f64,
    j: usize,
) -> CoefficientTable {
    if w.is_constant() {
        CoefficientTable::classic(source, tau, j)
    } else {
        CoefficientTable::build(source, w, tau, j)
    }
}

/// Quadrature of the defining integral at `t_eval`.
///
/// The `(t−η)^{−α}` singularity is removed with `t − η = ξ^{1/(1−α)}`, which
/// turns the integral into `1/Γ(2−α) ∫₀^{t^{1−α}} λ(s) v'(t − s) dξ`, `s = ξ^{1/(1−α)}`.
pub fn reference_derivative(
    dv: impl Fn(f64) -> f64,
    order: FractionalOrder,
    w: &WeightFunction,
    t_eval: f64,
    tol: f64,
) -> Result<f64> {
    if !(t_eval > 0.0) {
        return Err(Error::arg(format!(
            "evaluation time must be positive, got {t_eval}"
        )));
    }
    let p = 1.0 - order.alpha();
    let upper = t_eval.powf(p);
    let scale = 1.0 / gamma(2.0 - order.alpha());
    let integrand = |xi: f64| {
        let s = xi.powf(1.0 / p);
        w.value(s) * dv(t_eval - s)
    };
    let value = quadrature::integrate(integrand, 0.0, upper, tol / scale, 4000)?;
    Ok(value * scale)
}

/// A smooth test function with its derivative.
#[derive(Clone)]
pub struct SmoothFunction {
    pub name: String,
    pub value: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub derivative: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl SmoothFunction {
    pub fn new<V, D>(name: impl Into<String>, value: V, derivative: D) -> Self
    where
        V: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            value: Arc::new(value),
            derivative: Arc::new(derivative),
        }
    }

    /// `t^p` for a non-negative integer power.
    pub fn monomial(p: u32) -> Self {
        let name = format!("t^{p}");
        if p == 0 {
            return Self::new(name, |_| 1.0, |_| 0.0);
        }
        Self::new(
            name,
            move |t: f64| t.powi(p as i32),
            move |t: f64| p as f64 * t.powi(p as i32 - 1),
        )
    }

    /// Looks up `"t"`, `"t2"`, `"t3"`, … by name.
    pub fn by_name(name: &str) -> Result<Self> {
        let power = match name.strip_prefix('t') {
            Some("") => Some(1),
            Some(rest) => rest.trim_start_matches('^').parse::<u32>().ok(),
            None => None,
        };
        match (name, power) {
            ("const", _) => Ok(Self::monomial(0)),
            (_, Some(p)) if p <= 8 => Ok(Self::monomial(p)),
            _ => Err(Error::arg(format!("unknown test function {name:?}"))),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OrderLevel {
    pub m: usize,
    pub tau: f64,
    pub max_error: f64,
    /// log₂ of the error ratio against the previous (coarser) level.
    pub slope: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct OrderReport {
    pub function: String,
    pub alpha: f64,
    pub weight: String,
    pub horizon: f64,
    pub levels: Vec<OrderLevel>,
}

impl OrderReport {
    pub fn finest_slope(&self) -> Option<f64> {
        self.levels.last().and_then(|l| l.slope)
    }

    pub fn max_error(&self) -> f64 {
        self.levels.iter().map(|l| l.max_error).fold(0.0, f64::max)
    }
}

/// For each `M`, the worst error of the discrete operator against the
/// quadrature oracle over the offset points `t_{j+σ}`, `j = 0..M−1`.
pub fn order_study(
    v: &SmoothFunction,
    order: FractionalOrder,
    w: &WeightFunction,
    horizon: f64,
    steps: &[usize],
    tol: f64,
) -> Result<OrderReport> {
    if steps.is_empty() || steps.windows(2).any(|p| p[0] >= p[1]) || steps[0] == 0 {
        return Err(Error::arg(
            "step counts must be positive and strictly increasing",
        ));
    }
    let mut powers = PowerCoefficients::new(order);
    powers.extend_to(steps[steps.len() - 1] + 1);
    let mut levels: Vec<OrderLevel> = Vec::with_capacity(steps.len());
    for &m in steps {
        let tau = horizon / m as f64;
        let series = TimeSeries::sample(tau, m + 1, |t| (v.value)(t))?;
        let mut worst = 0.0f64;
        for j in 0..m {
            let table = table_for(&powers, w, tau, j);
            let discrete = apply_with_table(series.values(), &table);
            let t = (j as f64 + order.sigma()) * tau;
            let exact = reference_derivative(|x| (v.derivative)(x), order, w, t, tol)?;
            worst = worst.max((discrete - exact).abs());
        }
        let slope = levels
            .last()
            .map(|prev| (prev.max_error / worst).ln() / (prev.tau / tau).ln());
        levels.push(OrderLevel {
            m,
            tau,
            max_error: worst,
            slope,
        });
    }
    Ok(OrderReport {
        function: v.name.clone(),
        alpha: order.alpha(),
        weight: describe_weight(w),
        horizon,
        levels,
    })
}

pub(crate) fn describe_weight(w: &WeightFunction) -> String {
    match w.rate() {
        Some(b) if b > 0.0 => format!("exp(-{b}t)"),
        Some(_) => "1".into(),
        None => w.name().to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn order(alpha: f64) -> FractionalOrder {
        FractionalOrder::new(alpha).unwrap()
    }

    #[test]
    fn constant_series_has_zero_derivative() {
        let s = TimeSeries::new(0.1, vec![7.0; 12]).unwrap();
        let w = WeightFunction::exponential(2.0).unwrap();
        for j in 0..11 {
            assert_eq!(apply_discrete(&s, order(0.4), &w, j).unwrap(), 0.0);
        }
    }

    #[test]
    fn linear_is_exact_for_classic_caputo() {
        let o = order(0.3);
        let tau = 0.05;
        let s = TimeSeries::sample(tau, 30, |t| t).unwrap();
        for j in 0..29 {
            let t = (j as f64 + o.sigma()) * tau;
            let exact = t.powf(1.0 - o.alpha()) / gamma(2.0 - o.alpha());
            let got = apply_discrete(&s, o, &WeightFunction::constant(), j).unwrap();
            assert!((got - exact).abs() < 1e-13, "j={j}: {got} vs {exact}");
        }
    }

    #[test]
    fn needs_enough_history() {
        let s = TimeSeries::new(0.1, vec![0.0, 1.0, 2.0]).unwrap();
        assert!(apply_discrete(&s, order(0.5), &WeightFunction::constant(), 2).is_err());
        assert!(TimeSeries::new(0.1, vec![1.0]).is_err());
        assert!(TimeSeries::new(0.0, vec![1.0, 2.0]).is_err());
    }

    #[test]
    fn oracle_of_constant_is_zero() {
        let w = WeightFunction::exponential(1.0).unwrap();
        let d = reference_derivative(|_| 0.0, order(0.5), &w, 0.7, 1e-12).unwrap();
        assert_eq!(d, 0.0);
    }

    #[test]
    fn oracle_of_linear() {
        let o = order(0.7);
        let d = reference_derivative(|_| 1.0, o, &WeightFunction::constant(), 0.8, 1e-12).unwrap();
        assert_relative_eq!(d, 0.8f64.powf(0.3) / gamma(1.3), max_relative = 1e-12);
    }

    #[test]
    fn oracle_matches_beta_integral() {
        // v'(η) = η³e^{−bη} with λ = e^{−bt} gives 6 e^{−bt} t^{4−α}/Γ(5−α).
        for (b, alpha) in [(1.0, 0.9), (2.0, 0.5), (3.0, 0.1)] {
            let o = order(alpha);
            let w = WeightFunction::exponential(b).unwrap();
            for t in [0.05, 0.4, 1.0] {
                let d = reference_derivative(|e: f64| e.powi(3) * (-b * e).exp(), o, &w, t, 1e-13)
                    .unwrap();
                let exact = 6.0 * (-b * t).exp() * t.powf(4.0 - alpha) / gamma(5.0 - alpha);
                assert!(
                    (d - exact).abs() < 1e-12,
                    "b={b} α={alpha} t={t}: {d} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn rejects_nonpositive_time() {
        assert!(
            reference_derivative(|_| 1.0, order(0.5), &WeightFunction::constant(), 0.0, 1e-10)
                .is_err()
        );
    }

    #[test]
    fn exactness_for_linear_in_order_study() {
        let r = order_study(
            &SmoothFunction::monomial(1),
            order(0.5),
            &WeightFunction::constant(),
            1.0,
            &[10, 20],
            1e-13,
        )
        .unwrap();
        assert!(r.max_error() < 1e-12, "{r:?}");
    }

    #[test]
    fn cubic_converges_at_second_order() {
        let r = order_study(
            &SmoothFunction::monomial(3),
            order(0.5),
            &WeightFunction::exponential(1.0).unwrap(),
            1.0,
            &[20, 40, 80, 160],
            1e-12,
        )
        .unwrap();
        // A τ^{2.5} term with the opposite sign makes the slopes climb to 2.
        let slopes: Vec<f64> = r.levels[1..].iter().map(|l| l.slope.unwrap()).collect();
        assert!(slopes.windows(2).all(|w| w[0] < w[1]), "{slopes:?}");
        let s = r.finest_slope().unwrap();
        assert!((s - 2.0).abs() < 0.1, "slope {s}");
    }

    #[test]
    fn function_lookup() {
        assert_eq!(SmoothFunction::by_name("t").unwrap().name, "t^1");
        assert_eq!(
            (SmoothFunction::by_name("t3").unwrap().derivative)(2.0),
            12.0
        );
        assert!(SmoothFunction::by_name("sin").is_err());
    }
}
