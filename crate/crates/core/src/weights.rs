//! Weighting functions λ(t) for the generalized Caputo kernel and the
//! fractional order α.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// The fractional order α together with the offset σ = 1 − α/2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FractionalOrder {
    alpha: f64,
    sigma: f64,
}

impl FractionalOrder {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::arg(format!(
                "fractional order must lie in (0, 1), got {alpha}"
            )));
        }
        Ok(Self {
            alpha,
            sigma: 1.0 - 0.5 * alpha,
        })
    }

    #[inline]
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// σ = 1 − α/2, always in (1/2, 1).
    #[inline]
    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

/// Which closed form backs a [`WeightFunction`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightKind {
    /// λ ≡ 1, the classic Caputo kernel.
    Constant,
    /// λ(t) = e^{−bt}, the tempered kernel.
    Exponential { b: f64 },
    /// User-supplied closures.
    Custom,
}

/// A weighting function λ(t) with its first two derivatives.
///
/// The scheme assumes λ > 0 and λ' ≤ 0 on [0, T]; see [`validate_weight`].
#[derive(Clone)]
pub struct WeightFunction {
    kind: WeightKind,
    name: String,
    value: ScalarFn,
    d1: ScalarFn,
    d2: ScalarFn,
}

impl fmt::Debug for WeightFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WeightFunction")
            .field("name", &self.name)
            .field("kind", &self.kind)
            .finish()
    }
}

impl WeightFunction {
    /// λ ≡ 1.
    pub fn constant() -> Self {
        Self {
            kind: WeightKind::Constant,
            name: "const".into(),
            value: Arc::new(|_| 1.0),
            d1: Arc::new(|_| 0.0),
            d2: Arc::new(|_| 0.0),
        }
    }

    /// λ(t) = e^{−bt}, b ≥ 0. `b = 0` yields the constant weight.
    pub fn exponential(b: f64) -> Result<Self> {
        if !(b >= 0.0) || !b.is_finite() {
            return Err(Error::arg(format!(
                "exponential weight needs b >= 0, got {b}"
            )));
        }
        if b == 0.0 {
            return Ok(Self::constant());
        }
        Ok(Self {
            kind: WeightKind::Exponential { b },
            name: "exp".into(),
            value: Arc::new(move |t| (-b * t).exp()),
            d1: Arc::new(move |t| -b * (-b * t).exp()),
            d2: Arc::new(move |t| b * b * (-b * t).exp()),
        })
    }

    pub fn custom<V, D1, D2>(name: impl Into<String>, value: V, d1: D1, d2: D2) -> Self
    where
        V: Fn(f64) -> f64 + Send + Sync + 'static,
        D1: Fn(f64) -> f64 + Send + Sync + 'static,
        D2: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            kind: WeightKind::Custom,
            name: name.into(),
            value: Arc::new(value),
            d1: Arc::new(d1),
            d2: Arc::new(d2),
        }
    }

    /// Looks up a built-in weight: `"const"` or `"exp"` (parameter `b`).
    pub fn by_name(name: &str, b: Option<f64>) -> Result<Self> {
        match name {
            "const" => Ok(Self::constant()),
            "exp" => Self::exponential(
                b.ok_or_else(|| Error::arg("weight \"exp\" requires parameter b"))?,
            ),
            other => Err(Error::arg(format!(
                "unknown weight {other:?} (expected \"const\" or \"exp\")"
            ))),
        }
    }

    #[inline]
    pub fn value(&self, t: f64) -> f64 {
        (self.value)(t)
    }

    #[inline]
    pub fn d1(&self, t: f64) -> f64 {
        (self.d1)(t)
    }

    #[inline]
    pub fn d2(&self, t: f64) -> f64 {
        (self.d2)(t)
    }

    pub fn kind(&self) -> WeightKind {
        self.kind
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn is_constant(&self) -> bool {
        self.kind == WeightKind::Constant
    }

    /// The decay rate `b` for built-in weights (0 for the constant weight).
    pub fn rate(&self) -> Option<f64> {
        match self.kind {
            WeightKind::Constant => Some(0.0),
            WeightKind::Exponential { b } => Some(b),
            WeightKind::Custom => None,
        }
    }
}

/// Outcome of sampling λ and λ' over [0, T].
#[derive(Debug, Clone, PartialEq)]
pub struct WeightReport {
    pub min_value: f64,
    pub max_d1: f64,
    pub min_value_at: f64,
    pub max_d1_at: f64,
    pub samples: usize,
}

impl WeightReport {
    pub fn passed(&self) -> bool {
        self.min_value > 0.0 && self.max_d1 <= 0.0
    }

    /// A human-readable reason for failure, or `None` when the weight passed.
    pub fn failure(&self) -> Option<String> {
        if self.min_value <= 0.0 {
            Some(format!(
                "λ <= 0 at t={} (λ={})",
                self.min_value_at, self.min_value
            ))
        } else if self.max_d1 > 0.0 {
            Some(format!(
                "λ' > 0 at t={} (λ'={})",
                self.max_d1_at, self.max_d1
            ))
        } else {
            None
        }
    }

    pub fn into_result(self) -> Result<Self> {
        match self.failure() {
            Some(msg) => Err(Error::InvalidWeight(msg)),
            None => Ok(self),
        }
    }
}

/// Samples λ and λ' at `samples` equispaced points of [0, T].
pub fn validate_weight(w: &WeightFunction, horizon: f64, samples: usize) -> Result<WeightReport> {
    if !(horizon > 0.0) {
        return Err(Error::arg(format!(
            "horizon must be positive, got {horizon}"
        )));
    }
    if samples < 2 {
        return Err(Error::arg("weight validation needs at least 2 samples"));
    }
    let mut report = WeightReport {
        min_value: f64::INFINITY,
        max_d1: f64::NEG_INFINITY,
        min_value_at: 0.0,
        max_d1_at: 0.0,
        samples,
    };
    let dt = horizon / (samples - 1) as f64;
    for k in 0..samples {
        let t = k as f64 * dt;
        let v = w.value(t);
        let d = w.d1(t);
        if v < report.min_value || v.is_nan() {
            report.min_value = v;
            report.min_value_at = t;
        }
        if d > report.max_d1 || d.is_nan() {
            report.max_d1 = d;
            report.max_d1_at = t;
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigma_is_offset() {
        let o = FractionalOrder::new(0.5).unwrap();
        assert_eq!(o.sigma(), 0.75);
        assert!(FractionalOrder::new(0.0).is_err());
        assert!(FractionalOrder::new(1.0).is_err());
        assert!(FractionalOrder::new(f64::NAN).is_err());
    }

    #[test]
    fn decaying_exponential_passes() {
        let w = WeightFunction::exponential(2.0).unwrap();
        assert!(validate_weight(&w, 1.0, 100).unwrap().passed());
    }

    #[test]
    fn constant_passes() {
        let r = validate_weight(&WeightFunction::constant(), 1.0, 100).unwrap();
        assert!(r.passed());
        assert_eq!(r.max_d1, 0.0);
    }

    #[test]
    fn increasing_weight_fails() {
        let w = WeightFunction::custom("1+t", |t| 1.0 + t, |_| 1.0, |_| 0.0);
        let r = validate_weight(&w, 1.0, 11).unwrap();
        assert!(!r.passed());
        assert!(r.failure().unwrap().starts_with("λ' > 0 at t="));
        assert!(r.into_result().is_err());
    }

    #[test]
    fn by_name_lookup() {
        assert!(WeightFunction::by_name("const", None)
            .unwrap()
            .is_constant());
        assert_eq!(
            WeightFunction::by_name("exp", Some(3.0)).unwrap().rate(),
            Some(3.0)
        );
        assert!(WeightFunction::by_name("exp", None).is_err());
        assert!(WeightFunction::by_name("gauss", None).is_err());
        assert!(WeightFunction::exponential(-1.0).is_err());
    }
}
