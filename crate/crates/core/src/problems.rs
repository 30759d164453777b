//! Problem definitions: coefficients, source, initial data and (optionally)
//! the exact solution of
//! `∂^{α,λ}u = (k u_x)_x − q u + f` on `(0, l) × (0, T]`, `u(0,t) = u(l,t) = 0`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::gamma;
use crate::weights::{validate_weight, FractionalOrder, WeightFunction};

pub type SpaceTimeFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
pub type SpaceFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Whether `k` and `q` may depend on `x`. The compact scheme needs `TimeOnly`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoefficientKind {
    General,
    TimeOnly,
}

#[derive(Clone)]
pub struct ProblemSpec {
    pub name: String,
    pub order: FractionalOrder,
    pub weight: WeightFunction,
    pub length: f64,
    pub horizon: f64,
    pub k: SpaceTimeFn,
    pub q: SpaceTimeFn,
    pub f: SpaceTimeFn,
    pub u0: SpaceFn,
    pub exact: Option<SpaceTimeFn>,
    pub kind: CoefficientKind,
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("name", &self.name)
            .field("alpha", &self.order.alpha())
            .field("weight", &self.weight)
            .field("length", &self.length)
            .field("horizon", &self.horizon)
            .field("kind", &self.kind)
            .field("has_exact", &self.exact.is_some())
            .finish()
    }
}

/// Sampled bounds recorded by [`ProblemSpec::validate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemBounds {
    pub k_min: f64,
    pub k_max: f64,
    pub q_min: f64,
}

const CHECK_POINTS: usize = 101;

impl ProblemSpec {
    pub fn alpha(&self) -> f64 {
        self.order.alpha()
    }

    /// Checks the standing assumptions on a dense sample of the closed domain:
    /// `k ≥ c₁ > 0`, `q ≥ 0`, zero boundary data, admissible λ, and agreement
    /// of the exact solution with `u0` at `t = 0`.
    pub fn validate(&self) -> Result<ProblemBounds> {
        if !(self.length > 0.0) || !(self.horizon > 0.0) {
            return Err(Error::InvalidProblem(format!(
                "domain length and horizon must be positive (l={}, T={})",
                self.length, self.horizon
            )));
        }
        validate_weight(&self.weight, self.horizon, 10 * CHECK_POINTS)?.into_result()?;
        let mut bounds = ProblemBounds {
            k_min: f64::INFINITY,
            k_max: f64::NEG_INFINITY,
            q_min: f64::INFINITY,
        };
        let n = CHECK_POINTS - 1;
        for a in 0..=n {
            let x = self.length * a as f64 / n as f64;
            for b in 0..=n {
                let t = self.horizon * b as f64 / n as f64;
                let k = (self.k)(x, t);
                let q = (self.q)(x, t);
                if !(k > 0.0) {
                    return Err(Error::InvalidProblem(format!(
                        "k must be bounded below by a positive constant; k({x}, {t}) = {k}"
                    )));
                }
                if !(q >= 0.0) {
                    return Err(Error::InvalidProblem(format!(
                        "q must be nonnegative; q({x}, {t}) = {q}"
                    )));
                }
                bounds.k_min = bounds.k_min.min(k);
                bounds.k_max = bounds.k_max.max(k);
                bounds.q_min = bounds.q_min.min(q);
            }
        }
        for x in [0.0, self.length] {
            let v = (self.u0)(x);
            if v.abs() > 1e-12 {
                return Err(Error::InvalidProblem(format!(
                    "initial data must vanish at the boundary; u0({x}) = {v}"
                )));
            }
        }
        if let Some(exact) = &self.exact {
            for a in 0..=n {
                let x = self.length * a as f64 / n as f64;
                let (e, u) = (exact(x, 0.0), (self.u0)(x));
                if (e - u).abs() > 1e-10 * (1.0 + u.abs()) {
                    return Err(Error::InvalidProblem(format!(
                        "exact solution disagrees with u0 at x={x}: {e} vs {u}"
                    )));
                }
            }
        }
        Ok(bounds)
    }
}

/// `6 Σ_{k≥4} y^k/k!` and friends: `scale · Σ_{k≥start} y^k/k!` for `y ≥ 0`,
/// summed directly so small `y` keeps full relative precision.
fn exp_tail(y: f64, start: u32) -> f64 {
    // term_k = y^k/k!
    let mut term = 1.0;
    for k in 1..=start {
        term *= y / k as f64;
    }
    let mut sum = 0.0;
    let mut k = start;
    loop {
        sum += term;
        k += 1;
        term *= y / k as f64;
        if term <= f64::EPSILON * 0.25 * sum || k > 400 {
            return sum + term;
        }
    }
}

/// Time factor of the first built-in solution,
/// `1 + (6 − (6 + 6bt + 3b²t² + b³t³)e^{−bt})/b⁴`.
pub fn test1_time_factor(b: f64, t: f64) -> f64 {
    let y = b * t;
    if y < 2.0 {
        // 6 − e^{−y}(6+6y+3y²+y³) = 6e^{−y} Σ_{k≥4} y^k/k!
        1.0 + 6.0 * (-y).exp() * exp_tail(y, 4) / b.powi(4)
    } else {
        let p = 6.0 + y * (6.0 + y * (3.0 + y));
        1.0 + (6.0 - p * (-y).exp()) / b.powi(4)
    }
}

/// Time factor of the second built-in solution, `1 + (2 − (2 + 2bt + b²t²)e^{−bt})/b³`.
pub fn test2_time_factor(b: f64, t: f64) -> f64 {
    let y = b * t;
    if y < 2.0 {
        1.0 + 2.0 * (-y).exp() * exp_tail(y, 3) / b.powi(3)
    } else {
        let p = 2.0 + y * (2.0 + y);
        1.0 + (2.0 - p * (-y).exp()) / b.powi(3)
    }
}

fn check_builtin(b: f64, alpha: f64) -> Result<(FractionalOrder, WeightFunction)> {
    if !(b > 0.0) || !b.is_finite() {
        return Err(Error::arg(format!("built-in problems need b > 0, got {b}")));
    }
    Ok((
        FractionalOrder::new(alpha)?,
        WeightFunction::exponential(b)?,
    ))
}

/// Variable-coefficient problem with `u = sin(πx) g(t)`, `g' = t³e^{−bt}`,
/// `λ = e^{−bt}`, `k = 2 − cos(xt)`, `q = 1 − sin(xt)`, `T = 1`.
///
/// The source is manufactured: `∂^{α,λ}u = 6e^{−bt}t^{4−α}/Γ(5−α)·sin(πx)` and
/// `(k u_x)_x = π t sin(xt) cos(πx) g − π²(2 − cos(xt)) sin(πx) g`.
pub fn make_test1(b: f64, alpha: f64) -> Result<ProblemSpec> {
    let (order, weight) = check_builtin(b, alpha)?;
    let frac_scale = 6.0 / gamma(5.0 - alpha);
    Ok(ProblemSpec {
        name: "test1".into(),
        order,
        weight,
        length: 1.0,
        horizon: 1.0,
        k: Arc::new(|x: f64, t: f64| 2.0 - (x * t).cos()),
        q: Arc::new(|x: f64, t: f64| 1.0 - (x * t).sin()),
        f: Arc::new(move |x: f64, t: f64| {
            let g = test1_time_factor(b, t);
            let (s, c) = (PI * x).sin_cos();
            let (sxt, cxt) = (x * t).sin_cos();
            s * frac_scale * (-b * t).exp() * t.powf(4.0 - alpha) - PI * t * sxt * c * g
                + PI * PI * (2.0 - cxt) * s * g
                + (1.0 - sxt) * s * g
        }),
        u0: Arc::new(|x: f64| (PI * x).sin()),
        exact: Some(Arc::new(move |x: f64, t: f64| {
            (PI * x).sin() * test1_time_factor(b, t)
        })),
        kind: CoefficientKind::General,
    })
}

/// Time-only-coefficient problem with `u = g(t) sin(πx)`, `g' = t²e^{−bt}`,
/// `k = 2 − sin(3t)`, `q = 1 − cos(2t)`, `T = 1`.
pub fn make_test2(b: f64, alpha: f64) -> Result<ProblemSpec> {
    let (order, weight) = check_builtin(b, alpha)?;
    let frac_scale = 2.0 / gamma(4.0 - alpha);
    Ok(ProblemSpec {
        name: "test2".into(),
        order,
        weight,
        length: 1.0,
        horizon: 1.0,
        k: Arc::new(|_x: f64, t: f64| 2.0 - (3.0 * t).sin()),
        q: Arc::new(|_x: f64, t: f64| 1.0 - (2.0 * t).cos()),
        f: Arc::new(move |x: f64, t: f64| {
            let g = test2_time_factor(b, t);
            let k = 2.0 - (3.0 * t).sin();
            let q = 1.0 - (2.0 * t).cos();
            (PI * PI * g * k + g * q + frac_scale * t.powf(3.0 - alpha) * (-b * t).exp())
                * (PI * x).sin()
        }),
        u0: Arc::new(|x: f64| (PI * x).sin()),
        exact: Some(Arc::new(move |x: f64, t: f64| {
            test2_time_factor(b, t) * (PI * x).sin()
        })),
        kind: CoefficientKind::TimeOnly,
    })
}

/// The `"problem"` block of a run config.
///
/// Built-ins: `{"problem": "test1", "b": 1.0, "alpha": 0.9}`.
/// Custom: `{"problem": "custom", "alpha": 0.5, "weight": "exp", "b": 1.0,
/// "k": "2 - sin(3*t)", "q": "0", "f": "...", "u0": "sin(pi*x)"}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub problem: String,
    pub alpha: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u0: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact: Option<String>,
}

fn space_time(src: &str, what: &str) -> Result<(SpaceTimeFn, bool)> {
    let e = Expr::parse(src).map_err(|err| Error::InvalidProblem(format!("{what}: {err}")))?;
    let uses_x = e.uses_x();
    Ok((Arc::new(move |x, t| e.eval(x, t)), uses_x))
}

/// Builds and validates a [`ProblemSpec`] from its config block.
pub fn load_problem(cfg: &ProblemConfig) -> Result<ProblemSpec> {
    let spec = match cfg.problem.as_str() {
        "test1" | "test2" => {
            let b = cfg.b.ok_or_else(|| {
                Error::InvalidProblem(format!("{} requires parameter b", cfg.problem))
            })?;
            if cfg.k.is_some()
                || cfg.q.is_some()
                || cfg.f.is_some()
                || cfg.u0.is_some()
                || cfg.exact.is_some()
            {
                return Err(Error::InvalidProblem(format!(
                    "built-in problem {} does not take expressions",
                    cfg.problem
                )));
            }
            if cfg.problem == "test1" {
                make_test1(b, cfg.alpha)?
            } else {
                make_test2(b, cfg.alpha)?
            }
        }
        "custom" => {
            let order = FractionalOrder::new(cfg.alpha)?;
            let weight = match (cfg.weight.as_deref(), cfg.b) {
                (Some(name), b) => WeightFunction::by_name(name, b)?,
                (None, Some(b)) => WeightFunction::exponential(b)?,
                (None, None) => WeightFunction::constant(),
            };
            let need = |field: &Option<String>, name: &str| {
                field
                    .clone()
                    .ok_or_else(|| Error::InvalidProblem(format!("custom problem requires {name}")))
            };
            let (k, k_x) = space_time(&need(&cfg.k, "k")?, "k")?;
            let (q, q_x) = space_time(cfg.q.as_deref().unwrap_or("0"), "q")?;
            let (f, _) = space_time(&need(&cfg.f, "f")?, "f")?;
            let (u0, _) = space_time(&need(&cfg.u0, "u0")?, "u0")?;
            let exact = match &cfg.exact {
                Some(src) => Some(space_time(src, "exact")?.0),
                None => None,
            };
            ProblemSpec {
                name: "custom".into(),
                order,
                weight,
                length: cfg.length.unwrap_or(1.0),
                horizon: cfg.horizon.unwrap_or(1.0),
                k,
                q,
                f,
                u0: Arc::new(move |x| u0(x, 0.0)),
                exact,
                kind: if k_x || q_x {
                    CoefficientKind::General
                } else {
                    CoefficientKind::TimeOnly
                },
            }
        }
        other => {
            return Err(Error::InvalidProblem(format!(
                "unknown problem {other:?} (expected test1, test2 or custom)"
            )))
        }
    };
    spec.validate()?;
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn time_factors_start_at_one() {
        for b in [0.5, 1.0, 3.0] {
            assert_eq!(test1_time_factor(b, 0.0), 1.0);
            assert_eq!(test2_time_factor(b, 0.0), 1.0);
        }
    }

    #[test]
    fn time_factor_derivatives_by_finite_differences() {
        let h = 1e-4;
        for b in [1.0, 2.0, 3.0] {
            for t in [0.1, 0.5, 0.9, 1.5] {
                let d1 = (test1_time_factor(b, t + h) - test1_time_factor(b, t - h)) / (2.0 * h);
                let d2 = (test2_time_factor(b, t + h) - test2_time_factor(b, t - h)) / (2.0 * h);
                assert_relative_eq!(d1, t.powi(3) * (-b * t).exp(), max_relative = 1e-6);
                assert_relative_eq!(d2, t.powi(2) * (-b * t).exp(), max_relative = 1e-6);
            }
        }
    }

    #[test]
    fn series_and_closed_form_branches_agree() {
        for b in [0.7, 1.0, 2.5] {
            let t = 2.0 / b;
            let below = test1_time_factor(b, t * (1.0 - 1e-12));
            let p = 6.0 + 2.0 * (6.0 + 2.0 * (3.0 + 2.0));
            let closed = 1.0 + (6.0 - p * (-2.0f64).exp()) / b.powi(4);
            assert_relative_eq!(below, closed, max_relative = 1e-10);
        }
    }

    #[test]
    fn builtins_satisfy_their_own_assumptions() {
        let p = make_test1(1.0, 0.9).unwrap();
        let bounds = p.validate().unwrap();
        assert!(bounds.k_min >= 1.0 - 1e-12 && bounds.k_max <= 2.0);
        assert!(bounds.q_min >= 0.0);
        let p2 = make_test2(2.0, 0.5).unwrap();
        p2.validate().unwrap();
        assert_eq!(p2.kind, CoefficientKind::TimeOnly);
        assert_relative_eq!((p2.exact.as_ref().unwrap())(0.5, 0.0), 1.0);
    }

    #[test]
    fn rejects_nonpositive_rate() {
        assert!(make_test1(0.0, 0.5).is_err());
        assert!(make_test2(-1.0, 0.5).is_err());
        assert!(make_test1(1.0, 1.5).is_err());
    }

    fn custom(k: &str) -> ProblemConfig {
        ProblemConfig {
            problem: "custom".into(),
            alpha: 0.5,
            b: None,
            weight: None,
            length: None,
            horizon: None,
            k: Some(k.into()),
            q: None,
            f: Some("x*(1-x)".into()),
            u0: Some("sin(pi*x)".into()),
            exact: None,
        }
    }

    #[test]
    fn custom_problem_without_exact() {
        let p = load_problem(&custom("2 - sin(3*t)")).unwrap();
        assert!(p.exact.is_none());
        assert_eq!(p.kind, CoefficientKind::TimeOnly);
        assert!(p.weight.is_constant());
        assert_eq!(
            load_problem(&custom("1 + x")).unwrap().kind,
            CoefficientKind::General
        );
    }

    #[test]
    fn custom_problem_rejections() {
        assert!(matches!(
            load_problem(&custom("0")),
            Err(Error::InvalidProblem(_))
        ));
        assert!(matches!(
            load_problem(&custom("1 - 2*x")),
            Err(Error::InvalidProblem(_))
        ));
        let mut bad_q = custom("1");
        bad_q.q = Some("-1".into());
        assert!(load_problem(&bad_q).is_err());
        let mut bad_u0 = custom("1");
        bad_u0.u0 = Some("1 + x".into());
        assert!(load_problem(&bad_u0).is_err());
        assert!(load_problem(&custom("1 +")).is_err());
        let mut bad_exact = custom("1");
        bad_exact.exact = Some("2*sin(pi*x)".into());
        assert!(load_problem(&bad_exact).is_err());
    }

    #[test]
    fn builtin_from_config() {
        let cfg: ProblemConfig =
            serde_json::from_str(r#"{"problem":"test1","b":1.0,"alpha":0.9}"#).unwrap();
        let a = load_problem(&cfg).unwrap();
        let b = make_test1(1.0, 0.9).unwrap();
        for (x, t) in [(0.1, 0.2), (0.7, 0.9), (0.33, 1.0)] {
            assert_eq!((a.f)(x, t), (b.f)(x, t));
            assert_eq!((a.k)(x, t), (b.k)(x, t));
            assert_eq!(
                (a.exact.as_ref().unwrap())(x, t),
                (b.exact.as_ref().unwrap())(x, t)
            );
        }
        assert_eq!(a.alpha(), 0.9);
        assert!(serde_json::from_str::<ProblemConfig>(
            r#"{"problem":"test1","alpha":0.9,"bogus":1}"#
        )
        .is_err());
    }
}
