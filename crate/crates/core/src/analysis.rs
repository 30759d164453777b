//! Error norms, convergence orders, refinement studies and a priori
//! stability audits.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::compact::apply_hh;
use crate::error::{Error, Result};
use crate::gamma;
use crate::problems::ProblemSpec;
use crate::solver::{solve_scheme, Scheme, SolutionHistory};

/// Grid L2 norm `sqrt(Σ y_i² h)` of an interior grid function.
pub fn l2_norm(interior: &[f64], h: f64) -> f64 {
    (interior.iter().map(|v| v * v).sum::<f64>() * h).sqrt()
}

/// `max |z_i^j|` over every node of every layer.
pub fn max_norm<L: AsRef<[f64]>>(layers: &[L]) -> f64 {
    layers
        .iter()
        .flat_map(|l| l.as_ref().iter())
        .fold(0.0, |m, v| m.max(v.abs()))
}

/// `log_{p1/p2}(e1/e2)`.
pub fn convergence_order(p1: f64, p2: f64, e1: f64, e2: f64) -> f64 {
    (e1 / e2).ln() / (p1 / p2).ln()
}

/// Error of a run against an exact solution `u(x, t)` on the full space-time grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RunErrors {
    /// `max_n ‖z^n‖₀`
    pub l2: f64,
    /// `‖z‖_{C(ω_{hτ})}`
    pub max: f64,
}

pub fn errors_against(history: &SolutionHistory, exact: impl Fn(f64, f64) -> f64) -> RunErrors {
    let grid = history.grid;
    let nodes = grid.nodes();
    let mut out = RunErrors { l2: 0.0, max: 0.0 };
    let mut z = vec![0.0; grid.n + 1];
    for (j, layer) in history.layers().iter().enumerate() {
        let t = history.time(j);
        for (i, zi) in z.iter_mut().enumerate() {
            *zi = layer[i] - exact(nodes[i], t);
        }
        out.l2 = out.l2.max(l2_norm(&z[1..grid.n], grid.h));
        out.max = out.max.max(max_norm(&[&z]));
    }
    out
}

/// How the space and time steps move together across a study.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum Coupling {
    /// Fixed `N`; level values are `M`.
    FixedH { n: usize },
    /// Fixed `M`; level values are `N`.
    FixedTau { m: usize },
    /// `τ = ratio·h`.
    TauLinear { ratio: f64, drive: Drive },
    /// `τ = ratio·h²`.
    TauQuadratic { ratio: f64, drive: Drive },
}

/// Which grid count the level values set; the other one is derived.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Drive {
    /// Level values are `N`.
    H,
    /// Level values are `M`.
    Tau,
}

/// Grid counts for one study level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridLevel {
    pub n: usize,
    pub m: usize,
    /// `N` was rounded to the nearest integer.
    pub rounded: bool,
}

fn integral(value: f64, level: usize, what: &str) -> Result<usize> {
    let r = value.round();
    if r < 1.0 || (value - r).abs() > 1e-9 * value.max(1.0) {
        return Err(Error::NonIntegerGrid {
            level,
            detail: format!("{what} = {value}"),
        });
    }
    Ok(r as usize)
}

impl Coupling {
    /// Which step the convergence order is measured against.
    pub fn refines(&self) -> Drive {
        match self {
            Coupling::FixedH { .. } => Drive::Tau,
            Coupling::FixedTau { .. } => Drive::H,
            Coupling::TauLinear { drive, .. } | Coupling::TauQuadratic { drive, .. } => *drive,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Coupling::FixedH { n } => format!("fixed h = l/{n}, refine tau"),
            Coupling::FixedTau { m } => format!("fixed tau = T/{m}, refine h"),
            Coupling::TauLinear { ratio, drive } => {
                format!("tau = {ratio}*h, levels set {}", drive_name(*drive))
            }
            Coupling::TauQuadratic { ratio, drive } => {
                format!("tau = {ratio}*h^2, levels set {}", drive_name(*drive))
            }
        }
    }

    /// Turns a level value into `(N, M)`. Non-integer derived counts are an
    /// error, except `N` under `TauQuadratic` driven by `τ`, which is rounded.
    pub fn resolve(&self, value: usize, length: f64, horizon: f64) -> Result<GridLevel> {
        let exact = |n, m| GridLevel {
            n,
            m,
            rounded: false,
        };
        let v = value as f64;
        Ok(match *self {
            Coupling::FixedH { n } => exact(n, value),
            Coupling::FixedTau { m } => exact(value, m),
            Coupling::TauLinear {
                ratio,
                drive: Drive::H,
            } => {
                let m = horizon * v / (ratio * length);
                exact(value, integral(m, value, "M")?)
            }
            Coupling::TauLinear {
                ratio,
                drive: Drive::Tau,
            } => {
                let n = ratio * length * v / horizon;
                exact(integral(n, value, "N")?, value)
            }
            Coupling::TauQuadratic {
                ratio,
                drive: Drive::H,
            } => {
                let m = horizon * v * v / (ratio * length * length);
                exact(value, integral(m, value, "M")?)
            }
            Coupling::TauQuadratic {
                ratio,
                drive: Drive::Tau,
            } => {
                let n = length / (horizon / (v * ratio)).sqrt();
                let r = n.round().max(2.0);
                GridLevel {
                    n: r as usize,
                    m: value,
                    rounded: (n - r).abs() > 1e-9 * n,
                }
            }
        })
    }
}

fn drive_name(d: Drive) -> &'static str {
    match d {
        Drive::H => "N",
        Drive::Tau => "M",
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelResult {
    pub n: usize,
    pub m: usize,
    pub h: f64,
    pub tau: f64,
    pub err_l2: f64,
    pub co_l2: Option<f64>,
    pub err_max: f64,
    pub co_max: Option<f64>,
    pub rounded: bool,
    pub stability_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelFailure {
    pub level: usize,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub scheme: Scheme,
    pub problem: String,
    pub b: Option<f64>,
    pub alpha: f64,
    pub coupling: String,
    pub refines: Drive,
    /// Set when errors are measured against the next finer level instead of
    /// an exact solution.
    pub self_convergence: bool,
    pub notes: Vec<String>,
    pub levels: Vec<LevelResult>,
    pub failures: Vec<LevelFailure>,
}

impl ConvergenceReport {
    pub fn complete(&self) -> bool {
        self.failures.is_empty()
    }

    fn step(&self, l: &LevelResult) -> f64 {
        match self.refines {
            Drive::H => l.h,
            Drive::Tau => l.tau,
        }
    }

    /// Fills `co_l2` and `co_max` from the stored errors.
    pub fn compute_orders(&mut self) {
        for k in 0..self.levels.len() {
            if k == 0 {
                self.levels[0].co_l2 = None;
                self.levels[0].co_max = None;
                continue;
            }
            let (p1, p2) = (self.step(&self.levels[k - 1]), self.step(&self.levels[k]));
            let (prev, cur) = (&self.levels[k - 1], &self.levels[k]);
            let co_l2 = convergence_order(p1, p2, prev.err_l2, cur.err_l2);
            let co_max = convergence_order(p1, p2, prev.err_max, cur.err_max);
            self.levels[k].co_l2 = Some(co_l2);
            self.levels[k].co_max = Some(co_max);
        }
    }

    pub fn worst_stability_ratio(&self) -> Option<f64> {
        self.levels
            .iter()
            .filter_map(|l| l.stability_ratio)
            .fold(None, |m, r| Some(m.map_or(r, |m: f64| m.max(r))))
    }
}

/// Runs every level of a refinement study, on up to `jobs` threads.
///
/// Grid resolution errors abort before any solve. Solver failures are
/// collected in [`ConvergenceReport::failures`] and the remaining levels are
/// still reported.
pub fn run_study(
    problem: &ProblemSpec,
    scheme: Scheme,
    coupling: &Coupling,
    levels: &[usize],
    jobs: usize,
) -> Result<ConvergenceReport> {
    if levels.is_empty() {
        return Err(Error::arg("a study needs at least one level"));
    }
    let grids = levels
        .iter()
        .map(|&v| coupling.resolve(v, problem.length, problem.horizon))
        .collect::<Result<Vec<_>>>()?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::arg(format!("thread pool: {e}")))?;
    let runs: Vec<Result<(SolutionHistory, f64)>> = pool.install(|| {
        grids
            .par_iter()
            .map(|g| {
                let history = solve_scheme(scheme, problem, g.n, g.m)?;
                let audit = stability_audit(scheme, &history, problem);
                Ok((history, audit.worst_ratio))
            })
            .collect()
    });

    let mut report = ConvergenceReport {
        scheme,
        problem: problem.name.clone(),
        b: problem.weight.rate(),
        alpha: problem.alpha(),
        coupling: coupling.describe(),
        refines: coupling.refines(),
        self_convergence: problem.exact.is_none(),
        notes: Vec::new(),
        levels: Vec::new(),
        failures: Vec::new(),
    };
    if grids.iter().any(|g| g.rounded) {
        report.notes.push(
            "N rounded to the nearest integer on some levels; h column holds the actual step"
                .into(),
        );
    }

    let mut ok: Vec<(GridLevel, SolutionHistory, f64)> = Vec::new();
    for ((g, run), &value) in grids.iter().zip(runs).zip(levels) {
        match run {
            Ok((history, ratio)) => ok.push((*g, history, ratio)),
            Err(e) => report.failures.push(LevelFailure {
                level: value,
                error: e.to_string(),
            }),
        }
    }

    match &problem.exact {
        Some(exact) => {
            for (g, history, ratio) in &ok {
                let e = errors_against(history, |x, t| exact(x, t));
                report.levels.push(level_result(g, history, e, *ratio));
            }
        }
        None => {
            report.notes.push(
                "no exact solution: errors compare the final layer with the next finer level"
                    .into(),
            );
            for pair in ok.windows(2) {
                let (g, coarse, ratio) = &pair[0];
                let fine = &pair[1].1;
                let e = final_layer_difference(coarse, fine)?;
                report.levels.push(level_result(g, coarse, e, *ratio));
            }
        }
    }
    report.compute_orders();
    Ok(report)
}

fn level_result(g: &GridLevel, history: &SolutionHistory, e: RunErrors, ratio: f64) -> LevelResult {
    LevelResult {
        n: g.n,
        m: g.m,
        h: history.grid.h,
        tau: history.tau,
        err_l2: e.l2,
        co_l2: None,
        err_max: e.max,
        co_max: None,
        rounded: g.rounded,
        stability_ratio: Some(ratio),
    }
}

fn final_layer_difference(coarse: &SolutionHistory, fine: &SolutionHistory) -> Result<RunErrors> {
    let (nc, nf) = (coarse.grid.n, fine.grid.n);
    if nf % nc != 0 {
        return Err(Error::arg(format!(
            "self-convergence needs nested grids; N={nf} is not a multiple of N={nc}"
        )));
    }
    let stride = nf / nc;
    let (yc, yf) = (coarse.last(), fine.last());
    let z: Vec<f64> = (0..=nc).map(|i| yc[i] - yf[i * stride]).collect();
    Ok(RunErrors {
        l2: l2_norm(&z[1..nc], coarse.grid.h),
        max: max_norm(&[&z]),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StabilityLevel {
    pub j: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

/// Left and right sides of the a priori estimate at every level.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityReport {
    pub scheme: Scheme,
    /// `c₁`, the smallest sampled `k`.
    pub k_min: f64,
    pub initial_norm_sq: f64,
    pub max_source_norm_sq: f64,
    pub bound_constant: f64,
    pub levels: Vec<StabilityLevel>,
    pub worst_ratio: f64,
}

/// Evaluates the a priori estimate for a completed run.
///
/// Second-order scheme: `‖y^{j+1}‖₀² ≤ ‖y⁰‖₀² + T^αΓ(1−α)l²/(2λ(T)c₁)·max‖φ‖₀²`.
/// Compact scheme: the same with `H_h`-weighted norms and `T^αΓ(1−α)l²/(λ(T)c₁)`.
pub fn stability_audit(
    scheme: Scheme,
    history: &SolutionHistory,
    problem: &ProblemSpec,
) -> StabilityReport {
    let grid = history.grid;
    let (n, h) = (grid.n, grid.h);
    let alpha = problem.alpha();
    let nodes = grid.nodes();
    let m = history.level();

    let norm_sq = |layer: &[f64]| -> f64 {
        match scheme {
            Scheme::SecondOrder => l2_norm(&layer[1..n], h).powi(2),
            Scheme::Compact => l2_norm(&apply_hh(layer).expect("grid has N >= 2"), h).powi(2),
        }
    };

    let mut k_min = f64::INFINITY;
    let mut max_source = 0.0f64;
    for j in 0..m {
        let t = (j as f64 + history.sigma) * history.tau;
        match scheme {
            Scheme::SecondOrder => {
                for i in 1..=n {
                    k_min = k_min.min((problem.k)((i as f64 - 0.5) * h, t));
                }
            }
            Scheme::Compact => k_min = k_min.min((problem.k)(0.0, t)),
        }
        let phi: Vec<f64> = nodes.iter().map(|&x| (problem.f)(x, t)).collect();
        max_source = max_source.max(norm_sq(&phi));
    }

    let horizon = problem.horizon;
    let lambda_t = problem.weight.value(horizon);
    let base =
        horizon.powf(alpha) * gamma(1.0 - alpha) * problem.length.powi(2) / (lambda_t * k_min);
    let bound_constant = match scheme {
        Scheme::SecondOrder => base / 2.0,
        Scheme::Compact => base,
    };
    let initial = norm_sq(history.layer(0));
    let rhs = initial + bound_constant * max_source;
    let levels: Vec<StabilityLevel> = (1..=m)
        .map(|j| {
            let lhs = norm_sq(history.layer(j));
            StabilityLevel {
                j,
                lhs,
                rhs,
                ratio: if rhs > 0.0 {
                    lhs / rhs
                } else if lhs > 0.0 {
                    f64::INFINITY
                } else {
                    0.0
                },
            }
        })
        .collect();
    let worst_ratio = levels.iter().map(|l| l.ratio).fold(0.0, f64::max);
    StabilityReport {
        scheme,
        k_min,
        initial_norm_sq: initial,
        max_source_norm_sq: max_source,
        bound_constant,
        levels,
        worst_ratio,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::make_test2;

    #[test]
    fn norms() {
        assert_eq!(l2_norm(&[0.0; 9], 0.1), 0.0);
        assert!((l2_norm(&[1.0; 9], 0.1) - 0.948_683_298_050_513_8).abs() < 1e-15);
        let y = [0.3, -1.2, 2.0];
        assert!((l2_norm(&y.map(|v| 2.0 * v), 0.5) - 2.0 * l2_norm(&y, 0.5)).abs() < 1e-15);
        assert_eq!(max_norm(&[vec![0.0; 4], vec![0.0; 4]]), 0.0);
        assert_eq!(max_norm(&[vec![0.0, 3.0, 0.0]]), 3.0);
        assert_eq!(max_norm(&[vec![0.0, -1.0], vec![0.5, 0.25]]), 1.0);
    }

    #[test]
    fn table_pair_order() {
        let co = convergence_order(0.1, 0.05, 4.853172e-4, 1.195117e-4);
        assert!((co - 2.0218).abs() < 5e-5, "{co}");
    }

    #[test]
    fn coupling_resolution() {
        let lin = Coupling::TauLinear {
            ratio: 3.0,
            drive: Drive::Tau,
        };
        assert_eq!(
            lin.resolve(10, 1.0, 1.0).unwrap(),
            GridLevel {
                n: 30,
                m: 10,
                rounded: false
            }
        );
        let literal = Coupling::TauLinear {
            ratio: 3.0,
            drive: Drive::H,
        };
        match literal.resolve(10, 1.0, 1.0) {
            Err(Error::NonIntegerGrid { level, .. }) => assert_eq!(level, 10),
            other => panic!("{other:?}"),
        }
        let quad = Coupling::TauQuadratic {
            ratio: 16.0,
            drive: Drive::H,
        };
        assert_eq!(
            quad.resolve(8, 1.0, 1.0).unwrap(),
            GridLevel {
                n: 8,
                m: 4,
                rounded: false
            }
        );
        assert!(quad.resolve(6, 1.0, 1.0).is_err());
        let q_tau = Coupling::TauQuadratic {
            ratio: 16.0,
            drive: Drive::Tau,
        };
        let g = q_tau.resolve(10, 1.0, 1.0).unwrap();
        assert_eq!((g.n, g.m, g.rounded), (13, 10, true));
        assert_eq!(
            Coupling::FixedH { n: 500 }.resolve(20, 1.0, 1.0).unwrap().n,
            500
        );
    }

    #[test]
    fn exact_self_solution_has_zero_error() {
        let p = make_test2(2.0, 0.5).unwrap();
        let h = solve_scheme(Scheme::Compact, &p, 8, 4).unwrap();
        let snapshot = h.clone();
        let grid = h.grid;
        let e = errors_against(&h, |x, t| {
            let j = (t / snapshot.tau).round() as usize;
            let i = (x / grid.h).round() as usize;
            snapshot.layer(j)[i]
        });
        assert_eq!(e, RunErrors { l2: 0.0, max: 0.0 });
    }

    #[test]
    fn audit_of_zero_run() {
        let mut p = make_test2(1.0, 0.5).unwrap();
        p.f = std::sync::Arc::new(|_, _| 0.0);
        p.u0 = std::sync::Arc::new(|_| 0.0);
        p.exact = None;
        let h = solve_scheme(Scheme::SecondOrder, &p, 8, 4).unwrap();
        let a = stability_audit(Scheme::SecondOrder, &h, &p);
        assert_eq!(a.worst_ratio, 0.0);
        assert!(a.levels.iter().all(|l| l.lhs <= l.rhs));
    }
}
