//! Second-order-in-space scheme for variable coefficients `k(x,t)`, `q(x,t)`.
//!
//! Each level `j → j+1` solves
//! `Σ_{s=0}^{j} g_s^{j+1}(y^{s+1} − y^s) = σΛy^{j+1} + (1−σ)Λy^j + φ^{j+σ}`
//! with `Λy_i = (a_{i+1}(y_{i+1} − y_i) − a_i(y_i − y_{i−1}))/h² − d_i y_i`,
//! `a_i = k(x_{i−1/2}, t_{j+σ})`, `d_i = q(x_i, t_{j+σ})`, `φ_i = f(x_i, t_{j+σ})`.

use serde::{Deserialize, Serialize};

use crate::coefficients::{CoefficientTable, PowerCoefficients};
use crate::error::{Error, Result};
use crate::operator::table_for;
use crate::problems::ProblemSpec;
use crate::tridiag::{thomas_solve, TridiagonalSystem};
use crate::weights::validate_weight;

/// Uniform nodes `x_i = i·h`, `i = 0..=N`, `hN = l`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialGrid {
    pub length: f64,
    pub n: usize,
    pub h: f64,
}

impl SpatialGrid {
    pub fn new(length: f64, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::arg(format!(
                "need at least 2 spatial subintervals, got {n}"
            )));
        }
        if !(length > 0.0) {
            return Err(Error::arg(format!(
                "domain length must be positive, got {length}"
            )));
        }
        Ok(Self {
            length,
            n,
            h: length / n as f64,
        })
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        // Exact at the right end.
        if i == self.n {
            self.length
        } else {
            i as f64 * self.h
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.n).map(|i| self.x(i)).collect()
    }
}

/// Every computed time layer `y^0..=y^j`, each with `N+1` entries including
/// the (zero) boundary values.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionHistory {
    pub grid: SpatialGrid,
    pub tau: f64,
    pub sigma: f64,
    layers: Vec<Vec<f64>>,
}

impl SolutionHistory {
    pub fn new(grid: SpatialGrid, tau: f64, sigma: f64, initial: Vec<f64>) -> Self {
        debug_assert_eq!(initial.len(), grid.n + 1);
        Self {
            grid,
            tau,
            sigma,
            layers: vec![initial],
        }
    }

    pub fn layers(&self) -> &[Vec<f64>] {
        &self.layers
    }

    pub fn layer(&self, j: usize) -> &[f64] {
        &self.layers[j]
    }

    pub fn last(&self) -> &[f64] {
        self.layers
            .last()
            .expect("history always holds the initial layer")
    }

    /// Index of the newest layer.
    pub fn level(&self) -> usize {
        self.layers.len() - 1
    }

    pub fn time(&self, j: usize) -> f64 {
        j as f64 * self.tau
    }

    pub(crate) fn push(&mut self, layer: Vec<f64>) {
        self.layers.push(layer);
    }
}

/// Which discretization in space to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    SecondOrder,
    Compact,
}

impl Scheme {
    pub fn label(self) -> &'static str {
        match self {
            Scheme::SecondOrder => "second-order",
            Scheme::Compact => "compact",
        }
    }
}

pub fn solve_scheme(
    scheme: Scheme,
    problem: &ProblemSpec,
    n: usize,
    m: usize,
) -> Result<SolutionHistory> {
    match scheme {
        Scheme::SecondOrder => solve(problem, n, m),
        Scheme::Compact => crate::compact::solve_compact(problem, n, m),
    }
}

/// `out_i = Σ_{s<j} g_s^{j+1}(y_i^{s+1} − y_i^s)` over the whole grid.
pub(crate) fn history_sum(layers: &[Vec<f64>], table: &CoefficientTable, out: &mut [f64]) {
    out.fill(0.0);
    let j = table.j;
    let scale = table.g_scale();
    for s in 0..j {
        let g = scale * table.c[j - s];
        let (lo, hi) = (&layers[s], &layers[s + 1]);
        for ((o, &a), &b) in out.iter_mut().zip(lo).zip(hi) {
            *o += g * (b - a);
        }
    }
}

/// Shared setup for both schemes: checks, initial layer, cached powers.
pub(crate) fn start(
    problem: &ProblemSpec,
    n: usize,
    m: usize,
) -> Result<(SolutionHistory, PowerCoefficients)> {
    if m < 1 {
        return Err(Error::arg("need at least one time step"));
    }
    problem.validate()?;
    validate_weight(&problem.weight, problem.horizon, (10 * m).max(2))?.into_result()?;
    let grid = SpatialGrid::new(problem.length, n)?;
    let tau = problem.horizon / m as f64;
    let mut initial: Vec<f64> = grid.nodes().iter().map(|&x| (problem.u0)(x)).collect();
    initial[0] = 0.0;
    initial[n] = 0.0;
    let mut powers = PowerCoefficients::new(problem.order);
    powers.extend_to(m + 1);
    Ok((
        SolutionHistory::new(grid, tau, problem.order.sigma(), initial),
        powers,
    ))
}

/// Builds the tridiagonal system for `y^{j+1}` on interior nodes `1..N−1`.
/// `history` must hold layers `0..=j` and `table` must be the level-`j` table.
pub fn assemble_step(
    problem: &ProblemSpec,
    grid: &SpatialGrid,
    history: &SolutionHistory,
    table: &CoefficientTable,
    j: usize,
) -> TridiagonalSystem {
    let n = grid.n;
    let (h, sigma) = (grid.h, table.sigma);
    let h2 = h * h;
    let t = (j as f64 + sigma) * history.tau;
    let gj = table.g_scale() * table.c[0];

    // a[i] = k(x_{i−1/2}, t), i = 1..=N
    let a: Vec<f64> = (0..=n)
        .map(|i| {
            if i == 0 {
                0.0
            } else {
                (problem.k)((i as f64 - 0.5) * h, t)
            }
        })
        .collect();

    let mut hist = vec![0.0; n + 1];
    history_sum(&history.layers()[..=j], table, &mut hist);
    let y = history.layer(j);

    let mut sys = TridiagonalSystem::zeros(n - 1);
    for i in 1..n {
        let r = i - 1;
        let x = grid.x(i);
        let d = (problem.q)(x, t);
        let (al, ar) = (a[i], a[i + 1]);
        sys.sub[r] = -sigma * al / h2;
        sys.sup[r] = -sigma * ar / h2;
        sys.diag[r] = gj + sigma * (al + ar) / h2 + sigma * d;
        let lambda_y = (ar * (y[i + 1] - y[i]) - al * (y[i] - y[i - 1])) / h2 - d * y[i];
        sys.rhs[r] = gj * y[i] - hist[i] + (1.0 - sigma) * lambda_y + (problem.f)(x, t);
    }
    sys
}

/// Runs the second-order scheme through level `M`.
pub fn solve(problem: &ProblemSpec, n: usize, m: usize) -> Result<SolutionHistory> {
    let (mut history, powers) = start(problem, n, m)?;
    let grid = history.grid;
    for j in 0..m {
        let table = table_for(&powers, &problem.weight, history.tau, j);
        let sys = assemble_step(problem, &grid, &history, &table, j);
        history.push(with_boundary(thomas_solve(&sys)?));
    }
    Ok(history)
}

pub(crate) fn with_boundary(interior: Vec<f64>) -> Vec<f64> {
    let mut layer = Vec::with_capacity(interior.len() + 2);
    layer.push(0.0);
    layer.extend(interior);
    layer.push(0.0);
    layer
}
