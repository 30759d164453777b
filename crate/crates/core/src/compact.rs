//! Fourth-order compact scheme for coefficients that depend on time only:
//! `Δ^{α,λ} H_h y = a^{j+σ} y_{x̄x}^{(σ)} − d^{j+σ} H_h y^{(σ)} + H_h φ^{j+σ}`
//! with `H_h v_i = (v_{i−1} + 10 v_i + v_{i+1})/12`.

use crate::coefficients::CoefficientTable;
use crate::error::{Error, Result};
use crate::operator::table_for;
use crate::problems::{CoefficientKind, ProblemSpec};
use crate::solver::{history_sum, start, with_boundary, SolutionHistory, SpatialGrid};
use crate::tridiag::{thomas_solve, TridiagonalSystem};

/// `(H_h v)_i` at interior nodes `1..N−1` of a full-grid vector `v_0..=v_N`.
pub fn apply_hh(v: &[f64]) -> Result<Vec<f64>> {
    if v.len() < 3 {
        return Err(Error::arg("H_h needs a grid with at least 2 subintervals"));
    }
    Ok(v.windows(3)
        .map(|w| (w[0] + 10.0 * w[1] + w[2]) / 12.0)
        .collect())
}

fn hh_at(v: &[f64], i: usize) -> f64 {
    (v[i - 1] + 10.0 * v[i] + v[i + 1]) / 12.0
}

/// Builds the compact-scheme system for `y^{j+1}`.
pub fn assemble_compact_step(
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
    let g = table.g_scale() * table.c[0];
    let a = (problem.k)(0.0, t);
    let d = (problem.q)(0.0, t);

    let mut hist = vec![0.0; n + 1];
    history_sum(&history.layers()[..=j], table, &mut hist);
    let y = history.layer(j);
    // φ on the full grid; H_h reaches the boundary nodes.
    let phi: Vec<f64> = (0..=n).map(|i| (problem.f)(grid.x(i), t)).collect();

    let off = g / 12.0 - sigma * a / h2 + sigma * d / 12.0;
    let diag = 10.0 * g / 12.0 + 2.0 * sigma * a / h2 + 10.0 * sigma * d / 12.0;
    let mut sys = TridiagonalSystem::zeros(n - 1);
    for i in 1..n {
        let r = i - 1;
        sys.sub[r] = off;
        sys.sup[r] = off;
        sys.diag[r] = diag;
        let hy = hh_at(y, i);
        let yxx = (y[i - 1] - 2.0 * y[i] + y[i + 1]) / h2;
        sys.rhs[r] = g * hy - hh_at(&hist, i) + (1.0 - sigma) * (a * yxx - d * hy) + hh_at(&phi, i);
    }
    sys
}

/// Runs the compact scheme through level `M`. Rejects problems whose `k` or
/// `q` depend on `x`.
pub fn solve_compact(problem: &ProblemSpec, n: usize, m: usize) -> Result<SolutionHistory> {
    if problem.kind != CoefficientKind::TimeOnly {
        return Err(Error::InvalidProblem(format!(
            "the compact scheme needs k and q independent of x; problem {:?} has x-dependent coefficients",
            problem.name
        )));
    }
    let (mut history, powers) = start(problem, n, m)?;
    let grid = history.grid;
    for j in 0..m {
        let table = table_for(&powers, &problem.weight, history.tau, j);
        let sys = assemble_compact_step(problem, &grid, &history, &table, j);
        history.push(with_boundary(thomas_solve(&sys)?));
    }
    Ok(history)
}
