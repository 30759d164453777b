//! Property suites for the coefficient inequalities and the discrete energy
//! inequalities that underpin unconditional stability.
//!
//! Every check is a strict (coefficients) or non-strict (energy) inequality
//! evaluated numerically; a failure records the first witness.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coefficients::{CoefficientSource, PowerCoefficients};
use crate::error::Result;
use crate::gamma;
use crate::operator::{apply_with_table, table_for};
use crate::weights::{FractionalOrder, WeightFunction};

pub const A_BOUNDS: &str = "a_s bounds";
pub const A_DIFF_BOUNDS: &str = "a_s - a_s+1 bounds";
pub const B_BOUNDS: &str = "b_s bounds";
pub const A_MINUS_B: &str = "a_s - b_s lower bound";
pub const LEADING_COMBINATION: &str = "(2sigma-1)(a0+b1) - sigma(a1+b2-b1) lower bound";
pub const C_LAST: &str = "c_j lower bound";
pub const C_LEADING: &str = "(2sigma-1)c0 - sigma c1 > 0";
pub const C_MONOTONE: &str = "c_s strictly decreasing";
pub const G_INCREASING: &str = "g_s strictly increasing";
pub const G_FIRST: &str = "g_0 lower bound";
pub const ENERGY: &str = "energy inequality";
pub const LEMMA_NEW: &str = "g-form inequality with v^{j+1}";
pub const LEMMA_OLD: &str = "g-form inequality with v^j";

/// Where an inequality first failed. For the energy checks `s` holds the
/// length of the random series.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub alpha: f64,
    pub b: f64,
    pub j: usize,
    pub s: usize,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckTally {
    pub name: String,
    pub checked: u64,
    pub violations: u64,
    pub witness: Option<Witness>,
}

/// Ordered pass/fail counts per inequality.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SuiteReport {
    pub checks: Vec<CheckTally>,
}

impl SuiteReport {
    fn tally(&mut self, name: &str) -> &mut CheckTally {
        if let Some(i) = self.checks.iter().position(|c| c.name == name) {
            return &mut self.checks[i];
        }
        self.checks.push(CheckTally {
            name: name.to_string(),
            checked: 0,
            violations: 0,
            witness: None,
        });
        self.checks.last_mut().unwrap()
    }

    /// Records whether `ok` held for the inequality `lhs (<|<=) rhs`.
    fn record(&mut self, name: &str, ok: bool, at: impl FnOnce() -> Witness) {
        let t = self.tally(name);
        t.checked += 1;
        if !ok {
            t.violations += 1;
            if t.witness.is_none() {
                t.witness = Some(at());
            }
        }
    }

    pub fn merge(&mut self, other: SuiteReport) {
        for c in other.checks {
            let t = self.tally(&c.name);
            t.checked += c.checked;
            t.violations += c.violations;
            if t.witness.is_none() {
                t.witness = c.witness;
            }
        }
    }

    pub fn violations(&self) -> u64 {
        self.checks.iter().map(|c| c.violations).sum()
    }

    pub fn passed(&self) -> bool {
        self.violations() == 0
    }

    pub fn get(&self, name: &str) -> Option<&CheckTally> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn weight_for(b: f64) -> WeightFunction {
    WeightFunction::exponential(b).expect("rates are validated by the caller")
}

/// Checks the α-only bounds on `a_s`, `b_s` for `s = 1..=max_s`.
pub fn power_bounds<S: CoefficientSource + ?Sized>(source: &S, max_s: usize) -> SuiteReport {
    let order = source.order();
    let (alpha, sigma) = (order.alpha(), order.sigma());
    let k = alpha * (1.0 - alpha);
    let mut r = SuiteReport::default();
    let w = |s: usize, lhs: f64, rhs: f64| Witness {
        alpha,
        b: 0.0,
        j: 0,
        s,
        lhs,
        rhs,
    };
    for s in 1..=max_s {
        let sf = s as f64;
        let a = source.a(s);
        let lo = (1.0 - alpha) / (sf + sigma).powf(alpha);
        let hi = (1.0 - alpha) / (sf + sigma - 1.0).powf(alpha);
        r.record(A_BOUNDS, lo < a && a < hi, || {
            w(s, a, if lo < a { hi } else { lo })
        });

        let da = a - source.a(s + 1);
        let lo = k / (sf + sigma + 1.0).powf(alpha + 1.0);
        let hi = k / (sf + sigma - 1.0).powf(alpha + 1.0);
        r.record(A_DIFF_BOUNDS, lo < da && da < hi, || {
            w(s, da, if lo < da { hi } else { lo })
        });

        let b = source.b(s);
        let lo = k / (12.0 * (sf + sigma).powf(alpha + 1.0));
        let hi = k / (12.0 * (sf + sigma - 1.0).powf(alpha + 1.0));
        r.record(B_BOUNDS, lo < b && b < hi, || {
            w(s, b, if lo < b { hi } else { lo })
        });

        let amb = a - b;
        let lo = 0.5 * (1.0 - alpha) * (sf + sigma).powf(-alpha);
        r.record(A_MINUS_B, amb > lo, || w(s, amb, lo));
    }
    let lead = (2.0 * sigma - 1.0) * (source.a(0) + source.b(1))
        - sigma * (source.a(1) + source.b(2) - source.b(1));
    let lo = k / (4.0 * sigma * (1.0 + sigma).powf(alpha));
    r.record(LEADING_COMBINATION, lead > lo, || w(0, lead, lo));
    r
}

/// Checks the `c`-table and g-form properties for every level `j = 1..=max_j`
/// with `τ = horizon/max_j` and `λ = e^{−bt}`.
pub fn table_properties<S: CoefficientSource + ?Sized>(
    source: &S,
    b: f64,
    max_j: usize,
    horizon: f64,
) -> SuiteReport {
    let order = source.order();
    let (alpha, sigma) = (order.alpha(), order.sigma());
    let weight = weight_for(b);
    let tau = horizon / max_j as f64;
    let gamma_1a = gamma(1.0 - alpha);
    let mut r = SuiteReport::default();
    for j in 1..=max_j {
        let table = table_for(source, &weight, tau, j);
        let c = &table.c;
        let w = |s: usize, lhs: f64, rhs: f64| Witness {
            alpha,
            b,
            j,
            s,
            lhs,
            rhs,
        };
        let jf = j as f64;
        let lam = weight.value((jf + sigma) * tau);

        let lo = 0.5 * (1.0 - alpha) * lam / (jf + sigma).powf(alpha);
        r.record(C_LAST, c[j] > lo, || w(j, c[j], lo));

        let lead = (2.0 * sigma - 1.0) * c[0] - sigma * c[1];
        r.record(C_LEADING, lead > 0.0, || w(0, lead, 0.0));

        for s in 0..j {
            r.record(C_MONOTONE, c[s] > c[s + 1], || w(s, c[s], c[s + 1]));
        }

        let g = table.g();
        for s in 0..j {
            r.record(G_INCREASING, g[s] < g[s + 1], || w(s, g[s], g[s + 1]));
        }
        let t = (jf + sigma) * tau;
        let lo = lam / (2.0 * gamma_1a * t.powf(alpha));
        r.record(G_FIRST, g[0] > lo, || w(0, g[0], lo));
    }
    r
}

/// Corollary-style energy inequality and both g-form inequalities on random
/// series with values uniform in [−1, 1] and lengths `2..=max_len`.
pub fn energy_properties<S: CoefficientSource + ?Sized>(
    source: &S,
    b: f64,
    cases: usize,
    max_len: usize,
    seed: u64,
) -> SuiteReport {
    let order = source.order();
    let (alpha, sigma) = (order.alpha(), order.sigma());
    let weight = weight_for(b);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut r = SuiteReport::default();
    for _ in 0..cases {
        let len = rng.gen_range(2..=max_len.max(2));
        let v: Vec<f64> = (0..len).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let v2: Vec<f64> = v.iter().map(|x| x * x).collect();
        let tau = 1.0 / (len - 1) as f64;
        for j in 0..len - 1 {
            let table = table_for(source, &weight, tau, j);
            let dv = apply_with_table(&v, &table);
            let dv2 = apply_with_table(&v2, &table);
            let g = table.g();
            let gj = g[j];
            let gprev = if j == 0 { 0.0 } else { g[j - 1] };
            let w = |lhs: f64, rhs: f64| Witness {
                alpha,
                b,
                j,
                s: len,
                lhs,
                rhs,
            };
            // Rounding slack relative to the magnitudes involved.
            let slack = |x: f64, y: f64| 1e-12 * (x.abs() + y.abs() + gj);

            let lhs = (sigma * v[j + 1] + (1.0 - sigma) * v[j]) * dv;
            let rhs = 0.5 * dv2;
            r.record(ENERGY, lhs >= rhs - slack(lhs, rhs), || w(lhs, rhs));

            let lhs = v[j + 1] * dv;
            let rhs = 0.5 * dv2 + dv * dv / (2.0 * gj);
            r.record(LEMMA_NEW, lhs >= rhs - slack(lhs, rhs), || w(lhs, rhs));

            let lhs = v[j] * dv;
            let rhs = 0.5 * dv2 - dv * dv / (2.0 * (gj - gprev));
            r.record(LEMMA_OLD, lhs >= rhs - slack(lhs, rhs), || w(lhs, rhs));
        }
    }
    r
}

/// Parameters of a full verification run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    #[serde(default = "default_alphas")]
    pub alphas: Vec<f64>,
    /// Decay rates `b` of `λ = e^{−bt}`; 0 means `λ ≡ 1`.
    #[serde(default = "default_rates")]
    pub rates: Vec<f64>,
    #[serde(default = "default_max_j")]
    pub max_j: usize,
    #[serde(default = "default_cases")]
    pub cases: usize,
    #[serde(default = "default_max_len")]
    pub max_len: usize,
    #[serde(default = "default_horizon")]
    pub horizon: f64,
}

fn default_alphas() -> Vec<f64> {
    vec![0.1, 0.3, 0.5, 0.7, 0.9]
}
fn default_rates() -> Vec<f64> {
    vec![0.0, 1.0, 2.0, 3.0]
}
fn default_max_j() -> usize {
    512
}
fn default_cases() -> usize {
    500
}
fn default_max_len() -> usize {
    64
}
fn default_horizon() -> f64 {
    1.0
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            alphas: default_alphas(),
            rates: default_rates(),
            max_j: default_max_j(),
            cases: default_cases(),
            max_len: default_max_len(),
            horizon: default_horizon(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub coefficients: SuiteReport,
    pub energy: SuiteReport,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.coefficients.passed() && self.energy.passed()
    }
}

/// Runs every suite for every `(α, b)` pair, using `make_source` to supply
/// the `a`/`b` coefficients for each α.
pub fn run_verify_with<S, F>(
    cfg: &VerifyConfig,
    seed: u64,
    jobs: usize,
    make_source: F,
) -> Result<VerifyReport>
where
    S: CoefficientSource + Sync,
    F: Fn(FractionalOrder, usize) -> S + Sync,
{
    for &b in &cfg.rates {
        WeightFunction::exponential(b)?;
    }
    let orders = cfg
        .alphas
        .iter()
        .map(|&a| FractionalOrder::new(a))
        .collect::<Result<Vec<_>>>()?;
    let need = cfg.max_j.max(cfg.max_len) + 2;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| crate::Error::arg(format!("thread pool: {e}")))?;

    let per_alpha: Vec<(SuiteReport, SuiteReport)> = pool.install(|| {
        orders
            .par_iter()
            .enumerate()
            .map(|(ai, &order)| {
                let source = make_source(order, need);
                let mut coeff = power_bounds(&source, cfg.max_j);
                let mut energy = SuiteReport::default();
                for (bi, &b) in cfg.rates.iter().enumerate() {
                    coeff.merge(table_properties(&source, b, cfg.max_j, cfg.horizon));
                    let case_seed =
                        seed ^ ((ai as u64) << 32 | bi as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
                    energy.merge(energy_properties(
                        &source,
                        b,
                        cfg.cases,
                        cfg.max_len,
                        case_seed,
                    ));
                }
                (coeff, energy)
            })
            .collect()
    });
    let mut report = VerifyReport {
        seed,
        coefficients: SuiteReport::default(),
        energy: SuiteReport::default(),
    };
    for (c, e) in per_alpha {
        report.coefficients.merge(c);
        report.energy.merge(e);
    }
    Ok(report)
}

/// [`run_verify_with`] on the library's own coefficients.
pub fn run_verify(cfg: &VerifyConfig, seed: u64, jobs: usize) -> Result<VerifyReport> {
    run_verify_with(cfg, seed, jobs, |order, need| {
        let mut p = PowerCoefficients::new(order);
        p.extend_to(need);
        p
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suite_passes() {
        let cfg = VerifyConfig {
            alphas: vec![0.2, 0.8],
            rates: vec![0.0, 2.0],
            max_j: 40,
            cases: 20,
            max_len: 16,
            horizon: 1.0,
        };
        let r = run_verify(&cfg, 7, 2).unwrap();
        assert!(r.passed(), "{r:#?}");
        assert!(r.coefficients.get(C_MONOTONE).unwrap().checked > 0);
        assert!(r.energy.get(ENERGY).unwrap().checked > 0);
    }

    #[test]
    fn rejects_bad_parameters() {
        let cfg = VerifyConfig {
            alphas: vec![1.2],
            ..VerifyConfig::default()
        };
        assert!(run_verify(&cfg, 0, 1).is_err());
        let cfg = VerifyConfig {
            rates: vec![-1.0],
            ..VerifyConfig::default()
        };
        assert!(run_verify(&cfg, 0, 1).is_err());
    }
}
