//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any gating criterion fails.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use fracstep::analysis::{stability_audit, ConvergenceReport, Coupling, Drive};
use fracstep::coefficients::PowerCoefficients;
use fracstep::properties::{
    energy_properties, power_bounds, table_properties, SuiteReport, VerifyConfig,
};
use fracstep::tridiag::{thomas_solve, TridiagonalSystem};
use fracstep::{
    make_test1, make_test2, order_study, run_study, solve_scheme, FractionalOrder, Scheme,
    SmoothFunction, WeightFunction,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const JOBS: usize = 4;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn summarize(r: &SuiteReport) -> String {
    let checked: u64 = r.checks.iter().map(|c| c.checked).sum();
    let mut s = format!(
        "{} inequalities, {checked} evaluations, {} violations",
        r.checks.len(),
        r.violations()
    );
    if let Some(c) = r.checks.iter().find(|c| c.violations > 0) {
        s += &format!("; first: {} at {:?}", c.name, c.witness);
    }
    s
}

fn coefficient_suite() -> Outcome {
    let cfg = VerifyConfig::default();
    let start = Instant::now();
    let mut r = SuiteReport::default();
    for &alpha in &cfg.alphas {
        let mut p = PowerCoefficients::new(FractionalOrder::new(alpha).unwrap());
        p.extend_to(cfg.max_j + 2);
        r.merge(power_bounds(&p, cfg.max_j));
        for &b in &cfg.rates {
            r.merge(table_properties(&p, b, cfg.max_j, cfg.horizon));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        r.passed() && secs < 10.0,
        format!("{}; {secs:.2} s", summarize(&r)),
    )
}

fn energy_suite() -> Outcome {
    let cfg = VerifyConfig::default();
    let mut r = SuiteReport::default();
    for (ai, &alpha) in cfg.alphas.iter().enumerate() {
        let mut p = PowerCoefficients::new(FractionalOrder::new(alpha).unwrap());
        p.extend_to(cfg.max_len + 2);
        for (bi, &b) in cfg.rates.iter().enumerate() {
            r.merge(energy_properties(
                &p,
                b,
                cfg.cases,
                cfg.max_len,
                (ai * 10 + bi) as u64,
            ));
        }
    }
    outcome(
        r.passed(),
        format!("{} series per (alpha, b); {}", cfg.cases, summarize(&r)),
    )
}

fn operator_order() -> Outcome {
    let start = Instant::now();
    let steps = [20, 40, 80, 160];
    let cubic = SmoothFunction::by_name("t3").unwrap();
    let decay = WeightFunction::exponential(1.0).unwrap();
    let mut pass = true;
    let mut detail = Vec::new();
    for alpha in [0.1, 0.5, 0.9] {
        let r = order_study(
            &cubic,
            FractionalOrder::new(alpha).unwrap(),
            &decay,
            1.0,
            &steps,
            1e-12,
        )
        .unwrap();
        let s = r.finest_slope().unwrap();
        pass &= (s - 2.0).abs() <= 0.1;
        detail.push(format!("alpha={alpha}: slope {s:.3}"));
    }
    let linear = SmoothFunction::by_name("t").unwrap();
    let r = order_study(
        &linear,
        FractionalOrder::new(0.5).unwrap(),
        &WeightFunction::constant(),
        1.0,
        &steps,
        1e-12,
    )
    .unwrap();
    pass &= r.max_error() < 1e-12;
    detail.push(format!("v=t exact to {:.1e}", r.max_error()));
    let secs = start.elapsed().as_secs_f64();
    pass &= secs < 60.0;
    detail.push(format!("{secs:.2} s"));
    outcome(pass, detail.join(", "))
}

fn orders(r: &ConvergenceReport) -> Vec<f64> {
    r.levels
        .iter()
        .flat_map(|l| [l.co_l2, l.co_max])
        .flatten()
        .collect()
}

fn within(xs: &[f64], lo: f64, hi: f64) -> bool {
    !xs.is_empty() && xs.iter().all(|&x| x >= lo && x <= hi)
}

fn span(xs: &[f64]) -> String {
    let lo = xs.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    format!("[{lo:.4}, {hi:.4}]")
}

fn worst_rel(r: &ConvergenceReport, expected: &[f64]) -> f64 {
    r.levels
        .iter()
        .zip(expected)
        .map(|(l, e)| ((l.err_l2 - e) / e).abs())
        .fold(0.0, f64::max)
}

/// Stability ratios of every run, for the audit criterion.
struct Audit {
    worst: f64,
    runs: usize,
}

impl Audit {
    fn add(&mut self, r: &ConvergenceReport) {
        for l in &r.levels {
            self.worst = self.worst.max(l.stability_ratio.unwrap_or(f64::INFINITY));
            self.runs += 1;
        }
        if !r.complete() {
            self.worst = f64::INFINITY;
        }
    }
}

fn compact_time_refinement(audit: &mut Audit) -> Outcome {
    let expected = [
        1.383725e-4,
        3.418301e-5,
        8.442745e-6,
        2.092596e-6,
        5.200842e-7,
        1.295146e-7,
    ];
    let p = make_test2(2.0, 0.5).unwrap();
    let r = run_study(
        &p,
        Scheme::Compact,
        &Coupling::FixedH { n: 500 },
        &[10, 20, 40, 80, 160, 320],
        JOBS,
    )
    .unwrap();
    audit.add(&r);
    let rel = worst_rel(&r, &expected);
    let co = orders(&r);
    outcome(
        r.complete() && rel <= 0.05 && within(&co, 1.98, 2.05),
        format!(
            "first error {:.6e}, worst relative gap {:.2}%, CO {}",
            r.levels[0].err_l2,
            100.0 * rel,
            span(&co)
        ),
    )
}

fn compact_space_refinement(audit: &mut Audit) -> Outcome {
    let expected = [1.216509e-3, 7.463500e-5, 4.635757e-6, 2.818584e-7];
    let p = make_test2(1.0, 0.9).unwrap();
    let levels = [4, 8, 16, 32];
    let r = run_study(
        &p,
        Scheme::Compact,
        &Coupling::FixedTau { m: 2000 },
        &levels,
        JOBS,
    )
    .unwrap();
    audit.add(&r);
    let rel = worst_rel(&r, &expected);
    let co = orders(&r);
    let pass = r.complete() && rel <= 0.05 && within(&co, 3.9, 4.1);

    let literal = Coupling::TauQuadratic {
        ratio: 16.0,
        drive: Drive::H,
    };
    let q = run_study(&p, Scheme::Compact, &literal, &levels, JOBS).unwrap();
    audit.add(&q);
    outcome(
        pass,
        format!(
            "tau=1/2000: worst relative gap {:.3}%, CO {}; tau=16h^2 (M=1..64, not gating): first error {:.3e}, CO {}",
            100.0 * rel,
            span(&co),
            q.levels[0].err_l2,
            span(&orders(&q))
        ),
    )
}

fn second_order_linked(audit: &mut Audit) -> Outcome {
    let blocks: [(f64, f64, [f64; 8]); 3] = [
        (
            1.0,
            0.9,
            [
                4.853172e-4,
                1.195117e-4,
                2.966661e-5,
                7.407823e-6,
                1.853344e-6,
                4.639354e-7,
                1.161322e-7,
                2.904554e-8,
            ],
        ),
        (
            2.0,
            0.5,
            [
                5.695428e-4,
                1.281254e-4,
                3.111526e-5,
                7.832071e-6,
                1.970207e-6,
                4.952711e-7,
                1.243664e-7,
                3.125438e-8,
            ],
        ),
        (
            3.0,
            0.1,
            [
                5.590468e-4,
                1.378485e-4,
                3.418923e-5,
                8.555678e-6,
                2.140670e-6,
                5.355715e-7,
                1.340154e-7,
                3.349770e-8,
            ],
        ),
    ];
    let coupling = Coupling::TauLinear {
        ratio: 3.0,
        drive: Drive::Tau,
    };
    let mut pass = true;
    let mut detail = vec!["N = 3M".to_string()];
    for (b, alpha, expected) in blocks {
        let p = make_test1(b, alpha).unwrap();
        let r = run_study(
            &p,
            Scheme::SecondOrder,
            &coupling,
            &[10, 20, 40, 80, 160, 320, 640, 1280],
            JOBS,
        )
        .unwrap();
        audit.add(&r);
        let co = orders(&r);
        pass &= r.complete() && within(&co, 1.95, 2.16);
        detail.push(format!(
            "b={b} alpha={alpha}: CO {}, magnitude gap {:.1}%",
            span(&co),
            100.0 * worst_rel(&r, &expected)
        ));
    }
    outcome(pass, detail.join("; "))
}

fn co_only(audit: &mut Audit) -> Outcome {
    let mut pass = true;
    let mut detail = Vec::new();
    for (b, alpha) in [(3.0, 0.9), (2.0, 0.5), (1.0, 0.1)] {
        let p = make_test1(b, alpha).unwrap();
        let r = run_study(
            &p,
            Scheme::SecondOrder,
            &Coupling::FixedH { n: 2000 },
            &[10, 20, 40, 80],
            JOBS,
        )
        .unwrap();
        audit.add(&r);
        let co = orders(&r);
        pass &= r.complete() && within(&co, 1.7, 2.4);
        detail.push(format!("h=1/2000 b={b}: {}", span(&co)));
    }
    let quad = Coupling::TauQuadratic {
        ratio: 16.0,
        drive: Drive::Tau,
    };
    for (b, alpha) in [(1.0, 0.9), (2.0, 0.5), (3.0, 0.1)] {
        let p = make_test2(b, alpha).unwrap();
        let r = run_study(
            &p,
            Scheme::Compact,
            &quad,
            &[10, 20, 40, 80, 160, 320, 640, 1280, 2560],
            JOBS,
        )
        .unwrap();
        audit.add(&r);
        let co = orders(&r);
        pass &= r.complete() && within(&co, 1.7, 2.4);
        detail.push(format!("tau=16h^2 b={b}: {}", span(&co)));
    }
    outcome(pass, detail.join("; "))
}

fn stability(audit: &mut Audit) -> Outcome {
    for (b, alpha) in [(1.0, 0.9), (2.0, 0.5), (3.0, 0.1)] {
        let p = make_test1(b, alpha).unwrap();
        let h = solve_scheme(Scheme::SecondOrder, &p, 60, 40).unwrap();
        let a = stability_audit(Scheme::SecondOrder, &h, &p);
        audit.worst = audit.worst.max(a.worst_ratio);
        audit.runs += 1;
    }
    outcome(
        audit.worst <= 1.0,
        format!("{} runs, worst lhs/rhs {:.3e}", audit.runs, audit.worst),
    )
}

fn manufactured() -> Outcome {
    let mut worst = 0.0f64;
    for (i, (b, alpha)) in [(1.0, 0.9), (2.0, 0.5), (3.0, 0.1)].into_iter().enumerate() {
        worst = worst.max(common::manufactured_gap(b, alpha, 100, 7 + i as u64));
    }
    outcome(
        worst < 1e-7,
        format!("worst gap {worst:.2e} over 300 points"),
    )
}

fn tridiagonal() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let n = rng.gen_range(1..300);
        let mut s = TridiagonalSystem::zeros(n);
        for i in 0..n {
            s.sub[i] = if i > 0 { rng.gen_range(-1.0..1.0) } else { 0.0 };
            s.sup[i] = if i + 1 < n {
                rng.gen_range(-1.0..1.0)
            } else {
                0.0
            };
            s.diag[i] = s.sub[i].abs() + s.sup[i].abs() + rng.gen_range(0.01..1.0);
            s.rhs[i] = rng.gen_range(-1.0..1.0);
        }
        let x = thomas_solve(&s).unwrap();
        let scale = s.matrix_norm() * x.iter().fold(0.0f64, |m, v| m.max(v.abs()))
            + s.rhs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        worst = worst.max(s.residual(&x) / scale);
    }
    // Dense check: the inverse of a small system times its matrix.
    let mut dense_ok = true;
    for n in 1..=16 {
        let mut s = TridiagonalSystem::zeros(n);
        for i in 0..n {
            s.sub[i] = if i > 0 { -1.0 } else { 0.0 };
            s.sup[i] = if i + 1 < n { -1.0 } else { 0.0 };
            s.diag[i] = 4.0;
        }
        for k in 0..n {
            s.rhs = (0..n).map(|i| if i == k { 1.0 } else { 0.0 }).collect();
            let col = thomas_solve(&s).unwrap();
            let back = s.apply(&col);
            dense_ok &= back
                .iter()
                .enumerate()
                .all(|(i, v)| (v - if i == k { 1.0 } else { 0.0 }).abs() < 1e-15);
        }
    }
    outcome(
        worst <= 1e-12 && dense_ok,
        format!(
            "worst relative residual {worst:.2e}, unit columns up to N=16 {}",
            if dense_ok { "exact" } else { "off" }
        ),
    )
}

fn main() -> ExitCode {
    let mut audit = Audit {
        worst: 0.0,
        runs: 0,
    };
    let mut results: Vec<(&str, Outcome)> = vec![
        ("1 coefficient inequalities", coefficient_suite()),
        ("2 energy inequalities on random series", energy_suite()),
        ("3 operator order against quadrature", operator_order()),
        (
            "4 compact scheme, h=1/500, b=2, alpha=0.5",
            compact_time_refinement(&mut audit),
        ),
        (
            "5 compact scheme, space refinement, b=1, alpha=0.9",
            compact_space_refinement(&mut audit),
        ),
        (
            "6 second-order scheme, tau=3h",
            second_order_linked(&mut audit),
        ),
        (
            "6b order-only blocks (h=1/2000, tau=16h^2)",
            co_only(&mut audit),
        ),
    ];
    results.push(("7 a priori estimate on every run", stability(&mut audit)));
    results.push(("8 manufactured source against quadrature", manufactured()));
    results.push(("9 tridiagonal solver", tridiagonal()));

    let mut failed = 0;
    for (name, o) in &results {
        println!(
            "{} [{name}] {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        failed += usize::from(!o.pass);
    }
    println!(
        "{} of {} criteria passed",
        results.len() - failed,
        results.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
