//! Serialization of reports to CSV, Markdown and JSON.
//!
//! Every floating-point value in a data file goes through [`sci`]: six
//! significant digits in scientific notation, ties rounded to even on the
//! exact binary value.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::analysis::{ConvergenceReport, StabilityReport};
use crate::error::{Error, Result};
use crate::operator::OrderReport;
use crate::properties::{SuiteReport, VerifyReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Markdown,
    Json,
}

impl OutputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Markdown => "md",
            OutputFormat::Json => "json",
        }
    }
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "markdown" | "md" => Ok(OutputFormat::Markdown),
            "json" => Ok(OutputFormat::Json),
            _ => Err(Error::arg(format!("unknown output format {s:?}"))),
        }
    }
}

/// `x` with six significant digits, e.g. `1.38373e-4`.
pub fn sci(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.5e}")
    } else {
        format!("{x}")
    }
}

fn opt_sci(x: Option<f64>) -> String {
    x.map(sci).unwrap_or_default()
}

/// `x` rounded to the value [`sci`] prints.
pub fn round_sig(x: f64) -> f64 {
    if x.is_finite() {
        sci(x).parse().expect("formatted float parses")
    } else {
        x
    }
}

/// Rounds every non-integer number in a JSON tree with [`round_sig`].
pub fn round_json(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = round_sig(n.as_f64().expect("f64 number"));
            serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(round_json).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, round_json(v))).collect()),
        other => other,
    }
}

/// Pretty JSON of `v` with rounded floats and a trailing newline.
pub fn to_json<T: Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(&round_json(serde_json::to_value(v)?))?;
    s.push('\n');
    Ok(s)
}

fn csv_string(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::arg(format!("csv flush: {}", e.error())))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub const STUDY_COLUMNS: [&str; 11] = [
    "scheme", "b", "alpha", "N", "M", "h", "tau", "err_l2", "co_l2", "err_max", "co_max",
];

/// One row per level.
pub fn study_csv(r: &ConvergenceReport) -> Result<String> {
    let b = opt_sci(r.b);
    let rows = r.levels.iter().map(|l| {
        vec![
            r.scheme.label().to_string(),
            b.clone(),
            sci(r.alpha),
            l.n.to_string(),
            l.m.to_string(),
            sci(l.h),
            sci(l.tau),
            sci(l.err_l2),
            opt_sci(l.co_l2),
            sci(l.err_max),
            opt_sci(l.co_max),
        ]
    });
    csv_string(&STUDY_COLUMNS, rows)
}

fn fraction(x: f64) -> String {
    let inv = 1.0 / x;
    if (inv - inv.round()).abs() < 1e-9 * inv {
        format!("1/{}", inv.round())
    } else {
        sci(x)
    }
}

/// Paper-style table: step, max L2 error, CO, max C error, CO.
pub fn study_markdown(r: &ConvergenceReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "## {} scheme, {}", r.scheme.label(), r.problem);
    let _ = writeln!(s);
    let b = r.b.map(|b| format!("b = {b}, ")).unwrap_or_default();
    let _ = writeln!(s, "{b}alpha = {}, {}", r.alpha, r.coupling);
    if r.self_convergence {
        let _ = writeln!(s, "errors measured against the next finer level");
    }
    for n in &r.notes {
        let _ = writeln!(s, "- {n}");
    }
    let _ = writeln!(s);
    let _ = writeln!(s, "| N | M | h | tau | max ‖z‖₀ | CO | max ‖z‖_C | CO |");
    let _ = writeln!(s, "|---|---|---|---|---|---|---|---|");
    for l in &r.levels {
        let _ = writeln!(
            s,
            "| {} | {} | {} | {} | {} | {} | {} | {} |",
            l.n,
            l.m,
            fraction(l.h),
            fraction(l.tau),
            sci(l.err_l2),
            opt_sci(l.co_l2),
            sci(l.err_max),
            opt_sci(l.co_max)
        );
    }
    for f in &r.failures {
        let _ = writeln!(s, "\nlevel {} failed: {}", f.level, f.error);
    }
    s
}

pub fn stability_csv(r: &StabilityReport) -> Result<String> {
    let rows = r
        .levels
        .iter()
        .map(|l| vec![l.j.to_string(), sci(l.lhs), sci(l.rhs), sci(l.ratio)]);
    csv_string(&["j", "lhs", "rhs", "ratio"], rows)
}

pub fn stability_markdown(r: &StabilityReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "## A priori estimate, {} scheme", r.scheme.label());
    let _ = writeln!(s);
    let _ = writeln!(s, "- c1 = {}", sci(r.k_min));
    let _ = writeln!(s, "- bound constant = {}", sci(r.bound_constant));
    let _ = writeln!(s, "- initial norm^2 = {}", sci(r.initial_norm_sq));
    let _ = writeln!(s, "- max source norm^2 = {}", sci(r.max_source_norm_sq));
    let _ = writeln!(s, "- worst lhs/rhs = {}", sci(r.worst_ratio));
    s
}

fn witness_cells(w: &Option<crate::properties::Witness>) -> Vec<String> {
    match w {
        Some(w) => vec![
            sci(w.alpha),
            sci(w.b),
            w.j.to_string(),
            w.s.to_string(),
            sci(w.lhs),
            sci(w.rhs),
        ],
        None => vec![String::new(); 6],
    }
}

pub fn verify_csv(r: &VerifyReport) -> Result<String> {
    let rows = [("coefficients", &r.coefficients), ("energy", &r.energy)]
        .into_iter()
        .flat_map(|(suite, rep)| {
            rep.checks.iter().map(move |c| {
                let mut row = vec![
                    suite.to_string(),
                    c.name.clone(),
                    c.checked.to_string(),
                    c.violations.to_string(),
                ];
                row.extend(witness_cells(&c.witness));
                row
            })
        });
    csv_string(
        &[
            "suite",
            "check",
            "checked",
            "violations",
            "alpha",
            "b",
            "j",
            "s",
            "lhs",
            "rhs",
        ],
        rows,
    )
}

fn suite_markdown(s: &mut String, title: &str, r: &SuiteReport) {
    let _ = writeln!(s, "### {title}");
    let _ = writeln!(s);
    let _ = writeln!(
        s,
        "| check | checked | violations | witness (alpha, b, j, s) |"
    );
    let _ = writeln!(s, "|---|---|---|---|");
    for c in &r.checks {
        let w = c
            .witness
            .as_ref()
            .map(|w| format!("({}, {}, {}, {})", w.alpha, w.b, w.j, w.s))
            .unwrap_or_default();
        let _ = writeln!(
            s,
            "| {} | {} | {} | {} |",
            c.name, c.checked, c.violations, w
        );
    }
    let _ = writeln!(s);
}

pub fn verify_markdown(r: &VerifyReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "## Property verification (seed {})", r.seed);
    let _ = writeln!(s);
    suite_markdown(&mut s, "Coefficient inequalities", &r.coefficients);
    suite_markdown(&mut s, "Energy inequalities", &r.energy);
    let _ = writeln!(
        s,
        "{}",
        if r.passed() {
            "all checks passed"
        } else {
            "VIOLATIONS FOUND"
        }
    );
    s
}

pub fn oracle_csv(r: &OrderReport) -> Result<String> {
    let rows = r.levels.iter().map(|l| {
        vec![
            r.function.clone(),
            sci(r.alpha),
            r.weight.clone(),
            l.m.to_string(),
            sci(l.tau),
            sci(l.max_error),
            opt_sci(l.slope),
        ]
    });
    csv_string(
        &[
            "function",
            "alpha",
            "weight",
            "M",
            "tau",
            "max_error",
            "slope",
        ],
        rows,
    )
}

pub fn oracle_markdown(r: &OrderReport) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "## Discrete derivative of v = {} against quadrature\n\nalpha = {}, lambda = {}, T = {}\n",
        r.function, r.alpha, r.weight, r.horizon
    );
    let _ = writeln!(s, "| M | tau | max error | slope |");
    let _ = writeln!(s, "|---|---|---|---|");
    for l in &r.levels {
        let _ = writeln!(
            s,
            "| {} | {} | {} | {} |",
            l.m,
            fraction(l.tau),
            sci(l.max_error),
            opt_sci(l.slope)
        );
    }
    s
}

/// `x,u[,exact,error]` for every node of a layer.
pub fn solution_csv(nodes: &[f64], u: &[f64], exact: Option<&[f64]>) -> Result<String> {
    let header: &[&str] = if exact.is_some() {
        &["x", "u", "exact", "error"]
    } else {
        &["x", "u"]
    };
    let rows = nodes.iter().enumerate().map(|(i, &x)| {
        let mut row = vec![sci(x), sci(u[i])];
        if let Some(e) = exact {
            row.push(sci(e[i]));
            row.push(sci(u[i] - e[i]));
        }
        row
    });
    csv_string(header, rows)
}
