//! JSON-configured runs behind the `fracstep` binary.
//!
//! A config names one command and carries the blocks it needs:
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "command": "study",
//!   "problem": {"problem": "test2", "alpha": 0.5, "b": 2.0},
//!   "scheme": "compact",
//!   "study": {"coupling": {"rule": "fixed-h", "n": 500}, "levels": [10, 20, 40]},
//!   "output": {"dir": "out", "format": "markdown"}
//! }
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analysis::{errors_against, run_study, stability_audit, Coupling, RunErrors};
use crate::error::{Error, Result};
use crate::operator::{order_study, SmoothFunction, ORACLE_TOL};
use crate::problems::{load_problem, CoefficientKind, ProblemConfig, ProblemSpec};
use crate::properties::{run_verify, VerifyConfig};
use crate::report::{self, OutputFormat};
use crate::solver::{solve_scheme, Scheme};
use crate::weights::{FractionalOrder, WeightFunction};

pub const SCHEMA_VERSION: u32 = 1;

/// Errors below this make the oracle slope meaningless; the run is flagged
/// exact instead.
pub const EXACT_THRESHOLD: f64 = 1e-12;
pub const MIN_ORACLE_SLOPE: f64 = 1.9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Solve,
    Study,
    Verify,
    Oracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n: usize,
    pub m: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    pub coupling: Coupling,
    pub levels: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    /// `t`, `t2`, `t3`, ... or `const`.
    pub function: String,
    pub alpha: f64,
    /// `const` or `exp`; defaults to `exp` when `b` is given.
    #[serde(default)]
    pub weight: Option<String>,
    #[serde(default)]
    pub b: Option<f64>,
    #[serde(default = "one")]
    pub horizon: f64,
    pub steps: Vec<usize>,
    #[serde(default = "oracle_tol")]
    pub tol: f64,
}

fn one() -> f64 {
    1.0
}
fn oracle_tol() -> f64 {
    ORACLE_TOL
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    #[serde(default)]
    pub format: OutputFormat,
}

fn default_dir() -> PathBuf {
    PathBuf::from("out")
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: default_dir(),
            format: OutputFormat::Csv,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub command: Command,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub problem: Option<ProblemConfig>,
    #[serde(default = "default_scheme")]
    pub scheme: Scheme,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub study: Option<StudyConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verify: Option<VerifyConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleConfig>,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub seed: u64,
}

fn default_scheme() -> Scheme {
    Scheme::SecondOrder
}

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub command: Option<Command>,
    pub output: Option<PathBuf>,
    pub format: Option<OutputFormat>,
    pub seed: Option<u64>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn apply(&mut self, o: &Overrides) -> Result<()> {
        if let Some(c) = o.command {
            if c != self.command {
                return Err(Error::Config(format!(
                    "subcommand {:?} does not match config command {:?}",
                    c, self.command
                )));
            }
        }
        if let Some(d) = &o.output {
            self.output.dir = d.clone();
        }
        if let Some(f) = o.format {
            self.output.format = f;
        }
        if let Some(s) = o.seed {
            self.seed = s;
        }
        Ok(())
    }

    /// Structural checks that need no computation.
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        let need = |present: bool, block: &str| {
            if present {
                Ok(())
            } else {
                Err(Error::Config(format!(
                    "command {:?} needs a \"{block}\" block",
                    self.command
                )))
            }
        };
        match self.command {
            Command::Solve => {
                need(self.problem.is_some(), "problem")?;
                need(self.grid.is_some(), "grid")?;
            }
            Command::Study => {
                need(self.problem.is_some(), "problem")?;
                need(self.study.is_some(), "study")?;
                if self.study.as_ref().is_some_and(|s| s.levels.is_empty()) {
                    return Err(Error::Config("study.levels must not be empty".into()));
                }
            }
            Command::Verify => {}
            Command::Oracle => need(self.oracle.is_some(), "oracle")?,
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub success: bool,
    pub files: Vec<PathBuf>,
    pub summary: String,
}

fn problem_for(cfg: &RunConfig) -> Result<ProblemSpec> {
    let p = load_problem(cfg.problem.as_ref().expect("validated"))?;
    if cfg.scheme == Scheme::Compact && p.kind != CoefficientKind::TimeOnly {
        return Err(Error::InvalidProblem(format!(
            "the compact scheme needs k and q independent of x; {} has x-dependent coefficients",
            p.name
        )));
    }
    Ok(p)
}

struct Writer {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Writer {
    fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    fn put(&mut self, name: &str, contents: &str) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
        self.files.push(path);
        Ok(())
    }
}

#[derive(Serialize)]
struct SolveSummary<'a> {
    problem: &'a str,
    scheme: Scheme,
    alpha: f64,
    b: Option<f64>,
    n: usize,
    m: usize,
    h: f64,
    tau: f64,
    errors: Option<RunErrors>,
    stability: &'a crate::analysis::StabilityReport,
    x: Vec<f64>,
    u: Vec<f64>,
}

pub fn cmd_solve(cfg: &RunConfig) -> Result<Outcome> {
    let problem = problem_for(cfg)?;
    let grid = cfg.grid.expect("validated");
    let history = solve_scheme(cfg.scheme, &problem, grid.n, grid.m)?;
    let audit = stability_audit(cfg.scheme, &history, &problem);
    let nodes = history.grid.nodes();
    let t_end = history.time(history.level());
    let exact_layer: Option<Vec<f64>> = problem
        .exact
        .as_ref()
        .map(|e| nodes.iter().map(|&x| e(x, t_end)).collect());
    let errors = problem
        .exact
        .as_ref()
        .map(|e| errors_against(&history, |x, t| e(x, t)));

    let mut w = Writer::new(&cfg.output.dir)?;
    match cfg.output.format {
        OutputFormat::Csv => {
            w.put(
                "solution.csv",
                &report::solution_csv(&nodes, history.last(), exact_layer.as_deref())?,
            )?;
            if let Some(e) = errors {
                w.put(
                    "errors.csv",
                    &format!(
                        "err_l2,err_max\n{},{}\n",
                        report::sci(e.l2),
                        report::sci(e.max)
                    ),
                )?;
            }
            w.put("stability.csv", &report::stability_csv(&audit)?)?;
        }
        OutputFormat::Markdown => {
            let mut s = format!(
                "## {} scheme, {}\n\nN = {}, M = {}, alpha = {}\n\n",
                cfg.scheme.label(),
                problem.name,
                grid.n,
                grid.m,
                problem.alpha()
            );
            if let Some(e) = errors {
                s += &format!(
                    "| max ‖z‖₀ | max ‖z‖_C |\n|---|---|\n| {} | {} |\n\n",
                    report::sci(e.l2),
                    report::sci(e.max)
                );
            }
            s += &report::stability_markdown(&audit);
            w.put("solve.md", &s)?;
            w.put(
                "solution.csv",
                &report::solution_csv(&nodes, history.last(), exact_layer.as_deref())?,
            )?;
        }
        OutputFormat::Json => {
            let summary = SolveSummary {
                problem: &problem.name,
                scheme: cfg.scheme,
                alpha: problem.alpha(),
                b: problem.weight.rate(),
                n: grid.n,
                m: grid.m,
                h: history.grid.h,
                tau: history.tau,
                errors,
                stability: &audit,
                x: nodes.clone(),
                u: history.last().to_vec(),
            };
            w.put("solve.json", &report::to_json(&summary)?)?;
        }
    }
    let mut summary = format!(
        "{} scheme on {}: N={}, M={}, stability ratio {}",
        cfg.scheme.label(),
        problem.name,
        grid.n,
        grid.m,
        report::sci(audit.worst_ratio)
    );
    if let Some(e) = errors {
        summary += &format!(
            ", err_l2 {}, err_max {}",
            report::sci(e.l2),
            report::sci(e.max)
        );
    }
    Ok(Outcome {
        success: audit.worst_ratio <= 1.0,
        files: w.files,
        summary,
    })
}

pub fn cmd_study(cfg: &RunConfig, jobs: usize) -> Result<Outcome> {
    let problem = problem_for(cfg)?;
    let study = cfg.study.as_ref().expect("validated");
    let report = run_study(&problem, cfg.scheme, &study.coupling, &study.levels, jobs)?;
    let mut w = Writer::new(&cfg.output.dir)?;
    match cfg.output.format {
        OutputFormat::Csv => w.put("study.csv", &report::study_csv(&report)?)?,
        OutputFormat::Markdown => w.put("study.md", &report::study_markdown(&report))?,
        OutputFormat::Json => w.put("study.json", &report::to_json(&report)?)?,
    }
    let mut summary = format!(
        "{} levels completed, {} failed",
        report.levels.len(),
        report.failures.len()
    );
    for f in &report.failures {
        summary += &format!("\nlevel {}: {}", f.level, f.error);
    }
    Ok(Outcome {
        success: report.complete(),
        files: w.files,
        summary,
    })
}

pub fn cmd_verify(cfg: &RunConfig, jobs: usize) -> Result<Outcome> {
    let vc = cfg.verify.clone().unwrap_or_default();
    let report = run_verify(&vc, cfg.seed, jobs)?;
    let mut w = Writer::new(&cfg.output.dir)?;
    match cfg.output.format {
        OutputFormat::Csv => w.put("verify.csv", &report::verify_csv(&report)?)?,
        OutputFormat::Markdown => w.put("verify.md", &report::verify_markdown(&report))?,
        OutputFormat::Json => w.put("verify.json", &report::to_json(&report)?)?,
    }
    let mut summary = String::new();
    for c in report
        .coefficients
        .checks
        .iter()
        .chain(&report.energy.checks)
    {
        summary += &format!(
            "{}: {} checked, {} violations",
            c.name, c.checked, c.violations
        );
        if let Some(wt) = &c.witness {
            summary += &format!(
                " (first at alpha={}, b={}, j={}, s={}: lhs={}, rhs={})",
                wt.alpha, wt.b, wt.j, wt.s, wt.lhs, wt.rhs
            );
        }
        summary.push('\n');
    }
    Ok(Outcome {
        success: report.passed(),
        files: w.files,
        summary: summary.trim_end().to_string(),
    })
}

#[derive(Serialize)]
struct OracleSummary<'a> {
    #[serde(flatten)]
    report: &'a crate::operator::OrderReport,
    exact: bool,
    passed: bool,
}

pub fn cmd_oracle(cfg: &RunConfig) -> Result<Outcome> {
    let oc = cfg.oracle.as_ref().expect("validated");
    let order = FractionalOrder::new(oc.alpha)?;
    let weight = match (&oc.weight, oc.b) {
        (Some(name), b) => WeightFunction::by_name(name, b)?,
        (None, Some(b)) => WeightFunction::exponential(b)?,
        (None, None) => WeightFunction::constant(),
    };
    let v = SmoothFunction::by_name(&oc.function)?;
    let rep = order_study(&v, order, &weight, oc.horizon, &oc.steps, oc.tol)?;
    let exact = rep.max_error() < EXACT_THRESHOLD;
    let slope = rep.finest_slope();
    let passed = exact || slope.is_some_and(|s| s >= MIN_ORACLE_SLOPE);

    let mut w = Writer::new(&cfg.output.dir)?;
    match cfg.output.format {
        OutputFormat::Csv => w.put("oracle.csv", &report::oracle_csv(&rep)?)?,
        OutputFormat::Markdown => {
            let mut s = report::oracle_markdown(&rep);
            if exact {
                s += "\nexact: errors at rounding level, slope not checked\n";
            }
            w.put("oracle.md", &s)?
        }
        OutputFormat::Json => w.put(
            "oracle.json",
            &report::to_json(&OracleSummary {
                report: &rep,
                exact,
                passed,
            })?,
        )?,
    }
    let summary = if exact {
        format!(
            "exact: max error {} below {EXACT_THRESHOLD:e}",
            report::sci(rep.max_error())
        )
    } else {
        format!(
            "finest slope {} (need >= {MIN_ORACLE_SLOPE})",
            slope.map(report::sci).unwrap_or_else(|| "n/a".into())
        )
    };
    Ok(Outcome {
        success: passed,
        files: w.files,
        summary,
    })
}

/// Validates and runs `cfg`.
pub fn execute(cfg: &RunConfig, jobs: usize) -> Result<Outcome> {
    cfg.validate()?;
    match cfg.command {
        Command::Solve => cmd_solve(cfg),
        Command::Study => cmd_study(cfg, jobs),
        Command::Verify => cmd_verify(cfg, jobs),
        Command::Oracle => cmd_oracle(cfg),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_wrong_schema_and_missing_blocks() {
        let c = RunConfig::from_json(r#"{"schema_version": 2, "command": "verify"}"#).unwrap();
        assert!(matches!(c.validate(), Err(Error::Config(_))));
        let c = RunConfig::from_json(r#"{"schema_version": 1, "command": "solve"}"#).unwrap();
        assert!(matches!(c.validate(), Err(Error::Config(_))));
        assert!(RunConfig::from_json(r#"{"schema_version": 1, "command": "fly"}"#).is_err());
        assert!(
            RunConfig::from_json(r#"{"schema_version": 1, "command": "verify", "x": 1}"#).is_err()
        );
    }

    #[test]
    fn overrides_take_precedence() {
        let mut c =
            RunConfig::from_json(r#"{"schema_version": 1, "command": "verify", "seed": 3}"#)
                .unwrap();
        c.apply(&Overrides {
            seed: Some(9),
            format: Some(OutputFormat::Json),
            ..Default::default()
        })
        .unwrap();
        assert_eq!(c.seed, 9);
        assert_eq!(c.output.format, OutputFormat::Json);
        assert!(c
            .apply(&Overrides {
                command: Some(Command::Solve),
                ..Default::default()
            })
            .is_err());
    }
}
