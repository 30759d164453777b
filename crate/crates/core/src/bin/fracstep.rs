use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use fracstep::cli::{execute, Command, Overrides, RunConfig};
use fracstep::report::OutputFormat;

#[derive(Parser)]
#[command(
    name = "fracstep",
    version,
    about = "Solvers for diffusion equations with a weighted Caputo derivative"
)]
struct Args {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Solve once on a single grid
    Solve(Common),
    /// Run a grid refinement study
    Study(Common),
    /// Check the coefficient and energy inequalities
    Verify(Common),
    /// Compare the discrete derivative with a quadrature oracle
    Oracle(Common),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Markdown,
    Json,
}

#[derive(clap::Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, env = "FRACSTEP_JOBS")]
    jobs: Option<usize>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let (command, c) = match args.command {
        Sub::Solve(c) => (Command::Solve, c),
        Sub::Study(c) => (Command::Study, c),
        Sub::Verify(c) => (Command::Verify, c),
        Sub::Oracle(c) => (Command::Oracle, c),
    };
    let overrides = Overrides {
        command: Some(command),
        output: c.output,
        format: c.format.map(|f| match f {
            Format::Csv => OutputFormat::Csv,
            Format::Markdown => OutputFormat::Markdown,
            Format::Json => OutputFormat::Json,
        }),
        seed: c.seed,
    };
    let jobs = c
        .jobs
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let run = RunConfig::load(&c.config).and_then(|mut cfg| {
        cfg.apply(&overrides)?;
        execute(&cfg, jobs)
    });
    match run {
        Ok(out) => {
            println!("{}", out.summary);
            for f in &out.files {
                println!("wrote {}", f.display());
            }
            if out.success {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
