use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nclebesgue_cli::{run, Command, RunConfig};

#[derive(Parser)]
#[command(name = "nclebesgue", version, about = "Experiments with NC measures and their Lebesgue decomposition")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Subcommand, Clone, Copy)]
enum Sub {
    /// Moment table of a spec as CSV
    Moments,
    /// Gram-matrix positivity at a level
    Positivity,
    /// GNS row isometry diagnostics
    Gns,
    /// Herglotz values and a Schur-class sweep of the Cayley transform
    Herglotz,
    /// Pencil decomposition into AC and singular parts
    Decompose,
    /// AC / SINGULAR / MIXED verdict
    Classify,
    /// The point mass at (1, 0) for d = 2, checked item by item
    Example8,
    /// d = 1 pencil error against the analytic split over a level schedule
    Convergence,
}

#[derive(Args)]
struct Flags {
    /// Measure spec (JSON)
    #[arg(long, global = true)]
    spec: Option<PathBuf>,
    /// Gram level N
    #[arg(long, global = true)]
    level: Option<usize>,
    /// Moment depth, or series truncation M for herglotz and example8
    #[arg(long, global = true)]
    depth: Option<usize>,
    /// Output moment depth, at most N − 1
    #[arg(long = "out-depth", global = true)]
    out_depth: Option<usize>,
    /// Singular threshold on pencil eigenvalues, in (0, 1)
    #[arg(long, global = true)]
    threshold: Option<f64>,
    /// Command-specific tolerance
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Output directory for report.json and CSV tables
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for randomized sweeps
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Sample count for randomized sweeps
    #[arg(long, global = true, default_value_t = 100)]
    samples: usize,
    /// Comma-separated level schedule for convergence
    #[arg(long, global = true, value_delimiter = ',')]
    schedule: Option<Vec<usize>>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let command = match cli.command {
        Sub::Moments => Command::Moments,
        Sub::Positivity => Command::Positivity,
        Sub::Gns => Command::Gns,
        Sub::Herglotz => Command::Herglotz,
        Sub::Decompose => Command::Decompose,
        Sub::Classify => Command::Classify,
        Sub::Example8 => Command::Example8,
        Sub::Convergence => Command::Convergence,
    };
    let f = cli.flags;
    let config = RunConfig {
        command,
        spec: f.spec,
        level: f.level,
        depth: f.depth,
        out_depth: f.out_depth,
        threshold: f.threshold,
        tol: f.tol,
        out: f.out,
        seed: f.seed,
        samples: f.samples,
        schedule: f.schedule,
    };
    match run(&config) {
        Ok(report) => {
            let text = serde_json::to_string_pretty(&report).expect("report serializes");
            // moments without --out already printed its CSV on stdout
            if command == Command::Moments && config.out.is_none() {
                eprintln!("{text}");
            } else {
                println!("{text}");
            }
            for c in &report.checks {
                eprintln!(
                    "{} {}: {:.3e} (bound {:.3e})",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.value,
                    c.bound
                );
            }
            ExitCode::from(report.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
