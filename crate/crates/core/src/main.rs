use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use reebkit::report::{
    evaluate_bracket, exit_code, render_bracket, render_classes, render_verify, render_ypq,
    resolve_keys, run_verify, OutputFormat, RunConfig,
};
use reebkit::toric::{enumerate, ypq_report, YpqParams};
use reebkit::{Error, Result};

#[derive(Parser)]
#[command(name = "reebkit", version, about = "Contact Hamiltonian checks and Y(p,q) toric arithmetic")]
struct Cli {
    /// Seed for sample generation.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Sample points per check.
    #[arg(long, global = true)]
    samples: Option<usize>,
    /// Tolerance override, repeatable.
    #[arg(long = "tol", value_name = "NAME=VALUE", global = true)]
    tol: Vec<String>,
    #[arg(long, value_enum, global = true)]
    format: Option<Format>,
    /// File of `key = value` settings; command-line flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Records,
}

#[derive(Subcommand)]
enum Command {
    /// Run the check suites of the named models (or `all`).
    Verify {
        #[arg(required = true, value_name = "MODEL")]
        models: Vec<String>,
    },
    /// Evaluate the Jacobi bracket {f, g} at a point.
    Bracket {
        /// Comma-separated coordinate names, e.g. `x,y,z`.
        chart: String,
        /// Contact form, e.g. `dz - y*dx`.
        #[arg(allow_hyphen_values = true)]
        eta: String,
        #[arg(allow_hyphen_values = true)]
        f: String,
        #[arg(allow_hyphen_values = true)]
        g: String,
        /// Comma-separated coordinates of the point.
        #[arg(allow_hyphen_values = true)]
        point: String,
    },
    /// Report on Y(p,q), or list equivalence classes up to a bound.
    Ypq {
        #[arg(required_unless_present = "enumerate", requires = "q")]
        p: Option<u64>,
        q: Option<u64>,
        #[arg(long, value_name = "PMAX", conflicts_with_all = ["p", "q"])]
        enumerate: Option<u64>,
    },
}

fn run_config(cli: &Cli) -> Result<RunConfig> {
    let mut run = RunConfig::default();
    if let Some(path) = &cli.config {
        let contents = std::fs::read_to_string(path).map_err(|e| {
            Error::InvalidParameter(format!("cannot read config `{}`: {e}", path.display()))
        })?;
        run.apply_file(&contents)?;
    }
    if let Some(seed) = cli.seed {
        run.seed = seed;
    }
    if let Some(samples) = cli.samples {
        run.samples = samples;
    }
    for assignment in &cli.tol {
        run.set_tolerance_assignment(assignment)?;
    }
    if let Some(format) = cli.format {
        run.format = match format {
            Format::Text => OutputFormat::Text,
            Format::Records => OutputFormat::Records,
        };
    }
    Ok(run)
}

/// Writes the command output and returns the exit status.
fn execute(cli: &Cli) -> Result<u8> {
    let run = run_config(cli)?;
    let config = run.check_config()?;
    match &cli.command {
        Command::Verify { models } => {
            let keys = resolve_keys(models)?;
            let runs = run_verify(&keys, &config)?;
            print!("{}", render_verify(&runs, run.format));
            Ok(if runs.iter().all(|r| r.passed()) { 0 } else { 1 })
        }
        Command::Bracket {
            chart,
            eta,
            f,
            g,
            point,
        } => {
            let report = evaluate_bracket(chart, eta, f, g, point, &config)?;
            print!("{}", render_bracket(&report, run.format));
            Ok(0)
        }
        Command::Ypq { p, q, enumerate: bound } => {
            if let Some(bound) = bound {
                print!("{}", render_classes(&enumerate(*bound)?, run.format));
            } else {
                let params = YpqParams::new(p.expect("clap requires p"), q.expect("clap requires q"))?;
                print!("{}", render_ypq(&ypq_report(params)?, run.format));
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
