use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use varmeas::error::{Error, Result};
use varmeas::harness::{self, CampaignConfig, Outcome, TheoremId};

#[derive(Parser)]
#[command(name = "varmeas", version, about = "Limit theorems for integrals under varying measures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a campaign; without --config the bundled default is used.
    Suite {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Write the output here instead of stdout (overrides the config).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check one theorem against one family spec.
    Check {
        theorem: TheoremId,
        #[arg(long)]
        family: PathBuf,
        #[arg(long, default_value_t = 256)]
        horizon: usize,
        #[arg(long, default_value_t = 1e-2)]
        tol: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Reproduce a counterexample.
    Gallery {
        id: String,
        #[arg(long)]
        level: Option<u32>,
    },
    /// Write the n ↦ gap curves of a report as CSV.
    EmitPlot { report: PathBuf, out: PathBuf },
}

fn write_stdout(bytes: &[u8]) -> Result<()> {
    let mut out = std::io::stdout().lock();
    out.write_all(bytes)?;
    out.flush()?;
    Ok(())
}

fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Suite { config, out } => {
            let config = match config {
                Some(p) => CampaignConfig::load(&p)?,
                None => CampaignConfig::default(),
            }
            .with_env_overrides()?;
            let output = harness::run_suite(&config)?;
            let bytes = harness::render(&output, config.output.format)?;
            match out.or(config.output.path.clone()) {
                Some(p) => std::fs::write(p, bytes)?,
                None => write_stdout(&bytes)?,
            }
            let s = &output.summary;
            eprintln!(
                "{} jobs: {} pass, {} expected failures, {} unexpected",
                s.jobs, s.pass, s.expected_fail, s.unexpected
            );
            Ok(output.exit_code())
        }
        Command::Check { theorem, family, horizon, tol, seed } => {
            if horizon < 8 || tol.is_nan() || tol <= 0.0 {
                return Err(Error::InvalidParameter("horizon must be at least 8 and tol positive".into()));
            }
            let spec = harness::load_family_spec(&family)?;
            let (report, outcome) = harness::run_check(theorem, &spec, horizon, tol, seed)?;
            let mut bytes = serde_json::to_vec_pretty(&report)?;
            bytes.push(b'\n');
            write_stdout(&bytes)?;
            Ok(if outcome == Outcome::Unexpected { 1 } else { 0 })
        }
        Command::Gallery { id, level } => {
            let g = harness::gallery(&id, level)?;
            let mut bytes = serde_json::to_vec_pretty(&g)?;
            bytes.push(b'\n');
            write_stdout(&bytes)?;
            Ok(if g.reproduced { 0 } else { 1 })
        }
        Command::EmitPlot { report, out } => {
            let rows = harness::emit_plot(&report, &out)?;
            eprintln!("wrote {rows} rows to {}", out.display());
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(harness::exit_code(&e) as u8)
        }
    }
}
