use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use fracsob::config::{parse_config, Mode};
use fracsob::run::run;

/// Nonlocal fractional Sobolev-type evolution: verification, solving and
/// optimal control.
#[derive(Debug, Parser)]
#[command(version)]
struct Cli {
    /// Pipeline to run: verify, solve or optimize
    mode: Mode,
    /// Sectioned key = value config file
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides [output] dir)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Random seed (overrides [output] seed)
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let text = match std::fs::read_to_string(&cli.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("cannot read {}: {e}", cli.config.display());
            return ExitCode::from(2);
        }
    };
    let mut config = match parse_config(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{}: {e}", cli.config.display());
            return ExitCode::from(2);
        }
    };
    config.mode = cli.mode;
    if let Some(out) = cli.out {
        config.out_dir = out;
    }
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if config.mode == Mode::Optimize && config.controls == 0 {
        eprintln!("optimize mode needs k >= 1 in [problem]");
        return ExitCode::from(2);
    }
    match run(&config) {
        Ok(outcome) if outcome.success => ExitCode::SUCCESS,
        Ok(outcome) => {
            if let Some(err) = outcome.report.get("error") {
                eprintln!("run failed: {}", err["message"]);
            } else {
                eprintln!("run failed; see {}", config.out_dir.join("report.json").display());
            }
            ExitCode::FAILURE
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::FAILURE
        }
    }
}
