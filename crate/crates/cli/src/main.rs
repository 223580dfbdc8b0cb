use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use gbec_cli::{parse_config, run, Mode, RunError, EXIT_CONFIG, EXIT_IO};

/// Ground states, excitation spectra and expansion of a trapped Bose gas.
#[derive(Parser, Debug)]
#[command(version)]
struct Args {
    /// Run configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the configured mode.
    #[arg(long)]
    mode: Option<String>,
    /// Worker threads; all cores by default.
    #[arg(long)]
    jobs: Option<usize>,
    /// Overrides the covariance seeding RNG seed.
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let text = match std::fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("cannot read {}: {e}", args.config.display());
            return ExitCode::from(EXIT_IO as u8);
        }
    };
    let mut cfg = match parse_config(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{}: {e}", args.config.display());
            return ExitCode::from(EXIT_CONFIG as u8);
        }
    };
    if let Some(m) = &args.mode {
        match m.parse::<Mode>() {
            Ok(m) => cfg.mode = m,
            Err(e) => {
                eprintln!("--mode: {e}");
                return ExitCode::from(EXIT_CONFIG as u8);
            }
        }
    }
    if let Some(s) = args.seed {
        cfg.solver.seed = s;
    }
    if args.jobs == Some(0) {
        eprintln!("--jobs must be at least 1");
        return ExitCode::from(EXIT_CONFIG as u8);
    }
    match run(&cfg, args.jobs) {
        Ok(summary) => {
            for f in &summary.files {
                println!("{}", f.display());
            }
            for e in &summary.failures {
                eprintln!("warning: {e}");
            }
            ExitCode::SUCCESS
        }
        Err(e @ RunError::Config(_)) => {
            eprintln!("{e}");
            ExitCode::from(EXIT_CONFIG as u8)
        }
        Err(e @ RunError::Io { .. }) => {
            eprintln!("{e}");
            ExitCode::from(EXIT_IO as u8)
        }
    }
}
