use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use vring_cli::{run_scenario, validate_config, Mode};

/// Runs one scenario and writes its artifacts and manifest.json.
#[derive(Parser, Debug)]
#[command(name = "vring", version)]
struct Args {
    /// reduced, ring, leapfrog, modes, poisson-test or levelcurves
    mode: Mode,
    /// JSON scenario file; all fields default when omitted
    #[arg(long)]
    config: Option<PathBuf>,
    /// Exit with status 2 when any acceptance tolerance is breached
    #[arg(long)]
    strict: bool,
    /// Output directory, overriding the config
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let args = Args::parse();
    let raw = match &args.config {
        Some(path) => match std::fs::read_to_string(path) {
            Ok(s) => s,
            Err(e) => {
                eprintln!("cannot read {}: {e}", path.display());
                return ExitCode::FAILURE;
            }
        },
        None => "{}".to_string(),
    };
    let mut cfg = match validate_config(&raw) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::FAILURE;
        }
    };
    cfg.mode = args.mode;
    if let Some(out) = args.out {
        cfg.out = out;
    }
    match run_scenario(&cfg) {
        Ok(manifest) => {
            for c in &manifest.checks {
                let verdict = if c.passed { "ok" } else { "BREACH" };
                println!("{verdict:>6}  {} = {:.6e} ({})", c.name, c.value, c.limit);
            }
            println!("wrote {} artifacts to {}", manifest.artifacts.len(), cfg.out.display());
            if args.strict && !manifest.passed() {
                return ExitCode::from(2);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::FAILURE
        }
    }
}
