use std::path::PathBuf;
use std::process::ExitCode;

use cci_ring::{resolve_output_dir, run, Mode, RawConfig, RunConfig, OUTPUT_ENV};
use clap::Parser;

/// Configuration-interaction solvers for bosons on a ring.
#[derive(Debug, Parser)]
#[command(name = "cci-ring", version)]
struct Cli {
    /// One of cci, gp, exact2, fock, sweep, fig1, fig2.
    mode: Mode,
    /// Run configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for this run.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for the random initial guess.
    #[arg(long)]
    seed: Option<u64>,
    /// `section.key=value`, applied after the config file.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Default output root when neither --out nor output.dir is set.
    #[arg(long, env = OUTPUT_ENV, hide_env_values = true)]
    out_root: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn execute(cli: &Cli) -> cci_ring::Result<u8> {
    let mut raw = match &cli.config {
        Some(path) => RawConfig::read(path)?,
        None => RawConfig::default(),
    };
    for o in &cli.overrides {
        raw.set_override(o)?;
    }
    if let Some(seed) = cli.seed {
        raw.set("solver.rng_seed", seed.to_string());
    }
    let config = RunConfig::from_raw(&raw, Some(cli.mode))?;
    let out = resolve_output_dir(cli.out.as_deref(), &config, cli.out_root.as_deref());
    let report = run(&config, &out)?;
    eprintln!(
        "{}: {} ({})",
        config.mode,
        report
            .manifest
            .get("status")
            .and_then(|v| v.as_str())
            .unwrap_or("?"),
        out.display()
    );
    Ok(report.status.exit_code() as u8)
}
