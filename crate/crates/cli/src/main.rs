use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};
use micromaser::experiments::Preset;
use micromaser_cli::commands::{output_dir, replay, run_command, Command};
use micromaser_cli::config;

#[derive(Parser)]
#[command(
    name = "micromaser",
    version,
    about = "Micromaser single-photon detector simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
    /// TOML configuration file of `key = value` pairs
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Base parameter set: fig3, fig4 or fig5
    #[arg(long, global = true)]
    preset: Option<Preset>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory [default: $MICROMASER_OUT/<command>, root `out`]
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Compare against frozen regression limits; exit 1 on any violation
    #[arg(long, global = true)]
    check: bool,
    #[arg(long, env = "MICROMASER_OUT", hide = true)]
    out_root: Option<String>,
}

#[derive(Subcommand)]
enum Sub {
    /// Single trajectory with optional injections and controller
    Trajectory,
    /// Ideal single-injection trajectory and ground-rate series
    Figure3,
    /// Threshold run with free-decay resets against background
    Figure4,
    /// Detection efficiency against pump rate, with and without two-atom events
    Efficiency,
    /// Quasi-static pump sweep up and down
    Hysteresis,
    /// Engine histograms against the exact steady state
    OracleCheck,
    /// Rerun the command recorded in a manifest and compare digests
    Replay { manifest: PathBuf },
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run() -> Result<ExitCode> {
    let cli = Cli::parse();
    let command = match cli.command {
        Sub::Trajectory => Command::Trajectory,
        Sub::Figure3 => Command::Figure3,
        Sub::Figure4 => Command::Figure4,
        Sub::Efficiency => Command::Efficiency,
        Sub::Hysteresis => Command::Hysteresis,
        Sub::OracleCheck => Command::OracleCheck,
        Sub::Replay { manifest } => {
            let (report, mismatches) = replay(&manifest)?;
            if let Some(dir) = &cli.out {
                report.write(dir)?;
            }
            for m in &mismatches {
                println!("mismatch: {m}");
            }
            println!(
                "replay: {} files, {} mismatches",
                report.manifest.files.len(),
                mismatches.len()
            );
            return Ok(if mismatches.is_empty() {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            });
        }
    };
    let cfg = config::load(cli.config.as_deref(), cli.preset, cli.seed)?;
    let report = run_command(command, &cfg)?;
    let dir = output_dir(cli.out.as_deref(), &cfg, command, cli.out_root.as_deref());
    report.write(&dir)?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    println!("{} -> {}", report.summary, dir.display());
    if cli.check {
        for c in &report.checks {
            println!(
                "{} {}: {}",
                if c.pass { "PASS" } else { "FAIL" },
                c.name,
                c.detail
            );
        }
        if !report.passed() {
            return Ok(ExitCode::FAILURE);
        }
    }
    Ok(ExitCode::SUCCESS)
}
