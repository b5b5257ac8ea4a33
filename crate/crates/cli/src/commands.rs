//! Subcommand execution: run a harness, collect its outputs, evaluate the
//! `--check` regression limits.

use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use micromaser::experiments::{
    efficiency_curve, figure3_run, figure4_run, oracle_check, FIG4_INJECTIONS,
};
use micromaser::oracle::{build_generator, hysteresis_sweep, quasi_stationary, SweepOptions};
use micromaser::{emission_probability, run_trajectory, TwoAtomMode};

use crate::config::{parse_table, RunConfig};
use crate::output::{self, OutputSet, RunManifest};

/// Ground-atom rate of the upper branch at R = 100, gamma = 20, exact trapping.
pub const UPPER_BRANCH_RATE: f64 = 38.202_381_833_891_43;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Trajectory,
    Figure3,
    Figure4,
    Efficiency,
    Hysteresis,
    OracleCheck,
}

impl Command {
    pub const ALL: [Command; 6] = [
        Command::Trajectory,
        Command::Figure3,
        Command::Figure4,
        Command::Efficiency,
        Command::Hysteresis,
        Command::OracleCheck,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Command::Trajectory => "trajectory",
            Command::Figure3 => "figure3",
            Command::Figure4 => "figure4",
            Command::Efficiency => "efficiency",
            Command::Hysteresis => "hysteresis",
            Command::OracleCheck => "oracle-check",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Command {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Command::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| format!("unknown command `{s}`"))
    }
}

/// One `--check` comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, pass: bool, detail: String) -> Self {
        Check {
            name: name.to_string(),
            pass,
            detail,
        }
    }
}

#[derive(Debug)]
pub struct RunReport {
    pub summary: String,
    pub warnings: Vec<String>,
    pub checks: Vec<Check>,
    pub outputs: OutputSet,
    pub manifest: RunManifest,
}

impl RunReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        self.outputs.write(dir, &self.manifest)
    }
}

/// Output directory: explicit flag, then the configuration, then
/// `$MICROMASER_OUT/<command>` (root defaults to `out`).
pub fn output_dir(
    flag: Option<&Path>,
    cfg: &RunConfig,
    command: Command,
    env_root: Option<&str>,
) -> PathBuf {
    flag.map(Path::to_path_buf)
        .or_else(|| cfg.out.clone())
        .unwrap_or_else(|| PathBuf::from(env_root.unwrap_or("out")).join(command.as_str()))
}

/// Runs `command` and keeps its outputs in memory.
pub fn run_command(command: Command, cfg: &RunConfig) -> Result<RunReport> {
    let mut out = OutputSet::default();
    let mut warnings = Vec::new();
    let mut checks = Vec::new();
    let mut params = cfg.params.clone();
    let mut controller = cfg.controller.clone();
    let ex = &cfg.experiment;
    let schedule;
    let summary;
    match command {
        Command::Trajectory => {
            let sched = ex.schedule();
            schedule = format!("{sched:?}");
            let ctl = ex.controller.then_some(&controller);
            if let Some(c) = ctl {
                warnings.extend(c.warnings(&params));
            }
            let traj = run_trajectory(&params, &sched, ex.t_end, cfg.seed, ctl)?;
            warnings.extend(traj.warnings());
            out.add("events.csv", output::events_csv(&traj.events));
            out.add("clicks.csv", output::clicks_csv(&traj.clicks));
            if ctl.is_some() {
                out.add("detections.csv", output::detections_csv(&traj.detections));
            }
            checks.push(Check::new(
                "no_truncation",
                traj.truncations == 0,
                format!("{} truncated transitions", traj.truncations),
            ));
            summary = format!(
                "trajectory: {} events, {} clicks, {} detections over {} s",
                traj.events.len(),
                traj.clicks.len(),
                traj.detections.len(),
                traj.t_end
            );
        }
        Command::Figure3 => {
            let run = figure3_run(cfg.seed)?;
            params = run.params.clone();
            schedule = format!("Times([{}])", run.injection);
            warnings.extend(run.trajectory.warnings());
            out.add("events.csv", output::events_csv(&run.trajectory.events));
            out.add("rates.csv", output::rates_csv(&run.rates));
            let qsd = quasi_stationary(&build_generator(&params, true), &[0])?;
            let rate = qsd.result.ground_click_rate;
            checks.push(Check::new(
                "upper_branch_rate",
                (rate - UPPER_BRANCH_RATE).abs() < 1e-6,
                format!("{rate} vs {UPPER_BRANCH_RATE}"),
            ));
            let end = run.return_to_vacuum.unwrap_or(run.trajectory.t_end);
            let confined = run
                .trajectory
                .events
                .iter()
                .filter(|e| e.t > run.injection && e.t < end)
                .all(|e| (1..=3).contains(&e.n_after));
            checks.push(Check::new(
                "confined_to_1_3",
                confined,
                format!("until t = {end}"),
            ));
            let quiet = run
                .rates
                .iter()
                .filter(|r| r.t < run.injection)
                .all(|r| r.ground_rate == 0.0);
            checks.push(Check::new("silent_before_injection", quiet, String::new()));
            summary = format!(
                "figure3: peak ground rate {} /s, return to vacuum {}",
                run.peak_rate,
                run.return_to_vacuum
                    .map_or("none".into(), |t| format!("at {t} s"))
            );
        }
        Command::Figure4 => {
            let run = figure4_run(cfg.seed)?;
            params = run.params.clone();
            controller = run.config.clone();
            schedule = format!("{FIG4_INJECTIONS} injections, gaps uniform in [2, 4] s");
            warnings.extend(run.trajectory.warnings());
            out.add("events.csv", output::events_csv(&run.trajectory.events));
            out.add("clicks.csv", output::clicks_csv(&run.trajectory.clicks));
            out.add(
                "detections.csv",
                output::detections_csv(&run.trajectory.detections),
            );
            out.add("injections.csv", output::injections_csv(&run.outcomes));
            let single = run
                .outcomes
                .iter()
                .filter(|o| o.armed && o.triggers == 1)
                .count();
            checks.push(Check::new(
                "one_detection_per_injection",
                single * 100 >= run.outcomes.len() * 95,
                format!("{single}/{}", run.outcomes.len()),
            ));
            summary = format!(
                "figure4: {single}/{} injections with exactly one detection, {} false triggers in {:.1} s armed",
                run.outcomes.len(),
                run.false_triggers,
                run.armed_background_time
            );
        }
        Command::Efficiency => {
            schedule = format!(
                "{} injections per point, gaps uniform in [{}, {}] s, latency {} s",
                ex.n_injections,
                ex.efficiency.min_gap,
                ex.efficiency.max_gap,
                ex.efficiency.latency
            );
            warnings.extend(controller.warnings(&params));
            let curve = efficiency_curve(
                &params,
                &controller,
                &ex.pump_rates,
                ex.n_injections,
                cfg.seed,
                &ex.efficiency,
            );
            out.add("efficiency.csv", output::efficiency_csv(&curve));
            for entry in &curve {
                if let Err(e) = &entry.result {
                    warnings.push(format!(
                        "R = {} ({}): {e}",
                        entry.pump_rate, entry.two_atom_mode
                    ));
                }
            }
            for pair in curve.chunks(2) {
                let (Ok(off), Ok(on)) = (&pair[0].result, &pair[1].result) else {
                    continue;
                };
                if off.pump_rate >= 500.0 {
                    checks.push(Check::new(
                        &format!("efficiency_R{}", off.pump_rate),
                        (0.88..=0.97).contains(&off.efficiency),
                        format!("{} in [0.88, 0.97]", off.efficiency),
                    ));
                    checks.push(Check::new(
                        &format!("two_atom_ordering_R{}", off.pump_rate),
                        off.efficiency - on.efficiency > off.ci_half_width(),
                        format!("{} vs {}", off.efficiency, on.efficiency),
                    ));
                }
            }
            let best = curve
                .iter()
                .filter(|e| e.two_atom_mode == TwoAtomMode::Off)
                .filter_map(|e| e.result.as_ref().ok())
                .map(|p| p.efficiency)
                .fold(f64::NAN, f64::max);
            summary = format!(
                "efficiency: {} points, best off-mode efficiency {best}",
                curve.len()
            );
        }
        Command::Hysteresis => {
            let rates = ex.sweep_rates();
            schedule = format!(
                "sweep {} to {} in {} points",
                ex.sweep_min, ex.sweep_max, ex.sweep_points
            );
            let options = SweepOptions {
                dwell: ex.dwell,
                ..SweepOptions::default()
            };
            let branches = hysteresis_sweep(&params, &rates, options)?;
            out.add("branches.csv", output::branches_csv(&branches));
            out.add(
                "distribution.csv",
                output::distribution_csv(&branches.final_distribution),
            );
            let window = branches.bistable_window(1.0);
            checks.push(Check::new(
                "bistable_window",
                !window.is_empty(),
                format!("{} rates", window.len()),
            ));
            if params.delta_phi == 0.0
                && params.n_thermal == 0.0
                && emission_probability(0, params.phi0) == 0.0
            {
                let zero = branches.up.iter().all(|b| b.output_rate == 0.0);
                checks.push(Check::new("lower_branch_zero", zero, String::new()));
            }
            summary = match (window.first(), window.last()) {
                (Some(a), Some(b)) => format!("hysteresis: bistable for R in [{a}, {b}]"),
                _ => "hysteresis: no bistable window".to_string(),
            };
        }
        Command::OracleCheck => {
            schedule = format!(
                "{} random sets, {} events each",
                ex.oracle_sets, ex.oracle_events
            );
            let rows = oracle_check(ex.oracle_sets, ex.oracle_events, cfg.seed)?;
            out.add("oracle.csv", output::oracle_csv(&rows));
            let worst = rows.iter().map(|r| r.total_variation).fold(0.0, f64::max);
            checks.push(Check::new(
                "total_variation",
                worst < 0.02,
                format!("max {worst}"),
            ));
            summary = format!(
                "oracle-check: {} sets, max total variation {worst}",
                rows.len()
            );
        }
    }
    let manifest = RunManifest {
        tool: "micromaser".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: command.as_str().into(),
        seed: cfg.seed,
        params,
        controller,
        schedule,
        config: cfg.table.clone(),
        files: out.digests(),
    };
    Ok(RunReport {
        summary,
        warnings,
        checks,
        outputs: out,
        manifest,
    })
}

/// Reruns the command recorded in a manifest and compares file digests.
pub fn replay(manifest_path: &Path) -> Result<(RunReport, Vec<String>)> {
    let recorded = output::read_manifest(manifest_path)?;
    let command: Command = recorded.command.parse().map_err(anyhow::Error::msg)?;
    let cfg = parse_table(recorded.config.clone(), None).map_err(|issues| {
        let list: Vec<String> = issues.iter().map(ToString::to_string).collect();
        anyhow::anyhow!("manifest configuration is invalid: {}", list.join("; "))
    })?;
    let report = run_command(command, &cfg)
        .with_context(|| format!("replaying {}", manifest_path.display()))?;
    let mut mismatches = Vec::new();
    for (name, digest) in &recorded.files {
        match report.manifest.files.get(name) {
            Some(d) if d == digest => {}
            Some(_) => mismatches.push(format!("{name}: digest differs")),
            None => mismatches.push(format!("{name}: not produced")),
        }
    }
    if recorded.version != report.manifest.version {
        mismatches.push(format!("recorded with version {}", recorded.version));
    }
    Ok((report, mismatches))
}
