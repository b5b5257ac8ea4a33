//! Scripted experiments: the single-injection trajectory, the threshold run
//! with resets, detection efficiency against pump rate, and the oracle
//! cross-check.

use std::f64::consts::PI;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::detection::{
    peak_windowed_rate, windowed_rate, Channel, ControllerConfig, DetectionEvent,
};
use crate::error::Error;
use crate::model::{CavityState, SimParams, TwoAtomMode};
use crate::oracle::{build_generator, steady_state, total_variation};
use crate::rng::{child_seed, stream, uniform, Stream};
use crate::trajectory::{run_trajectory, InjectionSchedule, Simulation, Trajectory};

/// Injection time of the single-photon trajectory, s.
pub const FIG3_INJECTION: f64 = 0.5;
/// Horizon of the single-photon trajectory, s.
pub const FIG3_T_END: f64 = 1.0;
/// Trailing window of the plotted ground rate, s.
pub const FIG3_RATE_WINDOW: f64 = 0.05;
/// Sampling step of the plotted rate series, s.
pub const RATE_SERIES_STEP: f64 = 0.005;

pub const FIG4_INJECTIONS: usize = 20;

/// Default pump rates of the efficiency curve.
pub const DEFAULT_PUMP_RATES: [f64; 7] = [50.0, 100.0, 200.0, 300.0, 500.0, 700.0, 1000.0];

/// Named parameter sets for the single-photon trajectory (`fig3`), threshold
/// operation (`fig4`) and efficiency curve (`fig5`) runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    Fig3,
    Fig4,
    Fig5,
}

impl Preset {
    pub fn as_str(self) -> &'static str {
        match self {
            Preset::Fig3 => "fig3",
            Preset::Fig4 => "fig4",
            Preset::Fig5 => "fig5",
        }
    }

    pub fn params(self) -> SimParams {
        let ideal = SimParams {
            pump_rate: 100.0,
            gamma: 20.0,
            ..SimParams::default()
        };
        match self {
            Preset::Fig3 => ideal,
            Preset::Fig4 => SimParams {
                pump_rate: 1000.0,
                background_rate: 4.0,
                ..ideal
            },
            Preset::Fig5 => SimParams {
                pump_rate: 500.0,
                delta_phi: 0.005 * PI,
                eta_g: 0.8,
                background_rate: 2.0,
                ..ideal
            },
        }
    }

    pub fn controller(self) -> ControllerConfig {
        let params = self.params();
        match self {
            Preset::Fig3 => ControllerConfig::free_decay(20.0, params.gamma),
            // 7 / gamma leaves under 1e-2 expected photons from the n = 3 branch
            Preset::Fig4 => ControllerConfig {
                reset_duration: 7.0 / params.gamma,
                ..ControllerConfig::free_decay(20.0, params.gamma)
            },
            Preset::Fig5 => ControllerConfig::free_decay(10.0, params.gamma),
        }
    }
}

impl std::str::FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "fig3" => Ok(Preset::Fig3),
            "fig4" => Ok(Preset::Fig4),
            "fig5" => Ok(Preset::Fig5),
            other => Err(format!(
                "unknown preset `{other}` (expected fig3, fig4 or fig5)"
            )),
        }
    }
}

/// Wilson score interval for `k` successes in `n` trials.
pub fn wilson_interval(k: usize, n: usize, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n_f = n as f64;
    let p = k as f64 / n_f;
    let z2 = z * z;
    let denom = 1.0 + z2 / n_f;
    let centre = (p + z2 / (2.0 * n_f)) / denom;
    let half = z / denom * (p * (1.0 - p) / n_f + z2 / (4.0 * n_f * n_f)).sqrt();
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyOptions {
    /// A trigger this soon after an injection is credited to it, s.
    pub latency: f64,
    pub min_gap: f64,
    pub max_gap: f64,
}

impl Default for EfficiencyOptions {
    fn default() -> Self {
        EfficiencyOptions {
            latency: 0.5,
            min_gap: 2.0,
            max_gap: 4.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyPoint {
    pub pump_rate: f64,
    pub two_atom_mode: TwoAtomMode,
    pub injected: usize,
    pub detected: usize,
    pub efficiency: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Mean trigger delay of detected injections, s.
    pub mean_latency: f64,
    /// Triggers outside every attribution window.
    pub false_triggers: usize,
    /// Injections that arrived while the detector was disarmed.
    pub dead_time_losses: usize,
}

impl EfficiencyPoint {
    pub fn ci_half_width(&self) -> f64 {
        0.5 * (self.ci_high - self.ci_low)
    }
}

/// How each injection of a run was scored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InjectionOutcome {
    pub t: f64,
    pub armed: bool,
    /// Delay of the first trigger inside the attribution window.
    pub latency: Option<f64>,
    /// All triggers inside the attribution window.
    pub triggers: usize,
}

impl InjectionOutcome {
    pub fn detected(&self) -> bool {
        self.armed && self.latency.is_some()
    }
}

fn disarmed_at(detections: &[DetectionEvent], t: f64) -> bool {
    detections
        .iter()
        .any(|d| d.t_trigger <= t && t < d.t_rearmed)
}

/// Scores injections against the detections of a run: an injection counts as
/// detected when the detector was armed at its arrival and a trigger follows
/// within `latency`. Returns the outcomes and the number of triggers outside
/// every attribution window.
pub fn score_injections(
    injections: &[f64],
    detections: &[DetectionEvent],
    latency: f64,
) -> (Vec<InjectionOutcome>, usize) {
    let outcomes: Vec<InjectionOutcome> = injections
        .iter()
        .map(|&t| {
            let inside: Vec<&DetectionEvent> = detections
                .iter()
                .filter(|d| d.t_trigger >= t && d.t_trigger <= t + latency)
                .collect();
            InjectionOutcome {
                t,
                armed: !disarmed_at(detections, t),
                latency: inside.first().map(|d| d.t_trigger - t),
                triggers: inside.len(),
            }
        })
        .collect();
    let false_triggers = detections
        .iter()
        .filter(|d| {
            !injections
                .iter()
                .any(|&t| d.t_trigger >= t && d.t_trigger <= t + latency)
        })
        .count();
    (outcomes, false_triggers)
}

fn injection_times<R: Rng + ?Sized>(
    count: usize,
    options: &EfficiencyOptions,
    rng: &mut R,
) -> Vec<f64> {
    let mut t = 0.0;
    (0..count)
        .map(|_| {
            t += options.min_gap + (options.max_gap - options.min_gap) * uniform(rng);
            t
        })
        .collect()
}

/// A scored efficiency run with the trajectory it came from.
#[derive(Debug, Clone)]
pub struct EfficiencyRun {
    pub point: EfficiencyPoint,
    pub outcomes: Vec<InjectionOutcome>,
    pub trajectory: Trajectory,
}

/// Injects single photons at random gaps and scores detections.
pub fn efficiency_experiment(
    params: &SimParams,
    config: &ControllerConfig,
    n_injections: usize,
    seed: u64,
    options: &EfficiencyOptions,
) -> Result<EfficiencyRun, Error> {
    if n_injections < 100 {
        return Err(Error::InvalidSchedule(format!(
            "need at least 100 injections, got {n_injections}"
        )));
    }
    if options.min_gap < config.reset_duration + options.latency
        || options.max_gap < options.min_gap
    {
        return Err(Error::InvalidSchedule(format!(
            "injection gaps [{}, {}] s must exceed dead time {} s plus latency window {} s",
            options.min_gap, options.max_gap, config.reset_duration, options.latency
        )));
    }
    let injections = injection_times(n_injections, options, &mut stream(seed, Stream::Schedule));
    let t_end = injections.last().copied().unwrap_or(0.0) + options.max_gap;
    let mut sim = Simulation::new(params.clone(), seed, CavityState::vacuum())?
        .with_injections(injections.clone())?
        .with_controller(config.clone())?;
    sim.run_until(t_end);
    let trajectory = sim.finish();
    let (outcomes, false_triggers) =
        score_injections(&injections, &trajectory.detections, options.latency);
    let detected: Vec<&InjectionOutcome> = outcomes.iter().filter(|o| o.detected()).collect();
    let (ci_low, ci_high) = wilson_interval(detected.len(), n_injections, 1.96);
    let mean_latency = if detected.is_empty() {
        f64::NAN
    } else {
        detected.iter().filter_map(|o| o.latency).sum::<f64>() / detected.len() as f64
    };
    let point = EfficiencyPoint {
        pump_rate: params.pump_rate,
        two_atom_mode: params.two_atom_mode,
        injected: n_injections,
        detected: detected.len(),
        efficiency: detected.len() as f64 / n_injections as f64,
        ci_low,
        ci_high,
        mean_latency,
        false_triggers,
        dead_time_losses: outcomes.iter().filter(|o| !o.armed).count(),
    };
    Ok(EfficiencyRun {
        point,
        outcomes,
        trajectory,
    })
}

/// One point of an efficiency sweep; failures are kept rather than aborting.
#[derive(Debug, Clone)]
pub struct CurveEntry {
    pub pump_rate: f64,
    pub two_atom_mode: TwoAtomMode,
    pub seed: u64,
    pub result: Result<EfficiencyPoint, String>,
}

/// Efficiency against pump rate for both two-atom modes. The two modes at a
/// given pump rate share a seed so their difference is a paired comparison.
/// Points run in parallel; the output order is pump rate, then mode.
pub fn efficiency_curve(
    params: &SimParams,
    config: &ControllerConfig,
    pump_rates: &[f64],
    n_injections: usize,
    master_seed: u64,
    options: &EfficiencyOptions,
) -> Vec<CurveEntry> {
    let jobs: Vec<(usize, f64, TwoAtomMode)> = pump_rates
        .iter()
        .enumerate()
        .flat_map(|(i, &r)| {
            [TwoAtomMode::Off, TwoAtomMode::Phenomenological].map(move |mode| (i, r, mode))
        })
        .collect();
    jobs.par_iter()
        .map(|&(i, r, mode)| {
            let seed = child_seed(master_seed, i as u64);
            let p = SimParams {
                pump_rate: r,
                two_atom_mode: mode,
                ..params.clone()
            };
            let result = efficiency_experiment(&p, config, n_injections, seed, options)
                .map(|run| run.point)
                .map_err(|e| e.to_string());
            CurveEntry {
                pump_rate: r,
                two_atom_mode: mode,
                seed,
                result,
            }
        })
        .collect()
}

/// One row of a sampled ground-rate trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateSample {
    pub t: f64,
    pub n: usize,
    pub ground_rate: f64,
}

/// Photon number and trailing-window ground rate sampled on a regular grid.
pub fn rate_series(traj: &Trajectory, window: f64, step: f64) -> Vec<RateSample> {
    let steps = ((traj.t_end - traj.initial.t) / step).round() as usize;
    (0..=steps)
        .map(|k| {
            let t = traj.initial.t + k as f64 * step;
            RateSample {
                t,
                n: traj.photon_number_at(t),
                ground_rate: windowed_rate(&traj.clicks, Channel::Ground, t, window),
            }
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct Figure3Output {
    pub params: SimParams,
    pub trajectory: Trajectory,
    pub injection: f64,
    pub rates: Vec<RateSample>,
    /// Largest trailing-window ground rate after the injection.
    pub peak_rate: f64,
    /// Time the field first returned to vacuum after the injection.
    pub return_to_vacuum: Option<f64>,
}

/// Ideal detectors, one photon injected into the trapped vacuum.
pub fn figure3_run(seed: u64) -> Result<Figure3Output, Error> {
    let params = Preset::Fig3.params();
    let schedule = InjectionSchedule::Times(vec![FIG3_INJECTION]);
    let trajectory = run_trajectory(&params, &schedule, FIG3_T_END, seed, None)?;
    let rates = rate_series(&trajectory, FIG3_RATE_WINDOW, RATE_SERIES_STEP);
    let peak_rate = peak_windowed_rate(
        &trajectory.clicks,
        Channel::Ground,
        FIG3_RATE_WINDOW,
        FIG3_INJECTION,
        FIG3_T_END,
    );
    let return_to_vacuum = trajectory
        .events
        .iter()
        .find(|e| e.t > FIG3_INJECTION && e.n_after == 0)
        .map(|e| e.t);
    Ok(Figure3Output {
        params,
        trajectory,
        injection: FIG3_INJECTION,
        rates,
        peak_rate,
        return_to_vacuum,
    })
}

#[derive(Debug, Clone)]
pub struct Figure4Output {
    pub params: SimParams,
    pub config: ControllerConfig,
    pub trajectory: Trajectory,
    pub outcomes: Vec<InjectionOutcome>,
    pub false_triggers: usize,
    /// Time the detector was armed outside the attribution windows, s.
    pub armed_background_time: f64,
}

/// Threshold operation with free-decay resets: well separated single-photon
/// injections against a background click rate.
pub fn figure4_run(seed: u64) -> Result<Figure4Output, Error> {
    let params = Preset::Fig4.params();
    let config = Preset::Fig4.controller();
    let options = EfficiencyOptions::default();
    let injections = injection_times(
        FIG4_INJECTIONS,
        &options,
        &mut stream(seed, Stream::Schedule),
    );
    let t_end = injections.last().copied().unwrap_or(0.0) + options.max_gap;
    let mut sim = Simulation::new(params.clone(), seed, CavityState::vacuum())?
        .with_injections(injections.clone())?
        .with_controller(config.clone())?;
    sim.run_until(t_end);
    let trajectory = sim.finish();
    let (outcomes, false_triggers) =
        score_injections(&injections, &trajectory.detections, options.latency);
    let armed_background_time = armed_time_outside(&trajectory, &injections, options.latency);
    Ok(Figure4Output {
        params,
        config,
        trajectory,
        outcomes,
        false_triggers,
        armed_background_time,
    })
}

// Armed time excluding the attribution window after each injection.
fn armed_time_outside(traj: &Trajectory, injections: &[f64], latency: f64) -> f64 {
    let mut intervals: Vec<(f64, f64)> = traj
        .detections
        .iter()
        .map(|d| (d.t_trigger, d.t_rearmed.min(traj.t_end)))
        .chain(
            injections
                .iter()
                .map(|&t| (t, (t + latency).min(traj.t_end))),
        )
        .collect();
    intervals.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut covered = 0.0;
    let mut cursor = traj.initial.t;
    for (a, b) in intervals {
        let a = a.max(cursor);
        if b > a {
            covered += b - a;
            cursor = b;
        }
    }
    traj.t_end - traj.initial.t - covered
}

/// Oracle-versus-engine comparison for one parameter set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleComparison {
    pub params: SimParams,
    pub events: usize,
    pub empirical: Vec<f64>,
    pub exact: Vec<f64>,
    pub total_variation: f64,
}

/// Random parameter set with a phase spread, for cross-validation.
pub fn random_check_params<R: Rng + ?Sized>(rng: &mut R) -> SimParams {
    let n_thermal = if uniform(rng) < 0.5 { 0.0 } else { 0.1 };
    SimParams {
        pump_rate: 50.0 + 250.0 * uniform(rng),
        gamma: 10.0 + 30.0 * uniform(rng),
        phi0: PI * (0.9 + 0.2 * uniform(rng)),
        delta_phi: 0.05 + 0.25 * uniform(rng),
        n_thermal,
        ..SimParams::default()
    }
}

/// Time-weighted photon-number histogram of a free-running trajectory of
/// `n_events` jumps compared with the exact steady state.
pub fn compare_with_oracle(
    params: &SimParams,
    n_events: usize,
    seed: u64,
) -> Result<OracleComparison, Error> {
    let mut sim = Simulation::new(params.clone(), seed, CavityState::vacuum())?;
    sim.run_events(n_events, f64::INFINITY);
    let traj = sim.finish();
    let occ = traj.occupation_times(params.n_max);
    let total: f64 = occ.iter().sum();
    let empirical: Vec<f64> = occ.iter().map(|v| v / total).collect();
    let exact = steady_state(&build_generator(params, true))?.probabilities;
    let total_variation = total_variation(&empirical, &exact);
    Ok(OracleComparison {
        params: params.clone(),
        events: traj.events.len(),
        empirical,
        exact,
        total_variation,
    })
}

/// Cross-validation over `sets` random parameter sets drawn from `seed`.
pub fn oracle_check(
    sets: usize,
    n_events: usize,
    seed: u64,
) -> Result<Vec<OracleComparison>, Error> {
    let mut rng = stream(seed, Stream::Physics);
    let params: Vec<SimParams> = (0..sets).map(|_| random_check_params(&mut rng)).collect();
    params
        .par_iter()
        .enumerate()
        .map(|(i, p)| compare_with_oracle(p, n_events, child_seed(seed, i as u64)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_brackets_estimate() {
        let (lo, hi) = wilson_interval(930, 1000, 1.96);
        assert!(lo < 0.93 && 0.93 < hi);
        assert!((lo - 0.9125).abs() < 2e-3 && (hi - 0.9441).abs() < 2e-3);
        let (lo, hi) = wilson_interval(100, 100, 1.96);
        assert!(hi > 1.0 - 1e-12 && (lo - 0.963_005).abs() < 1e-5);
        assert_eq!(wilson_interval(0, 0, 1.96), (0.0, 1.0));
    }

    #[test]
    fn scoring_rules() {
        let det = |t: f64| DetectionEvent {
            t_trigger: t,
            t_rearmed: t + 0.25,
            window_count: 3,
        };
        let detections = vec![det(1.0), det(2.02), det(5.0), det(8.1)];
        let (out, false_triggers) = score_injections(&[2.0, 8.15, 10.0], &detections, 0.5);
        assert!(out[0].detected());
        assert!((out[0].latency.unwrap() - 0.02).abs() < 1e-12);
        // arrives while disarmed by the trigger at 8.1
        assert!(!out[1].armed && !out[1].detected());
        assert!(!out[2].detected());
        assert_eq!(false_triggers, 3);
    }

    #[test]
    fn rejects_tight_schedules() {
        let params = Preset::Fig5.params();
        let config = Preset::Fig5.controller();
        let options = EfficiencyOptions {
            min_gap: 0.5,
            ..EfficiencyOptions::default()
        };
        assert!(efficiency_experiment(&params, &config, 200, 1, &options).is_err());
        assert!(
            efficiency_experiment(&params, &config, 10, 1, &EfficiencyOptions::default()).is_err()
        );
    }

    #[test]
    fn preset_values() {
        let p = Preset::Fig5.params();
        assert_eq!((p.background_rate, p.eta_g), (2.0, 0.8));
        assert!((p.delta_phi / p.phi0 - 0.005).abs() < 1e-15);
        assert_eq!(Preset::Fig5.controller().threshold, 10.0);
        let p = Preset::Fig3.params();
        assert_eq!((p.pump_rate, p.gamma), (100.0, 20.0));
        assert_eq!(Preset::Fig4.params().background_rate, 4.0);
        assert_eq!(Preset::Fig4.controller().threshold, 20.0);
    }
}
