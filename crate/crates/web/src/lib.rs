//! WebAssembly bindings for the demo page. Each export takes plain numbers and
//! returns a JSON string; errors come back as `{"error": "..."}`.

use std::f64::consts::PI;

use micromaser::experiments::{efficiency_experiment, rate_series, EfficiencyOptions};
use micromaser::oracle::{hysteresis_sweep, SweepOptions};
use micromaser::{run_trajectory, ControllerConfig, InjectionSchedule, SimParams, TwoAtomMode};
use serde::Serialize;
use wasm_bindgen::prelude::*;

const RATE_WINDOW: f64 = 0.05;

fn to_json<T: Serialize>(result: Result<T, String>) -> String {
    match result {
        Ok(v) => serde_json::to_string(&v).unwrap_or_else(|e| error_json(&e.to_string())),
        Err(e) => error_json(&e),
    }
}

fn error_json(message: &str) -> String {
    serde_json::json!({ "error": message }).to_string()
}

fn params(pump_rate: f64, gamma: f64, phi0_over_pi: f64, delta_phi_rel: f64) -> SimParams {
    let phi0 = phi0_over_pi * PI;
    SimParams {
        pump_rate,
        gamma,
        phi0,
        delta_phi: delta_phi_rel * phi0,
        ..SimParams::default()
    }
}

#[derive(Serialize)]
struct TrajectoryView {
    /// (t, n) after every jump, starting from the vacuum at t = 0.
    steps: Vec<(f64, usize)>,
    rates: Vec<(f64, f64)>,
    injection: f64,
    ground_atoms: usize,
    excited_atoms: usize,
}

/// One trajectory with a single photon injected at `injection`; ideal
/// detectors plus `background_rate` dark counts.
#[allow(clippy::too_many_arguments)]
#[wasm_bindgen]
pub fn trajectory(
    pump_rate: f64,
    gamma: f64,
    phi0_over_pi: f64,
    delta_phi_rel: f64,
    background_rate: f64,
    injection: f64,
    t_end: f64,
    seed: u32,
) -> String {
    let p = SimParams {
        background_rate,
        ..params(pump_rate, gamma, phi0_over_pi, delta_phi_rel)
    };
    let schedule = InjectionSchedule::Times(vec![injection]);
    to_json(
        run_trajectory(&p, &schedule, t_end, u64::from(seed), None)
            .map(|traj| {
                let mut steps = vec![(0.0, 0)];
                steps.extend(traj.events.iter().map(|e| (e.t, e.n_after)));
                let rates = rate_series(&traj, RATE_WINDOW, t_end / 400.0)
                    .into_iter()
                    .map(|r| (r.t, r.ground_rate))
                    .collect();
                TrajectoryView {
                    steps,
                    rates,
                    injection,
                    ground_atoms: traj.count(micromaser::JumpKind::AtomGround),
                    excited_atoms: traj.count(micromaser::JumpKind::AtomExcited),
                }
            })
            .map_err(|e| e.to_string()),
    )
}

/// Quasi-static sweep of the pump rate up from the vacuum and back down.
#[wasm_bindgen]
pub fn hysteresis(
    gamma: f64,
    phi0_over_pi: f64,
    delta_phi_rel: f64,
    r_min: f64,
    r_max: f64,
    points: u32,
) -> String {
    if points < 2 || r_max.partial_cmp(&r_min) != Some(std::cmp::Ordering::Greater) {
        return error_json("need at least two points and r_max > r_min");
    }
    let p = params(r_min, gamma, phi0_over_pi, delta_phi_rel);
    let step = (r_max - r_min) / f64::from(points - 1);
    let rates: Vec<f64> = (0..points).map(|k| r_min + step * f64::from(k)).collect();
    to_json(hysteresis_sweep(&p, &rates, SweepOptions::default()).map_err(|e| e.to_string()))
}

/// Detection efficiency at one pump rate with the threshold controller.
#[wasm_bindgen]
pub fn efficiency(
    pump_rate: f64,
    threshold: f64,
    eta_g: f64,
    background_rate: f64,
    two_atom: bool,
    injections: u32,
    seed: u32,
) -> String {
    let p = SimParams {
        eta_g,
        background_rate,
        two_atom_mode: if two_atom {
            TwoAtomMode::Phenomenological
        } else {
            TwoAtomMode::Off
        },
        ..params(pump_rate, 20.0, 1.0, 0.005)
    };
    let config = ControllerConfig::free_decay(threshold, p.gamma);
    to_json(
        efficiency_experiment(
            &p,
            &config,
            injections as usize,
            u64::from(seed),
            &EfficiencyOptions::default(),
        )
        .map(|run| run.point)
        .map_err(|e| e.to_string()),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trajectory_json() {
        let v: serde_json::Value =
            serde_json::from_str(&trajectory(100.0, 20.0, 1.0, 0.0, 0.0, 0.5, 1.0, 7)).unwrap();
        assert_eq!(v["injection"], 0.5);
        assert!(v["steps"].as_array().unwrap().len() > 10);
        assert_eq!(v["rates"].as_array().unwrap().len(), 401);
    }

    #[test]
    fn hysteresis_json() {
        let v: serde_json::Value =
            serde_json::from_str(&hysteresis(20.0, 1.0, 0.0, 50.0, 1000.0, 20)).unwrap();
        assert_eq!(v["up"].as_array().unwrap().len(), 20);
        assert!(v["up"]
            .as_array()
            .unwrap()
            .iter()
            .all(|p| p["output_rate"] == 0.0));
        assert!(hysteresis(20.0, 1.0, 0.0, 50.0, 10.0, 20).contains("error"));
    }

    #[test]
    fn efficiency_json() {
        let v: serde_json::Value =
            serde_json::from_str(&efficiency(500.0, 10.0, 0.8, 2.0, false, 100, 1)).unwrap();
        assert_eq!(v["injected"], 100);
        assert!(v["efficiency"].as_f64().unwrap() > 0.7);
        let err: serde_json::Value =
            serde_json::from_str(&efficiency(500.0, 10.0, 1.5, 2.0, false, 100, 1)).unwrap();
        assert!(err["error"].as_str().unwrap().contains("eta_g"));
    }
}
