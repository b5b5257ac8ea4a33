//! Physical parameters and the closed-form physics of the micromaser.
//!
//! Everything here works in the interaction phase `phi = g * tau` rather than
//! in `g` and `tau` separately. `g` is kept only so a physical transit time
//! can be reported.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, ParamIssue};

/// Coupling strength used when none is given, rad/s.
pub const DEFAULT_COUPLING: f64 = 4.0e4;

/// Default Fock-space truncation.
pub const DEFAULT_N_MAX: usize = 20;

/// How simultaneous two-atom transits are treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TwoAtomMode {
    /// Every atom interacts alone with the field.
    #[default]
    Off,
    /// Atoms arriving within one transit time of the previous atom scramble
    /// the field instead of following single-atom Rabi dynamics.
    Phenomenological,
}

impl TwoAtomMode {
    pub fn as_str(self) -> &'static str {
        match self {
            TwoAtomMode::Off => "off",
            TwoAtomMode::Phenomenological => "phenomenological",
        }
    }
}

impl fmt::Display for TwoAtomMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for TwoAtomMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "off" => Ok(TwoAtomMode::Off),
            "phenomenological" => Ok(TwoAtomMode::Phenomenological),
            other => Err(format!(
                "unknown two-atom mode `{other}` (expected `off` or `phenomenological`)"
            )),
        }
    }
}

/// All physical and instrumental parameters of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimParams {
    /// Atom-field coupling strength, rad/s.
    pub g: f64,
    /// Nominal interaction phase `g * tau`, rad.
    pub phi0: f64,
    /// Standard deviation of the interaction phase, rad.
    pub delta_phi: f64,
    /// Atomic pump rate `R`, atoms/s.
    pub pump_rate: f64,
    /// Cavity field decay rate, 1/s.
    pub gamma: f64,
    /// Mean thermal photon number.
    pub n_thermal: f64,
    /// Ground-state detector efficiency.
    pub eta_g: f64,
    /// Excited-state detector efficiency.
    pub eta_e: f64,
    /// Dark-count plus crosstalk click rate on the ground channel, 1/s.
    pub background_rate: f64,
    /// Largest photon number represented.
    pub n_max: usize,
    pub two_atom_mode: TwoAtomMode,
}

impl Default for SimParams {
    fn default() -> Self {
        SimParams {
            g: DEFAULT_COUPLING,
            phi0: PI,
            delta_phi: 0.0,
            pump_rate: 100.0,
            gamma: 20.0,
            n_thermal: 0.0,
            eta_g: 1.0,
            eta_e: 1.0,
            background_rate: 0.0,
            n_max: DEFAULT_N_MAX,
            two_atom_mode: TwoAtomMode::Off,
        }
    }
}

impl SimParams {
    /// Atom transit time `tau = phi0 / g`, seconds.
    pub fn transit_time(&self) -> f64 {
        self.phi0 / self.g
    }

    /// Every violated range constraint, keyed by parameter name.
    pub fn issues(&self) -> Vec<ParamIssue> {
        let mut out = Vec::new();
        let mut check = |ok: bool, key: &'static str, msg: &str| {
            if !ok {
                out.push(ParamIssue::new(key, msg));
            }
        };
        check(
            self.g.is_finite() && self.g > 0.0,
            "g",
            "must be finite and > 0",
        );
        check(
            self.phi0.is_finite() && self.phi0 > 0.0,
            "phi0",
            "must be finite and > 0",
        );
        check(
            self.delta_phi.is_finite() && self.delta_phi >= 0.0,
            "delta_phi",
            "must be finite and >= 0",
        );
        check(
            self.pump_rate.is_finite() && self.pump_rate >= 0.0,
            "pump_rate",
            "must be finite and >= 0",
        );
        check(
            self.gamma.is_finite() && self.gamma >= 0.0,
            "gamma",
            "must be finite and >= 0",
        );
        check(
            self.n_thermal.is_finite() && self.n_thermal >= 0.0,
            "n_thermal",
            "must be finite and >= 0",
        );
        check(
            (0.0..=1.0).contains(&self.eta_g),
            "eta_g",
            "must lie in [0, 1]",
        );
        check(
            (0.0..=1.0).contains(&self.eta_e),
            "eta_e",
            "must lie in [0, 1]",
        );
        check(
            self.background_rate.is_finite() && self.background_rate >= 0.0,
            "background_rate",
            "must be finite and >= 0",
        );
        check(
            self.n_max >= 4,
            "n_max",
            "must be >= 4 so the n = 3 trapping state fits",
        );
        out
    }

    pub fn validate(&self) -> Result<(), Error> {
        let issues = self.issues();
        if issues.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidParams(issues))
        }
    }
}

/// Photon number, clock and pump status of the cavity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CavityState {
    pub n: usize,
    pub t: f64,
    pub pump_on: bool,
}

impl CavityState {
    /// Empty cavity at `t = 0` with the pump running.
    pub fn vacuum() -> Self {
        CavityState {
            n: 0,
            t: 0.0,
            pump_on: true,
        }
    }
}

impl Default for CavityState {
    fn default() -> Self {
        Self::vacuum()
    }
}

/// Kind of a recorded stochastic event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum JumpKind {
    /// Photon lost to the reservoir, n -> n - 1.
    PhotonLoss,
    /// Atom left in the excited state, n unchanged.
    AtomExcited,
    /// Atom left in the ground state having emitted, n -> n + 1.
    AtomGround,
    /// Photon gained from the thermal reservoir, n -> n + 1.
    ThermalGain,
    /// External photon arrival, n -> n + 1.
    Injection,
    /// Two atoms in the cavity at once, n -> n + {0, 1, 2}.
    TwoAtomScramble,
    /// Cavity emptied by a pulse of ground-state atoms, n -> 0.
    CleanPulse,
}

impl JumpKind {
    pub const ALL: [JumpKind; 7] = [
        JumpKind::PhotonLoss,
        JumpKind::AtomExcited,
        JumpKind::AtomGround,
        JumpKind::ThermalGain,
        JumpKind::Injection,
        JumpKind::TwoAtomScramble,
        JumpKind::CleanPulse,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            JumpKind::PhotonLoss => "photon_loss",
            JumpKind::AtomExcited => "atom_excited",
            JumpKind::AtomGround => "atom_ground",
            JumpKind::ThermalGain => "thermal_gain",
            JumpKind::Injection => "injection",
            JumpKind::TwoAtomScramble => "two_atom_scramble",
            JumpKind::CleanPulse => "clean_pulse",
        }
    }

    /// Number of atoms that leave the cavity with this event.
    pub fn atoms(self) -> u8 {
        match self {
            JumpKind::AtomExcited | JumpKind::AtomGround => 1,
            JumpKind::TwoAtomScramble => 2,
            _ => 0,
        }
    }
}

impl fmt::Display for JumpKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for JumpKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        JumpKind::ALL
            .iter()
            .copied()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| format!("unknown event kind `{s}`"))
    }
}

// sin and cos of pi * x, reduced so that integer x gives an exact zero.
fn sin_pi(x: f64) -> f64 {
    (PI * (x - x.round())).sin()
}

fn cos_pi(x: f64) -> f64 {
    (PI * (x - x.round())).cos()
}

/// Probability that an atom entering a cavity holding `n` photons leaves it in
/// the ground state, `sin^2(phi * sqrt(n + 1))`.
///
/// The phase is reduced in units of pi before the sine is taken, so trapping
/// points such as `(0, pi)` and `(3, pi)` evaluate to exactly zero.
pub fn emission_probability(n: usize, phi: f64) -> f64 {
    let s = sin_pi(phi / PI * ((n + 1) as f64).sqrt());
    s * s
}

/// Complement of [`emission_probability`], `cos^2(phi * sqrt(n + 1))`.
pub fn no_emission_probability(n: usize, phi: f64) -> f64 {
    let c = cos_pi(phi / PI * ((n + 1) as f64).sqrt());
    c * c
}

/// Interaction phase `k * pi / sqrt(n + 1)` at which a field of `n` photons
/// completes `k` full Rabi cycles and cannot grow.
pub fn trapping_phase(n: usize, k: i64) -> Result<f64, Error> {
    if k <= 0 {
        return Err(Error::InvalidTrappingIndex(k));
    }
    Ok(k as f64 * PI / ((n + 1) as f64).sqrt())
}

/// Transition rates out of a single Fock state, 1/s.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct JumpRates {
    pub loss: f64,
    pub thermal: f64,
    pub atom_ground: f64,
    pub atom_excited: f64,
}

impl JumpRates {
    pub fn total(&self) -> f64 {
        self.loss + self.thermal + self.atom_ground + self.atom_excited
    }

    pub fn atom(&self) -> f64 {
        self.atom_ground + self.atom_excited
    }
}

/// Per-state jump rates for `n` in `0..=n_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct RateTable {
    pub pump_on: bool,
    pub rows: Vec<JumpRates>,
    /// Up-going rate removed from the top row by the truncation.
    pub truncated_rate: f64,
}

impl RateTable {
    pub fn n_max(&self) -> usize {
        self.rows.len() - 1
    }

    pub fn at(&self, n: usize) -> &JumpRates {
        &self.rows[n]
    }
}

/// Jump rates implied by the loss, excited-exit, ground-exit and thermal-gain
/// jump operators acting on each Fock state.
///
/// At `n_max` the up-going rates are set to zero; an atom there always leaves
/// excited and the removed weight is reported in `truncated_rate`.
pub fn build_rate_table(params: &SimParams, phi: f64, pump_on: bool) -> RateTable {
    let r = if pump_on { params.pump_rate } else { 0.0 };
    let n_max = params.n_max;
    let mut truncated_rate = 0.0;
    let rows = (0..=n_max)
        .map(|n| {
            let loss = params.gamma * (params.n_thermal + 1.0) * n as f64;
            let mut thermal = params.gamma * params.n_thermal * (n + 1) as f64;
            let mut atom_ground = r * emission_probability(n, phi);
            if n == n_max {
                truncated_rate = thermal + atom_ground;
                thermal = 0.0;
                atom_ground = 0.0;
            }
            JumpRates {
                loss,
                thermal,
                atom_ground,
                atom_excited: r - atom_ground,
            }
        })
        .collect();
    RateTable {
        pump_on,
        rows,
        truncated_rate,
    }
}
