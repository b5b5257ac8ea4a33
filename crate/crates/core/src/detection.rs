//! Detector chain: efficiency thinning, background clicks, windowed rates and
//! the threshold-trigger controller that switches the pump off after a
//! detection and re-arms once the cavity has been reset.

use std::collections::VecDeque;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, ParamIssue};
use crate::model::SimParams;
use crate::rng::{exponential, uniform};
use crate::trajectory::EventRecord;

/// Default trailing window of the rate estimator, seconds.
pub const DEFAULT_WINDOW: f64 = 0.25;

/// Default clean-pulse duration, seconds.
pub const DEFAULT_PULSE: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Channel {
    Ground,
    Excited,
}

impl Channel {
    pub fn as_str(self) -> &'static str {
        match self {
            Channel::Ground => "ground",
            Channel::Excited => "excited",
        }
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Whether a click came from an atom or from the background. Diagnostic only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Origin {
    Atom,
    Background,
}

impl Origin {
    pub fn as_str(self) -> &'static str {
        match self {
            Origin::Atom => "true",
            Origin::Background => "background",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClickRecord {
    pub t: f64,
    pub channel: Channel,
    pub origin: Origin,
}

/// Clicks produced by the atoms leaving with one event, in a fixed order:
/// ground-state atoms first, then excited ones. One uniform is drawn per
/// atom whatever the efficiencies are, so the stream position depends only on
/// the event sequence.
pub fn atom_clicks<R: Rng + ?Sized>(
    event: &EventRecord,
    params: &SimParams,
    rng: &mut R,
    out: &mut Vec<ClickRecord>,
) {
    let atoms = event.kind.atoms();
    let ground = event.atoms_ground.min(atoms);
    for i in 0..atoms {
        let (channel, eta) = if i < ground {
            (Channel::Ground, params.eta_g)
        } else {
            (Channel::Excited, params.eta_e)
        };
        if uniform(rng) < eta {
            out.push(ClickRecord {
                t: event.t,
                channel,
                origin: Origin::Atom,
            });
        }
    }
}

/// Homogeneous Poisson source of ground-channel background clicks.
#[derive(Debug, Clone)]
pub struct BackgroundSource {
    rate: f64,
    next: f64,
}

impl BackgroundSource {
    pub fn new<R: Rng + ?Sized>(rate: f64, start: f64, rng: &mut R) -> Self {
        let mut source = BackgroundSource { rate, next: start };
        source.next = source.draw_after(start, rng);
        source
    }

    fn draw_after<R: Rng + ?Sized>(&self, t: f64, rng: &mut R) -> f64 {
        if self.rate > 0.0 {
            t + exponential(rng, self.rate)
        } else {
            f64::INFINITY
        }
    }

    pub fn peek(&self) -> f64 {
        self.next
    }

    /// Emits the pending click and schedules the next one.
    pub fn pop<R: Rng + ?Sized>(&mut self, rng: &mut R) -> ClickRecord {
        let t = self.next;
        self.next = self.draw_after(t, rng);
        ClickRecord {
            t,
            channel: Channel::Ground,
            origin: Origin::Background,
        }
    }
}

/// Turns an event stream into detector clicks over `[t_start, t_end]`.
///
/// Ground-state exits click with probability `eta_g`, excited exits with
/// `eta_e`, and background clicks at rate `background_rate` are added to the
/// ground channel. Uses the same draw order as the online co-simulation, so
/// identical streams give identical clicks.
pub fn clicks_from_events<R1: Rng + ?Sized, R2: Rng + ?Sized>(
    events: &[EventRecord],
    params: &SimParams,
    t_start: f64,
    t_end: f64,
    thinning: &mut R1,
    background: &mut R2,
) -> Vec<ClickRecord> {
    let mut atom = Vec::new();
    for event in events {
        atom_clicks(event, params, thinning, &mut atom);
    }
    let mut source = BackgroundSource::new(params.background_rate, t_start, background);
    let mut out = Vec::with_capacity(atom.len());
    let mut atom = atom.into_iter().peekable();
    loop {
        let next_bg = source.peek();
        match atom.peek() {
            Some(c) if c.t <= next_bg || next_bg > t_end => out.push(atom.next().unwrap()),
            _ if next_bg <= t_end => out.push(source.pop(background)),
            _ => break,
        }
    }
    out
}

/// Clicks on `channel` in `(t - window, t]` divided by `window`.
pub fn windowed_rate(clicks: &[ClickRecord], channel: Channel, t: f64, window: f64) -> f64 {
    let lo = clicks.partition_point(|c| c.t + window <= t);
    let hi = clicks.partition_point(|c| c.t <= t);
    clicks[lo..hi]
        .iter()
        .filter(|c| c.channel == channel)
        .count() as f64
        / window
}

/// Largest trailing-window rate on `channel` evaluated at each click in
/// `[from, to]`. The supremum over continuous time is attained at a click.
pub fn peak_windowed_rate(
    clicks: &[ClickRecord],
    channel: Channel,
    window: f64,
    from: f64,
    to: f64,
) -> f64 {
    let times: Vec<f64> = clicks
        .iter()
        .filter(|c| c.channel == channel)
        .map(|c| c.t)
        .collect();
    let mut best = 0usize;
    let mut lo = 0usize;
    for (hi, &t) in times.iter().enumerate() {
        while times[lo] + window <= t {
            lo += 1;
        }
        if t >= from && t <= to {
            best = best.max(hi + 1 - lo);
        }
    }
    best as f64 / window
}

/// How the cavity is returned to vacuum after a detection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResetMode {
    /// Pump off; the field decays freely for `reset_duration`.
    FreeDecay,
    /// Pump off; after `reset_duration` the field is emptied at once.
    CleanPulse,
}

impl ResetMode {
    pub fn as_str(self) -> &'static str {
        match self {
            ResetMode::FreeDecay => "free_decay",
            ResetMode::CleanPulse => "clean_pulse",
        }
    }
}

impl std::str::FromStr for ResetMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "free_decay" => Ok(ResetMode::FreeDecay),
            "clean_pulse" => Ok(ResetMode::CleanPulse),
            other => Err(format!(
                "unknown reset mode `{other}` (expected `free_decay` or `clean_pulse`)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControllerConfig {
    /// Trigger level on the windowed ground rate, 1/s.
    pub threshold: f64,
    /// Trailing window of the rate estimator, s.
    pub window: f64,
    pub reset_mode: ResetMode,
    /// Time the pump stays off after a trigger, s.
    pub reset_duration: f64,
    /// The controller re-arms only once the windowed ground rate is at or
    /// below this level, 1/s.
    pub rearm_rate: f64,
}

impl ControllerConfig {
    /// Free-decay reset lasting `5 / gamma`.
    pub fn free_decay(threshold: f64, gamma: f64) -> Self {
        ControllerConfig {
            threshold,
            window: DEFAULT_WINDOW,
            reset_mode: ResetMode::FreeDecay,
            reset_duration: 5.0 / gamma,
            rearm_rate: threshold,
        }
    }

    /// Clean-pulse reset lasting [`DEFAULT_PULSE`].
    pub fn clean_pulse(threshold: f64) -> Self {
        ControllerConfig {
            threshold,
            window: DEFAULT_WINDOW,
            reset_mode: ResetMode::CleanPulse,
            reset_duration: DEFAULT_PULSE,
            rearm_rate: threshold,
        }
    }

    pub fn issues(&self) -> Vec<ParamIssue> {
        let mut out = Vec::new();
        if !(self.threshold.is_finite() && self.threshold > 0.0) {
            out.push(ParamIssue::new("threshold", "must be finite and > 0"));
        }
        if !(self.window.is_finite() && self.window > 0.0) {
            out.push(ParamIssue::new("window", "must be finite and > 0"));
        }
        if !(self.reset_duration.is_finite() && self.reset_duration >= 0.0) {
            out.push(ParamIssue::new("reset_duration", "must be finite and >= 0"));
        }
        if !(self.rearm_rate.is_finite() && self.rearm_rate >= 0.0) {
            out.push(ParamIssue::new("rearm_rate", "must be finite and >= 0"));
        }
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

    /// Configurations that run but are unlikely to do what was intended.
    pub fn warnings(&self, params: &SimParams) -> Vec<String> {
        let mut out = Vec::new();
        if self.threshold <= params.background_rate {
            out.push(format!(
                "threshold {} /s is at or below the background rate {} /s; expect continual false triggers",
                self.threshold, params.background_rate
            ));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionEvent {
    pub t_trigger: f64,
    pub t_rearmed: f64,
    /// Ground clicks in the window at the moment of the trigger.
    pub window_count: usize,
}

impl DetectionEvent {
    pub fn dead_time(&self) -> f64 {
        self.t_rearmed - self.t_trigger
    }
}

/// Command from the controller to the cavity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ControlAction {
    PumpOff,
    PumpOn,
    ClearCavity,
}

/// Threshold-trigger state machine. Decisions depend only on the time and
/// channel of the clicks fed to it.
#[derive(Debug, Clone)]
pub struct Controller {
    config: ControllerConfig,
    armed: bool,
    window: VecDeque<f64>,
    timer: Option<f64>,
    pulse_pending: bool,
    detections: Vec<DetectionEvent>,
}

impl Controller {
    pub fn new(config: ControllerConfig) -> Self {
        Controller {
            config,
            armed: true,
            window: VecDeque::new(),
            timer: None,
            pulse_pending: false,
            detections: Vec::new(),
        }
    }

    pub fn config(&self) -> &ControllerConfig {
        &self.config
    }

    pub fn is_armed(&self) -> bool {
        self.armed
    }

    pub fn detections(&self) -> &[DetectionEvent] {
        &self.detections
    }

    /// Time of the next scheduled internal transition, if any.
    pub fn next_timer(&self) -> Option<f64> {
        self.timer
    }

    fn evict(&mut self, t: f64) {
        while self
            .window
            .front()
            .is_some_and(|&c| c + self.config.window <= t)
        {
            self.window.pop_front();
        }
    }

    fn rate(&self) -> f64 {
        self.window.len() as f64 / self.config.window
    }

    pub fn on_click(&mut self, t: f64, channel: Channel) -> Option<ControlAction> {
        if channel != Channel::Ground {
            return None;
        }
        self.window.push_back(t);
        self.evict(t);
        if !self.armed || self.rate() < self.config.threshold {
            return None;
        }
        self.armed = false;
        self.timer = Some(t + self.config.reset_duration);
        self.pulse_pending = self.config.reset_mode == ResetMode::CleanPulse;
        self.detections.push(DetectionEvent {
            t_trigger: t,
            t_rearmed: t + self.config.reset_duration,
            window_count: self.window.len(),
        });
        Some(ControlAction::PumpOff)
    }

    /// Fires the pending timer at time `t`.
    pub fn on_timer(&mut self, t: f64) -> Vec<ControlAction> {
        let mut actions = Vec::new();
        if self.timer.is_none() {
            return actions;
        }
        if std::mem::take(&mut self.pulse_pending) {
            actions.push(ControlAction::ClearCavity);
        }
        self.evict(t);
        if self.rate() <= self.config.rearm_rate {
            self.armed = true;
            self.timer = None;
            if let Some(last) = self.detections.last_mut() {
                last.t_rearmed = t;
            }
            actions.push(ControlAction::PumpOn);
        } else {
            // retry when the oldest click leaves the window
            let oldest = *self
                .window
                .front()
                .expect("rate above rearm level implies clicks");
            self.timer = Some((oldest + self.config.window).max(t));
        }
        actions
    }
}

/// Outcome of replaying a click stream through the controller.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ControllerRun {
    pub detections: Vec<DetectionEvent>,
    pub commands: Vec<(f64, ControlAction)>,
}

/// Replays a time-ordered click stream through a fresh controller. The
/// commands have no effect on the clicks, so this is the open-loop view of
/// the controller.
pub fn run_controller(clicks: &[ClickRecord], config: &ControllerConfig) -> ControllerRun {
    let mut controller = Controller::new(config.clone());
    let mut commands = Vec::new();
    for click in clicks {
        while let Some(tt) = controller.next_timer().filter(|&tt| tt <= click.t) {
            commands.extend(controller.on_timer(tt).into_iter().map(|a| (tt, a)));
        }
        if let Some(action) = controller.on_click(click.t, click.channel) {
            commands.push((click.t, action));
        }
    }
    while let Some(tt) = controller.next_timer() {
        commands.extend(controller.on_timer(tt).into_iter().map(|a| (tt, a)));
    }
    ControllerRun {
        detections: controller.detections,
        commands,
    }
}

/// Fraction of disjoint windows of length `window` within `[t0, t1)` whose
/// ground count reaches `threshold * window`.
pub fn window_exceedance_fraction(
    clicks: &[ClickRecord],
    threshold: f64,
    window: f64,
    t0: f64,
    t1: f64,
) -> f64 {
    let n_windows = ((t1 - t0) / window).floor() as usize;
    if n_windows == 0 {
        return 0.0;
    }
    let mut counts = vec![0usize; n_windows];
    for c in clicks
        .iter()
        .filter(|c| c.channel == Channel::Ground && c.t >= t0)
    {
        let k = ((c.t - t0) / window) as usize;
        if k < n_windows {
            counts[k] += 1;
        }
    }
    let hits = counts
        .iter()
        .filter(|&&k| k as f64 / window >= threshold)
        .count();
    hits as f64 / n_windows as f64
}
