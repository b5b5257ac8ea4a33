//! Event-driven simulation of the photon-number jump process.
//!
//! Between jumps the cavity state does not change, so a trajectory is a
//! continuous-time Markov chain on the photon number. Waiting times are
//! exponential in the total rate of the current state; external events
//! (injections, background clicks, controller timers) interrupt the draw, and
//! because the process is memoryless the pending jump is simply redrawn.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::detection::{
    atom_clicks, BackgroundSource, ClickRecord, ControlAction, Controller, ControllerConfig,
    DetectionEvent,
};
use crate::error::Error;
use crate::model::{
    build_rate_table, emission_probability, CavityState, JumpKind, RateTable, SimParams,
    TwoAtomMode,
};
use crate::rng::{exponential, standard_normal, stream, uniform, SimRng, Stream};

/// One timestamped stochastic jump.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub t: f64,
    pub kind: JumpKind,
    pub n_after: usize,
    /// Interaction phase of the atom, for single-atom events.
    pub phi_used: Option<f64>,
    /// Atoms that left in the ground state with this event.
    pub atoms_ground: u8,
}

impl EventRecord {
    pub fn new(t: f64, kind: JumpKind, n_after: usize, phi_used: Option<f64>) -> Self {
        let atoms_ground = u8::from(kind == JumpKind::AtomGround);
        EventRecord {
            t,
            kind,
            n_after,
            phi_used,
            atoms_ground,
        }
    }
}

/// When external photons arrive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InjectionSchedule {
    None,
    /// Explicit arrival times, strictly increasing.
    Times(Vec<f64>),
    /// Poisson arrivals at `rate` from `start`.
    Poisson {
        rate: f64,
        start: f64,
    },
    /// Arrivals every `spacing` seconds from `start`.
    FixedSpacing {
        start: f64,
        spacing: f64,
    },
    /// Gaps drawn uniformly from `[min_gap, max_gap]`, first gap from `start`.
    UniformGaps {
        start: f64,
        min_gap: f64,
        max_gap: f64,
    },
}

impl InjectionSchedule {
    /// Arrival times before `t_end`.
    pub fn materialize<R: Rng + ?Sized>(&self, t_end: f64, rng: &mut R) -> Result<Vec<f64>, Error> {
        let bad = |msg: &str| Err(Error::InvalidSchedule(msg.to_string()));
        let mut times = Vec::new();
        match *self {
            InjectionSchedule::None => {}
            InjectionSchedule::Times(ref ts) => {
                if ts.iter().any(|t| !t.is_finite() || *t < 0.0) {
                    return bad("injection times must be finite and >= 0");
                }
                if ts.windows(2).any(|w| w[1] <= w[0]) {
                    return bad("injection times must be strictly increasing");
                }
                times.extend(ts.iter().copied().filter(|&t| t < t_end));
            }
            InjectionSchedule::Poisson { rate, start } => {
                if !(rate > 0.0 && rate.is_finite()) {
                    return bad("poisson injection rate must be > 0");
                }
                let mut t = start + exponential(rng, rate);
                while t < t_end {
                    times.push(t);
                    t += exponential(rng, rate);
                }
            }
            InjectionSchedule::FixedSpacing { start, spacing } => {
                if !(spacing > 0.0 && spacing.is_finite()) {
                    return bad("injection spacing must be > 0");
                }
                let mut k = 0u64;
                loop {
                    let t = start + spacing * k as f64;
                    if t >= t_end {
                        break;
                    }
                    times.push(t);
                    k += 1;
                }
            }
            InjectionSchedule::UniformGaps {
                start,
                min_gap,
                max_gap,
            } => {
                if !(min_gap >= 0.0 && max_gap >= min_gap && max_gap > 0.0 && max_gap.is_finite()) {
                    return bad("uniform gaps need 0 <= min_gap <= max_gap, max_gap > 0");
                }
                let mut t = start;
                loop {
                    t += min_gap + (max_gap - min_gap) * uniform(rng);
                    if t >= t_end {
                        break;
                    }
                    times.push(t);
                }
            }
        }
        Ok(times)
    }
}

/// Gaussian interaction phase `phi0 + delta_phi * z`.
pub fn sample_phase<R: Rng + ?Sized>(params: &SimParams, rng: &mut R) -> f64 {
    if params.delta_phi == 0.0 {
        params.phi0
    } else {
        params.phi0 + params.delta_phi * standard_normal(rng)
    }
}

/// Adds one photon; `None` when the cavity is already at `n_max`.
pub fn inject_photon(state: &CavityState, n_max: usize) -> Option<CavityState> {
    (state.n < n_max).then_some(CavityState {
        n: state.n + 1,
        ..*state
    })
}

/// True when an atom arrives less than one transit time after the previous
/// one, i.e. both are in the cavity together.
pub fn maybe_two_atom_event(params: &SimParams, last_atom_gap: f64) -> bool {
    params.two_atom_mode == TwoAtomMode::Phenomenological && last_atom_gap < params.transit_time()
}

/// Two-atom scramble: the field gains 0, 1 or 2 photons with equal
/// probability, capped at `n_max`. Returns the new state, the number of
/// atoms that left in the ground state, and whether the cap cut the gain.
pub fn apply_two_atom_scramble<R: Rng + ?Sized>(
    state: &CavityState,
    n_max: usize,
    rng: &mut R,
) -> (CavityState, u8, bool) {
    let gain = rng.random_range(0..3usize);
    let n = (state.n + gain).min(n_max);
    let emitted = n - state.n;
    (CavityState { n, ..*state }, emitted as u8, emitted < gain)
}

/// Result of a single jump attempt.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepOutcome {
    Jump(EventRecord, CavityState),
    /// Every rate is zero; only an external event can move the state.
    Quiescent,
}

/// Attributes a jump of the state's rate table, given that one occurs.
fn select_jump<R: Rng + ?Sized>(
    state: &CavityState,
    t: f64,
    params: &SimParams,
    table: &RateTable,
    last_atom: Option<f64>,
    rng: &mut R,
) -> (EventRecord, CavityState, bool) {
    let rates = table.at(state.n);
    let u = uniform(rng) * rates.total();
    let mut next = CavityState { t, ..*state };
    if u < rates.loss {
        next.n -= 1;
        return (
            EventRecord::new(t, JumpKind::PhotonLoss, next.n, None),
            next,
            false,
        );
    }
    if u < rates.loss + rates.thermal {
        next.n += 1;
        return (
            EventRecord::new(t, JumpKind::ThermalGain, next.n, None),
            next,
            false,
        );
    }
    let gap = last_atom.map_or(f64::INFINITY, |last| t - last);
    if maybe_two_atom_event(params, gap) {
        let (after, ground, capped) = apply_two_atom_scramble(&next, params.n_max, rng);
        let mut record = EventRecord::new(t, JumpKind::TwoAtomScramble, after.n, None);
        record.atoms_ground = ground;
        return (record, after, capped);
    }
    let phi = sample_phase(params, rng);
    let emits = uniform(rng) < emission_probability(state.n, phi);
    if emits && state.n < params.n_max {
        next.n += 1;
        (
            EventRecord::new(t, JumpKind::AtomGround, next.n, Some(phi)),
            next,
            false,
        )
    } else {
        (
            EventRecord::new(t, JumpKind::AtomExcited, next.n, Some(phi)),
            next,
            emits,
        )
    }
}

/// One jump of the free-running process from `state`: exponential waiting
/// time in the total rate, then a jump chosen in proportion to its rate. Atom
/// events draw their own phase. `last_atom` is the arrival time of the
/// previous atom, used for two-atom flagging.
pub fn step<R: Rng + ?Sized>(
    state: &CavityState,
    params: &SimParams,
    last_atom: Option<f64>,
    rng: &mut R,
) -> StepOutcome {
    let table = build_rate_table(params, params.phi0, state.pump_on);
    let total = table.at(state.n).total();
    if total <= 0.0 {
        return StepOutcome::Quiescent;
    }
    let t = state.t + exponential(rng, total);
    let (record, next, _) = select_jump(state, t, params, &table, last_atom, rng);
    StepOutcome::Jump(record, next)
}

/// Everything recorded along one trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub initial: CavityState,
    pub t_end: f64,
    pub events: Vec<EventRecord>,
    pub clicks: Vec<ClickRecord>,
    pub detections: Vec<DetectionEvent>,
    /// Pump switching times and the new pump status.
    pub pump_log: Vec<(f64, bool)>,
    /// Scheduled injection times, including any dropped at the cap.
    pub injections: Vec<f64>,
    /// Up-going jumps suppressed by the Fock-space cap.
    pub truncations: u64,
}

impl Trajectory {
    pub fn count(&self, kind: JumpKind) -> usize {
        self.events.iter().filter(|e| e.kind == kind).count()
    }

    /// Time spent in each photon number over `[initial.t, t_end]`.
    pub fn occupation_times(&self, n_max: usize) -> Vec<f64> {
        let mut occ = vec![0.0; n_max + 1];
        let mut n = self.initial.n;
        let mut t = self.initial.t;
        for e in &self.events {
            occ[n] += e.t - t;
            n = e.n_after;
            t = e.t;
        }
        occ[n] += self.t_end - t;
        occ
    }

    /// Photon number just after time `t`.
    pub fn photon_number_at(&self, t: f64) -> usize {
        let k = self.events.partition_point(|e| e.t <= t);
        if k == 0 {
            self.initial.n
        } else {
            self.events[k - 1].n_after
        }
    }

    /// Whether the pump was on at time `t`.
    pub fn pump_on_at(&self, t: f64) -> bool {
        let k = self.pump_log.partition_point(|p| p.0 <= t);
        if k == 0 {
            self.initial.pump_on
        } else {
            self.pump_log[k - 1].1
        }
    }

    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.truncations > 0 {
            out.push(format!(
                "{} up-going jumps were suppressed by the photon-number cap",
                self.truncations
            ));
        }
        out
    }
}

/// Single-threaded co-simulation of the cavity, the detectors and the
/// optional threshold controller.
#[derive(Debug, Clone)]
pub struct Simulation {
    params: SimParams,
    table_on: RateTable,
    table_off: RateTable,
    state: CavityState,
    initial: CavityState,
    physics: SimRng,
    thinning: SimRng,
    background_rng: SimRng,
    background: BackgroundSource,
    injections: Vec<f64>,
    next_injection: usize,
    controller: Option<Controller>,
    last_atom: Option<f64>,
    truncations: u64,
    events: Vec<EventRecord>,
    clicks: Vec<ClickRecord>,
    pump_log: Vec<(f64, bool)>,
}

enum External {
    Timer,
    Injection,
    Background,
    End,
}

impl Simulation {
    pub fn new(params: SimParams, seed: u64, initial: CavityState) -> Result<Self, Error> {
        params.validate()?;
        if initial.n > params.n_max {
            return Err(Error::InvalidParams(vec![crate::error::ParamIssue::new(
                "n",
                "initial photon number exceeds n_max",
            )]));
        }
        let mut background_rng = stream(seed, Stream::Background);
        let background =
            BackgroundSource::new(params.background_rate, initial.t, &mut background_rng);
        Ok(Simulation {
            table_on: build_rate_table(&params, params.phi0, true),
            table_off: build_rate_table(&params, params.phi0, false),
            params,
            state: initial,
            initial,
            physics: stream(seed, Stream::Physics),
            thinning: stream(seed, Stream::Thinning),
            background_rng,
            background,
            injections: Vec::new(),
            next_injection: 0,
            controller: None,
            last_atom: None,
            truncations: 0,
            events: Vec::new(),
            clicks: Vec::new(),
            pump_log: Vec::new(),
        })
    }

    pub fn with_injections(mut self, times: Vec<f64>) -> Result<Self, Error> {
        InjectionSchedule::Times(times.clone()).materialize(f64::INFINITY, &mut self.physics)?;
        self.next_injection = times.partition_point(|&t| t < self.state.t);
        self.injections = times;
        Ok(self)
    }

    pub fn with_controller(mut self, config: ControllerConfig) -> Result<Self, Error> {
        config.validate()?;
        self.controller = Some(Controller::new(config));
        Ok(self)
    }

    pub fn state(&self) -> &CavityState {
        &self.state
    }

    pub fn events(&self) -> &[EventRecord] {
        &self.events
    }

    pub fn controller(&self) -> Option<&Controller> {
        self.controller.as_ref()
    }

    fn table(&self) -> &RateTable {
        if self.state.pump_on {
            &self.table_on
        } else {
            &self.table_off
        }
    }

    fn next_external(&self, t_end: f64) -> (f64, External) {
        let mut best = (t_end, External::End);
        if let Some(t) = self.controller.as_ref().and_then(Controller::next_timer) {
            if t <= best.0 {
                best = (t, External::Timer);
            }
        }
        if let Some(&t) = self.injections.get(self.next_injection) {
            if t < best.0 {
                best = (t, External::Injection);
            }
        }
        let t = self.background.peek();
        if t < best.0 {
            best = (t, External::Background);
        }
        best
    }

    fn set_pump(&mut self, on: bool) {
        if self.state.pump_on != on {
            self.state.pump_on = on;
            self.pump_log.push((self.state.t, on));
        }
    }

    fn feed_controller(&mut self, from: usize) {
        let Some(controller) = self.controller.as_mut() else {
            return;
        };
        let mut pump_off = false;
        for click in &self.clicks[from..] {
            if controller.on_click(click.t, click.channel) == Some(ControlAction::PumpOff) {
                pump_off = true;
            }
        }
        if pump_off {
            self.set_pump(false);
        }
    }

    fn fire_timer(&mut self) {
        let t = self.state.t;
        let actions = match self.controller.as_mut() {
            Some(c) => c.on_timer(t),
            None => return,
        };
        for action in actions {
            match action {
                ControlAction::PumpOn => self.set_pump(true),
                ControlAction::PumpOff => self.set_pump(false),
                ControlAction::ClearCavity => {
                    self.state.n = 0;
                    self.events
                        .push(EventRecord::new(t, JumpKind::CleanPulse, 0, None));
                }
            }
        }
    }

    /// Processes the next occurrence before `t_end`. Returns `false` once the
    /// clock has reached `t_end`.
    pub fn advance(&mut self, t_end: f64) -> bool {
        if self.state.t >= t_end {
            return false;
        }
        let (t_ext, which) = self.next_external(t_end);
        let total = self.table().at(self.state.n).total();
        if total > 0.0 {
            let t_jump = self.state.t + exponential(&mut self.physics, total);
            if t_jump < t_ext {
                let table = if self.state.pump_on {
                    &self.table_on
                } else {
                    &self.table_off
                };
                let (record, next, truncated) = select_jump(
                    &self.state,
                    t_jump,
                    &self.params,
                    table,
                    self.last_atom,
                    &mut self.physics,
                );
                self.truncations += u64::from(truncated);
                self.state = next;
                if record.kind.atoms() > 0 {
                    self.last_atom = Some(t_jump);
                    let from = self.clicks.len();
                    atom_clicks(&record, &self.params, &mut self.thinning, &mut self.clicks);
                    self.events.push(record);
                    self.feed_controller(from);
                } else {
                    self.events.push(record);
                }
                return true;
            }
        }
        self.state.t = t_ext;
        match which {
            External::End => return false,
            External::Timer => self.fire_timer(),
            External::Injection => {
                self.next_injection += 1;
                match inject_photon(&self.state, self.params.n_max) {
                    Some(next) => {
                        self.state = next;
                        self.events.push(EventRecord::new(
                            t_ext,
                            JumpKind::Injection,
                            next.n,
                            None,
                        ));
                    }
                    None => self.truncations += 1,
                }
            }
            External::Background => {
                let from = self.clicks.len();
                let click = self.background.pop(&mut self.background_rng);
                self.clicks.push(click);
                self.feed_controller(from);
            }
        }
        true
    }

    pub fn run_until(&mut self, t_end: f64) {
        while self.advance(t_end) {}
    }

    /// Runs until `max_events` jumps have been recorded or `t_cap` is reached.
    pub fn run_events(&mut self, max_events: usize, t_cap: f64) {
        while self.events.len() < max_events && self.advance(t_cap) {}
    }

    pub fn finish(self) -> Trajectory {
        Trajectory {
            initial: self.initial,
            t_end: self.state.t,
            events: self.events,
            clicks: self.clicks,
            detections: self
                .controller
                .map(|c| c.detections().to_vec())
                .unwrap_or_default(),
            pump_log: self.pump_log,
            injections: self.injections,
            truncations: self.truncations,
        }
    }
}

/// Simulates one trajectory from the vacuum with the pump on.
///
/// The jump process, the injection schedule and, when a controller is given,
/// its pump commands are merged into one time-ordered stream. Identical
/// arguments give identical output.
pub fn run_trajectory(
    params: &SimParams,
    schedule: &InjectionSchedule,
    t_end: f64,
    seed: u64,
    controller: Option<&ControllerConfig>,
) -> Result<Trajectory, Error> {
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::InvalidHorizon(t_end));
    }
    let injections = schedule.materialize(t_end, &mut stream(seed, Stream::Schedule))?;
    let mut sim = Simulation::new(params.clone(), seed, CavityState::vacuum())?
        .with_injections(injections)?;
    if let Some(config) = controller {
        sim = sim.with_controller(config.clone())?;
    }
    sim.run_until(t_end);
    Ok(sim.finish())
}
