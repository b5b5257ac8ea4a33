//! Quantum-trajectory simulation of a micromaser operated as a single
//! microwave photon detector.
//!
//! The cavity field is tracked as a photon number that jumps when a photon
//! decays, a thermal photon arrives, an atom exits, or an external photon is
//! injected. Detector clicks are derived from atom exits, and a threshold
//! controller turns a burst of ground-state clicks into a detection and resets
//! the cavity. [`oracle`] solves the same chain exactly and is the reference
//! for the stochastic engine.

pub mod detection;
pub mod error;
pub mod experiments;
pub mod model;
pub mod oracle;
pub mod rng;
pub mod trajectory;

pub use detection::{
    clicks_from_events, run_controller, windowed_rate, Channel, ClickRecord, ControllerConfig,
    DetectionEvent, Origin, ResetMode,
};
pub use error::{Error, ParamIssue};
pub use model::{
    build_rate_table, emission_probability, trapping_phase, CavityState, JumpKind, RateTable,
    SimParams, TwoAtomMode,
};
pub use trajectory::{run_trajectory, EventRecord, InjectionSchedule, Simulation, Trajectory};
