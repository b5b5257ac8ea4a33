use std::f64::consts::PI;

use micromaser::rng::{stream, Stream};
use micromaser::trajectory::{apply_two_atom_scramble, sample_phase, step, StepOutcome};
use micromaser::{
    run_trajectory, CavityState, InjectionSchedule, JumpKind, SimParams, Simulation, TwoAtomMode,
};

#[test]
fn trapped_vacuum_emits_nothing() {
    let params = SimParams::default();
    for seed in 0..100 {
        let traj = run_trajectory(&params, &InjectionSchedule::None, 10.0, seed, None).unwrap();
        assert_eq!(traj.count(JumpKind::AtomGround), 0, "seed {seed}");
        assert!(traj.count(JumpKind::AtomExcited) > 800);
    }
}

// Kolmogorov distribution tail, P(sqrt(n) D > x)
fn kolmogorov_p(x: f64) -> f64 {
    (1..100)
        .map(|k| {
            let k = k as f64;
            2.0 * (-1f64).powf(k - 1.0) * (-2.0 * k * k * x * x).exp()
        })
        .sum()
}

#[test]
fn loss_waits_are_exponential() {
    let params = SimParams {
        gamma: 20.0,
        n_thermal: 0.0,
        ..SimParams::default()
    };
    let start = CavityState {
        n: 5,
        t: 0.0,
        pump_on: false,
    };
    let mut rng = stream(11, Stream::Physics);
    let mut waits: Vec<f64> = (0..10_000)
        .map(|_| match step(&start, &params, None, &mut rng) {
            StepOutcome::Jump(rec, next) => {
                assert_eq!(rec.kind, JumpKind::PhotonLoss);
                assert_eq!(next.n, 4);
                rec.t
            }
            StepOutcome::Quiescent => panic!("loss rate is positive"),
        })
        .collect();
    waits.sort_by(f64::total_cmp);
    let rate = 5.0 * params.gamma;
    let m = waits.len() as f64;
    let d = waits
        .iter()
        .enumerate()
        .map(|(i, &w)| {
            let f = 1.0 - (-rate * w).exp();
            (f - i as f64 / m).abs().max(((i + 1) as f64 / m - f).abs())
        })
        .fold(0.0, f64::max);
    assert!(kolmogorov_p(m.sqrt() * d) > 0.01, "D = {d}");
}

#[test]
fn excited_atoms_form_poisson_stream() {
    let params = SimParams {
        pump_rate: 100.0,
        ..SimParams::default()
    };
    let traj = run_trajectory(&params, &InjectionSchedule::None, 2000.0, 5, None).unwrap();
    let mut counts = vec![0.0f64; 2000];
    for e in traj
        .events
        .iter()
        .filter(|e| e.kind == JumpKind::AtomExcited)
    {
        counts[(e.t as usize).min(1999)] += 1.0;
    }
    let m = counts.len() as f64;
    let mean = counts.iter().sum::<f64>() / m;
    let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (m - 1.0);
    let index = var / mean;
    let se = (2.0 / (m - 1.0)).sqrt();
    assert!((index - 1.0).abs() < 3.0 * se, "dispersion index {index}");
    assert!((mean - 100.0).abs() < 3.0 * (100.0 / m).sqrt() * 1.5);
}

#[test]
fn phase_draws_follow_requested_spread() {
    let params = SimParams {
        delta_phi: 0.05,
        ..SimParams::default()
    };
    let mut rng = stream(3, Stream::Physics);
    let draws: Vec<f64> = (0..100_000)
        .map(|_| sample_phase(&params, &mut rng))
        .collect();
    let m = draws.len() as f64;
    let mean = draws.iter().sum::<f64>() / m;
    let sd = (draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0)).sqrt();
    assert!((mean - PI).abs() < 4.0 * 0.05 / m.sqrt());
    assert!((sd - 0.05).abs() < 0.05 * 0.01);
    let exact = SimParams::default();
    assert_eq!(sample_phase(&exact, &mut rng), PI);
}

#[test]
fn scramble_increments_are_uniform() {
    let mut rng = stream(4, Stream::Physics);
    let state = CavityState {
        n: 2,
        t: 0.0,
        pump_on: true,
    };
    let mut hist = [0.0f64; 3];
    for _ in 0..30_000 {
        let (after, ground, capped) = apply_two_atom_scramble(&state, 20, &mut rng);
        assert!(!capped);
        assert_eq!(after.n - state.n, ground as usize);
        hist[ground as usize] += 1.0;
    }
    let chi2: f64 = hist.iter().map(|o| (o - 10_000.0).powi(2) / 10_000.0).sum();
    // chi-square with 2 dof, 0.1% critical value
    assert!(chi2 < 13.82, "chi2 {chi2}");
    let top = CavityState {
        n: 19,
        t: 0.0,
        pump_on: true,
    };
    for _ in 0..100 {
        let (after, _, _) = apply_two_atom_scramble(&top, 20, &mut rng);
        assert!(after.n <= 20);
    }
}

#[test]
fn identical_seeds_give_identical_streams() {
    let params = SimParams {
        delta_phi: 0.1,
        n_thermal: 0.2,
        two_atom_mode: TwoAtomMode::Phenomenological,
        background_rate: 3.0,
        eta_g: 0.7,
        ..SimParams::default()
    };
    let schedule = InjectionSchedule::Poisson {
        rate: 2.0,
        start: 0.0,
    };
    let a = run_trajectory(&params, &schedule, 20.0, 99, None).unwrap();
    let b = run_trajectory(&params, &schedule, 20.0, 99, None).unwrap();
    assert_eq!(a.events, b.events);
    assert_eq!(a.clicks, b.clicks);
    let c = run_trajectory(&params, &schedule, 20.0, 100, None).unwrap();
    assert_ne!(a.events, c.events);
}

#[test]
fn photon_number_stays_in_range() {
    let params = SimParams {
        pump_rate: 2000.0,
        phi0: 0.3,
        n_max: 8,
        n_thermal: 1.0,
        two_atom_mode: TwoAtomMode::Phenomenological,
        ..SimParams::default()
    };
    let mut sim = Simulation::new(params.clone(), 8, CavityState::vacuum()).unwrap();
    sim.run_events(50_000, f64::INFINITY);
    let traj = sim.finish();
    let mut n = 0usize;
    for e in &traj.events {
        assert!(e.n_after <= params.n_max);
        let delta = e.n_after as i64 - n as i64;
        match e.kind {
            JumpKind::PhotonLoss => assert_eq!(delta, -1),
            JumpKind::ThermalGain | JumpKind::AtomGround | JumpKind::Injection => {
                assert_eq!(delta, 1)
            }
            JumpKind::AtomExcited => assert_eq!(delta, 0),
            JumpKind::TwoAtomScramble => assert!((0..=2).contains(&delta)),
            JumpKind::CleanPulse => assert_eq!(e.n_after, 0),
        }
        n = e.n_after;
    }
    assert!(traj.truncations > 0);
}
