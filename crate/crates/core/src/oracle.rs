//! Exact reference solutions on the truncated photon-number chain.
//!
//! The jump process is a birth-death chain, so its generator is a tridiagonal
//! rate matrix. Steady states come from a dense linear solve, metastable
//! (quasi-stationary) states from shifted power iteration on the generator
//! restricted to the surviving states, and sweeps from uniformized transient
//! solves.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::model::{emission_probability, SimParams};

/// Tolerance on `max |pi Q|` for an accepted stationary solve.
pub const RESIDUAL_TOL: f64 = 1e-9;

/// Iteration cap of the quasi-stationary eigensolve.
pub const QSD_MAX_ITER: usize = 2_000_000;

/// Mean emission probability `E[sin^2(phi sqrt(n+1))]` for a Gaussian phase
/// `phi ~ N(phi0, delta_phi^2)`:
/// `(1 - cos(2 phi0 sqrt(n+1)) exp(-2 delta_phi^2 (n+1))) / 2`.
pub fn averaged_emission_probability(n: usize, phi0: f64, delta_phi: f64) -> f64 {
    if delta_phi == 0.0 {
        return emission_probability(n, phi0);
    }
    let a2 = (n + 1) as f64;
    let c = 1.0 - 2.0 * emission_probability(n, phi0);
    0.5 * (1.0 - c * (-2.0 * delta_phi * delta_phi * a2).exp())
}

/// Gauss-Hermite nodes and weights for weight `exp(-x^2)`, by the
/// Golub-Welsch eigenvalue method.
pub fn gauss_hermite(order: usize) -> (Vec<f64>, Vec<f64>) {
    let mut jacobi = DMatrix::<f64>::zeros(order, order);
    for k in 1..order {
        let b = (k as f64 / 2.0).sqrt();
        jacobi[(k - 1, k)] = b;
        jacobi[(k, k - 1)] = b;
    }
    let eig = SymmetricEigen::new(jacobi);
    let sqrt_pi = std::f64::consts::PI.sqrt();
    let mut pairs: Vec<(f64, f64)> = (0..order)
        .map(|i| {
            (
                eig.eigenvalues[i],
                sqrt_pi * eig.eigenvectors[(0, i)].powi(2),
            )
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

/// The same average as [`averaged_emission_probability`], by quadrature.
pub fn averaged_emission_quadrature(n: usize, phi0: f64, delta_phi: f64, order: usize) -> f64 {
    let (x, w) = gauss_hermite(order);
    let sqrt_pi = std::f64::consts::PI.sqrt();
    x.iter()
        .zip(&w)
        .map(|(&xi, &wi)| {
            wi / sqrt_pi * emission_probability(n, phi0 + std::f64::consts::SQRT_2 * delta_phi * xi)
        })
        .sum()
}

/// Rate matrix of the photon-number chain together with the per-state atom
/// exit rates needed to turn occupations into click rates.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorMatrix {
    pub q: DMatrix<f64>,
    /// Rate of atoms leaving in the ground state from each `n`.
    pub ground_rate: Vec<f64>,
    /// Rate of atoms leaving in the excited state from each `n`.
    pub excited_rate: Vec<f64>,
    pub eta_g: f64,
    pub eta_e: f64,
    pub background_rate: f64,
}

impl GeneratorMatrix {
    pub fn dim(&self) -> usize {
        self.q.nrows()
    }

    pub fn up_rate(&self, n: usize) -> f64 {
        if n + 1 < self.dim() {
            self.q[(n, n + 1)]
        } else {
            0.0
        }
    }

    pub fn down_rate(&self, n: usize) -> f64 {
        if n > 0 {
            self.q[(n, n - 1)]
        } else {
            0.0
        }
    }

    /// Largest absolute row sum deviation from zero.
    pub fn max_row_sum(&self) -> f64 {
        self.q.row_iter().map(|r| r.sum().abs()).fold(0.0, f64::max)
    }

    /// Expected ground and excited click rates for an occupation vector.
    pub fn click_rates(&self, p: &[f64]) -> (f64, f64) {
        let ground: f64 = p.iter().zip(&self.ground_rate).map(|(a, b)| a * b).sum();
        let excited: f64 = p.iter().zip(&self.excited_rate).map(|(a, b)| a * b).sum();
        (
            self.eta_g * ground + self.background_rate,
            self.eta_e * excited,
        )
    }

    /// Rate of ground-state atoms (before detection) for an occupation.
    pub fn ground_atom_rate(&self, p: &[f64]) -> f64 {
        p.iter().zip(&self.ground_rate).map(|(a, b)| a * b).sum()
    }

    /// Closed communicating classes, each sorted, in order of lowest state.
    pub fn closed_classes(&self) -> Vec<Vec<usize>> {
        let d = self.dim();
        let mut reach = vec![vec![false; d]; d];
        for (i, row) in reach.iter_mut().enumerate() {
            row[i] = true;
            for (j, cell) in row.iter_mut().enumerate() {
                if i != j && self.q[(i, j)] > 0.0 {
                    *cell = true;
                }
            }
        }
        for k in 0..d {
            for i in 0..d {
                if reach[i][k] {
                    let via = reach[k].clone();
                    for (cell, v) in reach[i].iter_mut().zip(via) {
                        *cell |= v;
                    }
                }
            }
        }
        let mut seen = vec![false; d];
        let mut out = Vec::new();
        for i in 0..d {
            if seen[i] {
                continue;
            }
            let class: Vec<usize> = (0..d).filter(|&j| reach[i][j] && reach[j][i]).collect();
            for &j in &class {
                seen[j] = true;
            }
            let closed = class
                .iter()
                .all(|&a| (0..d).all(|b| !reach[a][b] || class.contains(&b)));
            if closed {
                out.push(class);
            }
        }
        out
    }
}

/// Up rates `R pbar(n) + gamma n_t (n+1)`, down rates `gamma (n_t+1) n`, no
/// up rate out of `n_max`. `pbar` is the phase-averaged emission probability.
pub fn build_generator(params: &SimParams, pump_on: bool) -> GeneratorMatrix {
    let d = params.n_max + 1;
    let r = if pump_on { params.pump_rate } else { 0.0 };
    let mut q = DMatrix::<f64>::zeros(d, d);
    let mut ground_rate = vec![0.0; d];
    let mut excited_rate = vec![r; d];
    for n in 0..d {
        if n + 1 < d {
            let g = r * averaged_emission_probability(n, params.phi0, params.delta_phi);
            ground_rate[n] = g;
            excited_rate[n] = r - g;
            q[(n, n + 1)] = g + params.gamma * params.n_thermal * (n + 1) as f64;
        }
        if n > 0 {
            q[(n, n - 1)] = params.gamma * (params.n_thermal + 1.0) * n as f64;
        }
        let out: f64 = (0..d).filter(|&j| j != n).map(|j| q[(n, j)]).sum();
        q[(n, n)] = -out;
    }
    GeneratorMatrix {
        q,
        ground_rate,
        excited_rate,
        eta_g: params.eta_g,
        eta_e: params.eta_e,
        background_rate: params.background_rate,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationaryResult {
    pub probabilities: Vec<f64>,
    pub ground_click_rate: f64,
    pub excited_click_rate: f64,
    /// Magnitude of the slowest non-zero relaxation rate on the support.
    pub dominance_gap: Option<f64>,
}

impl StationaryResult {
    fn from_distribution(gen: &GeneratorMatrix, p: Vec<f64>, gap: Option<f64>) -> Self {
        let (ground, excited) = gen.click_rates(&p);
        StationaryResult {
            probabilities: p,
            ground_click_rate: ground,
            excited_click_rate: excited,
            dominance_gap: gap,
        }
    }

    pub fn mean_photon_number(&self) -> f64 {
        self.probabilities
            .iter()
            .enumerate()
            .map(|(n, p)| n as f64 * p)
            .sum()
    }
}

fn restrict(q: &DMatrix<f64>, states: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(states.len(), states.len(), |i, j| q[(states[i], states[j])])
}

// Relaxation spectrum of a tridiagonal generator block via the symmetrized
// form; valid because birth-death blocks are reversible.
fn tridiagonal_spectrum(sub: &DMatrix<f64>) -> Option<Vec<f64>> {
    let m = sub.nrows();
    let mut sym = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        sym[(i, i)] = sub[(i, i)];
        if i + 1 < m {
            let s = (sub[(i, i + 1)] * sub[(i + 1, i)]).sqrt();
            sym[(i, i + 1)] = s;
            sym[(i + 1, i)] = s;
        }
        for j in i + 2..m {
            if sub[(i, j)] != 0.0 || sub[(j, i)] != 0.0 {
                return None;
            }
        }
    }
    let mut ev: Vec<f64> = SymmetricEigen::new(sym)
        .eigenvalues
        .iter()
        .copied()
        .collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    Some(ev)
}

/// Stationary distribution on the unique closed class of the chain.
pub fn steady_state(gen: &GeneratorMatrix) -> Result<StationaryResult, Error> {
    let classes = gen.closed_classes();
    if classes.len() != 1 {
        return Err(Error::ReducibleChain(classes));
    }
    steady_state_on(gen, &classes[0])
}

/// Stationary distribution supported on a declared closed class.
pub fn steady_state_on(
    gen: &GeneratorMatrix,
    support: &[usize],
) -> Result<StationaryResult, Error> {
    if !gen.closed_classes().iter().any(|c| c == support) {
        return Err(Error::InvalidSupport(support.to_vec()));
    }
    let m = support.len();
    let sub = restrict(&gen.q, support);
    // pi Q = 0 with the last balance equation replaced by normalization
    let mut a = sub.transpose();
    for j in 0..m {
        a[(m - 1, j)] = 1.0;
    }
    let mut b = DVector::<f64>::zeros(m);
    b[m - 1] = 1.0;
    let x = a
        .lu()
        .solve(&b)
        .ok_or_else(|| Error::Singular("stationary balance".into()))?;
    let mut p = vec![0.0; gen.dim()];
    for (k, &s) in support.iter().enumerate() {
        p[s] = x[k].max(0.0);
    }
    let total: f64 = p.iter().sum();
    p.iter_mut().for_each(|v| *v /= total);
    let residual = stationary_residual(gen, &p);
    if residual >= RESIDUAL_TOL {
        return Err(Error::Residual(residual));
    }
    let gap = tridiagonal_spectrum(&sub).and_then(|ev| ev.get(1).map(|l| l.abs()));
    Ok(StationaryResult::from_distribution(gen, p, gap))
}

/// `max_j |(p Q)_j|`.
pub fn stationary_residual(gen: &GeneratorMatrix, p: &[f64]) -> f64 {
    let pv = DVector::from_column_slice(p);
    (gen.q.transpose() * pv).amax()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuasiStationary {
    pub result: StationaryResult,
    /// Rate at which probability leaks into the excluded set, 1/s.
    pub decay_rate: f64,
    pub iterations: usize,
}

/// Quasi-stationary distribution conditioned on never entering `excluded`:
/// the leading left eigenvector of the generator restricted to the other
/// states, found by power iteration on `I + S / c`.
pub fn quasi_stationary(
    gen: &GeneratorMatrix,
    excluded: &[usize],
) -> Result<QuasiStationary, Error> {
    let kept: Vec<usize> = (0..gen.dim()).filter(|s| !excluded.contains(s)).collect();
    if kept.is_empty() || kept.len() == gen.dim() {
        return Err(Error::InvalidExclusion);
    }
    let sub = restrict(&gen.q, &kept);
    let m = kept.len();
    let max_diag = (0..m).map(|i| sub[(i, i)].abs()).fold(0.0, f64::max);
    let shift = if max_diag > 0.0 { 1.05 * max_diag } else { 1.0 };
    let step = DMatrix::<f64>::identity(m, m) + &sub / shift;
    let step_t = step.transpose();
    let mut v = DVector::<f64>::from_element(m, 1.0 / m as f64);
    let mut iterations = 0;
    let mut growth;
    loop {
        iterations += 1;
        let next = &step_t * &v;
        growth = next.sum();
        let next = next / growth;
        let delta = (&next - &v).abs().sum();
        v = next;
        if delta < 1e-15 {
            break;
        }
        if iterations >= QSD_MAX_ITER {
            return Err(Error::NoConvergence(iterations));
        }
    }
    let mut p = vec![0.0; gen.dim()];
    for (k, &s) in kept.iter().enumerate() {
        p[s] = v[k].max(0.0);
    }
    let decay_rate = shift * (1.0 - growth);
    Ok(QuasiStationary {
        result: StationaryResult::from_distribution(gen, p, None),
        decay_rate,
        iterations,
    })
}

/// Evolves an occupation vector for `duration` under the generator by
/// uniformization.
pub fn transient(gen: &GeneratorMatrix, p0: &[f64], duration: f64) -> Vec<f64> {
    let d = gen.dim();
    let lambda = (0..d).map(|i| gen.q[(i, i)].abs()).fold(0.0, f64::max);
    let mut p = DVector::from_column_slice(p0);
    if lambda == 0.0 || duration <= 0.0 {
        return p.iter().copied().collect();
    }
    let jump_t = (DMatrix::<f64>::identity(d, d) + &gen.q / lambda).transpose();
    // keep each chunk's Poisson mean small enough that exp(-mean) is benign
    let chunks = (lambda * duration / 10.0).ceil().max(1.0) as usize;
    let mean = lambda * duration / chunks as f64;
    for _ in 0..chunks {
        let mut term = p.clone();
        let mut weight = (-mean).exp();
        let mut acc = &term * weight;
        let mut mass = weight;
        let mut k = 0usize;
        while 1.0 - mass > 1e-16 && k < 1000 {
            k += 1;
            term = &jump_t * &term;
            weight *= mean / k as f64;
            acc += &term * weight;
            mass += weight;
        }
        p = acc;
    }
    p.iter().map(|v| v.max(0.0)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchPoint {
    pub pump_rate: f64,
    /// Ground-state atom rate leaving the cavity, 1/s.
    pub output_rate: f64,
    pub mean_photons: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HysteresisBranches {
    /// Ascending in pump rate.
    pub up: Vec<BranchPoint>,
    /// Descending in pump rate.
    pub down: Vec<BranchPoint>,
    /// Occupation at the end of the sweep.
    pub final_distribution: Vec<f64>,
}

impl HysteresisBranches {
    /// Pump rates at which the down branch exceeds the up branch by more than
    /// `tol`, ascending.
    pub fn bistable_window(&self, tol: f64) -> Vec<f64> {
        let mut out: Vec<f64> = self
            .down
            .iter()
            .filter_map(|d| {
                let u = self.up.iter().find(|u| u.pump_rate == d.pump_rate)?;
                (d.output_rate - u.output_rate > tol).then_some(d.pump_rate)
            })
            .collect();
        out.sort_by(f64::total_cmp);
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepOptions {
    /// Time spent at each pump rate, s. Defaults to `10 / gamma`.
    pub dwell: Option<f64>,
    /// Add one photon at the top of the sweep before coming down.
    pub inject_at_top: bool,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            dwell: None,
            inject_at_top: true,
        }
    }
}

/// Quasi-static pump sweep starting from the vacuum. At each pump rate the
/// occupation evolves for the dwell time from where the previous point left
/// it. The up sweep visits `pump_rates` in order, then (after the optional
/// trigger photon) the down sweep visits them in reverse.
pub fn hysteresis_sweep(
    params: &SimParams,
    pump_rates: &[f64],
    options: SweepOptions,
) -> Result<HysteresisBranches, Error> {
    params.validate()?;
    if pump_rates.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
        return Err(Error::InvalidParams(vec![crate::error::ParamIssue::new(
            "pump_rates",
            "sweep pump rates must be positive",
        )]));
    }
    let dwell = options.dwell.unwrap_or(10.0 / params.gamma);
    let mut p = vec![0.0; params.n_max + 1];
    p[0] = 1.0;
    let visit = |r: f64, p: &mut Vec<f64>| {
        let gen = build_generator(
            &SimParams {
                pump_rate: r,
                ..params.clone()
            },
            true,
        );
        *p = transient(&gen, p, dwell);
        BranchPoint {
            pump_rate: r,
            output_rate: gen.ground_atom_rate(p),
            mean_photons: p.iter().enumerate().map(|(n, v)| n as f64 * v).sum(),
        }
    };
    let up: Vec<BranchPoint> = pump_rates.iter().map(|&r| visit(r, &mut p)).collect();
    if options.inject_at_top {
        let top = p.len() - 1;
        let mut shifted = vec![0.0; p.len()];
        for (n, v) in p.iter().enumerate() {
            shifted[(n + 1).min(top)] += v;
        }
        p = shifted;
    }
    let down: Vec<BranchPoint> = pump_rates.iter().rev().map(|&r| visit(r, &mut p)).collect();
    Ok(HysteresisBranches {
        up,
        down,
        final_distribution: p,
    })
}

/// `P(N >= k)` for `N ~ Poisson(mean)`.
pub fn poisson_tail(mean: f64, k: u64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let mut term = (-mean).exp();
    let mut below = term;
    for j in 1..k {
        term *= mean / j as f64;
        below += term;
    }
    (1.0 - below).max(0.0)
}

/// Smallest click count whose windowed rate reaches `threshold`.
pub fn trigger_count(threshold: f64, window: f64) -> u64 {
    (threshold * window - 1e-9).ceil().max(0.0) as u64
}

/// Probability that a disjoint window of background-only clicks reaches the
/// threshold.
pub fn window_false_trigger_probability(background: f64, window: f64, threshold: f64) -> f64 {
    poisson_tail(background * window, trigger_count(threshold, window))
}

/// Rate of background clicks at which a trailing-window trigger evaluated on
/// each click fires: each click needs `k - 1` predecessors in the window.
pub fn sliding_false_trigger_rate(background: f64, window: f64, threshold: f64) -> f64 {
    let k = trigger_count(threshold, window);
    background * poisson_tail(background * window, k.saturating_sub(1))
}

/// Probability that a field just raised from vacuum to one photon produces a
/// ground-state atom before it returns to vacuum. Excited exits do not
/// change the state and drop out.
pub fn first_emission_probability(params: &SimParams) -> Result<f64, Error> {
    let d = params.n_max;
    // unknowns h(1..=n_max); h(0) = 0
    let mut a = DMatrix::<f64>::zeros(d, d);
    let mut b = DVector::<f64>::zeros(d);
    for n in 1..=d {
        let i = n - 1;
        let emit = if n < d {
            params.pump_rate * averaged_emission_probability(n, params.phi0, params.delta_phi)
        } else {
            0.0
        };
        let gain = if n < d {
            params.gamma * params.n_thermal * (n + 1) as f64
        } else {
            0.0
        };
        let loss = params.gamma * (params.n_thermal + 1.0) * n as f64;
        a[(i, i)] = emit + gain + loss;
        b[i] = emit;
        if n < d {
            a[(i, i + 1)] = -gain;
        }
        if n > 1 {
            a[(i, i - 1)] = -loss;
        }
    }
    let h = a
        .lu()
        .solve(&b)
        .ok_or_else(|| Error::Singular("first-emission system".into()))?;
    Ok(h[0])
}

/// Total-variation distance between two distributions.
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn fig3() -> SimParams {
        SimParams {
            pump_rate: 100.0,
            gamma: 20.0,
            ..SimParams::default()
        }
    }

    #[test]
    fn averaged_emission_examples() {
        assert_eq!(averaged_emission_probability(0, PI, 0.0), 0.0);
        let expected = 0.5 * (1.0 - (-2.0 * (0.005 * PI).powi(2)).exp());
        assert!((averaged_emission_probability(0, PI, 0.005 * PI) - expected).abs() < 1e-15);
        assert!((expected - 2.466e-4).abs() < 1e-6);
        let p1 = averaged_emission_probability(1, PI, 0.0);
        assert!((p1 - 0.929_108).abs() < 1e-6);
    }

    #[test]
    fn hermite_rule_integrates_polynomials() {
        let (x, w) = gauss_hermite(32);
        let sqrt_pi = PI.sqrt();
        assert!((w.iter().sum::<f64>() - sqrt_pi).abs() < 1e-12);
        let m2: f64 = x.iter().zip(&w).map(|(x, w)| w * x * x).sum();
        assert!((m2 - sqrt_pi / 2.0).abs() < 1e-12);
    }

    #[test]
    fn fig3_generator_rates() {
        let gen = build_generator(&fig3(), true);
        assert_eq!(gen.up_rate(0), 0.0);
        assert!((gen.up_rate(1) - 92.911).abs() < 1e-3);
        assert!((gen.up_rate(2) - 55.627).abs() < 1e-3);
        assert_eq!(gen.up_rate(3), 0.0);
        assert!(gen.max_row_sum() < 1e-10);
    }

    #[test]
    fn pump_off_is_pure_death() {
        let gen = build_generator(&fig3(), false);
        for i in 0..gen.dim() {
            for j in 0..gen.dim() {
                if j > i {
                    assert_eq!(gen.q[(i, j)], 0.0);
                }
            }
        }
        let ss = steady_state(&gen).unwrap();
        assert_eq!(ss.probabilities[0], 1.0);
        assert_eq!(ss.ground_click_rate, 0.0);
    }

    #[test]
    fn exact_trap_absorbs_at_vacuum() {
        let params = SimParams {
            background_rate: 3.0,
            ..fig3()
        };
        let ss = steady_state(&build_generator(&params, true)).unwrap();
        assert_eq!(ss.probabilities[0], 1.0);
        assert_eq!(ss.ground_click_rate, 3.0);
    }

    #[test]
    fn reducible_chain_names_classes() {
        // n_max = 4 with the top state made absorbing: {0} and {4} both closed
        let mut gen = build_generator(&SimParams { n_max: 4, ..fig3() }, true);
        gen.q[(4, 3)] = 0.0;
        gen.q[(4, 4)] = 0.0;
        match steady_state(&gen) {
            Err(Error::ReducibleChain(classes)) => assert_eq!(classes, vec![vec![0], vec![4]]),
            other => panic!("unexpected {other:?}"),
        }
        let on_top = steady_state_on(&gen, &[4]).unwrap();
        assert_eq!(on_top.probabilities[4], 1.0);
        assert!(steady_state_on(&gen, &[1, 2]).is_err());
    }

    #[test]
    fn qsd_single_state_and_pure_decay() {
        let gen = build_generator(&fig3(), true);
        let all_but_two: Vec<usize> = (0..gen.dim()).filter(|&s| s != 2).collect();
        let q = quasi_stationary(&gen, &all_but_two).unwrap();
        assert_eq!(q.result.probabilities[2], 1.0);

        let off = build_generator(&fig3(), false);
        let q = quasi_stationary(&off, &[0]).unwrap();
        assert!((q.result.probabilities[1] - 1.0).abs() < 1e-9);
        assert!((q.decay_rate - 20.0).abs() < 1e-6);
        assert!(quasi_stationary(&off, &[]).is_err());
    }

    #[test]
    fn transient_conserves_probability_and_relaxes() {
        let gen = build_generator(
            &SimParams {
                delta_phi: 0.1,
                n_thermal: 0.1,
                ..fig3()
            },
            true,
        );
        let mut p0 = vec![0.0; gen.dim()];
        p0[1] = 1.0;
        let p = transient(&gen, &p0, 50.0);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        let ss = steady_state(&gen).unwrap();
        assert!(total_variation(&p, &ss.probabilities) < 1e-6);
    }

    #[test]
    fn poisson_tail_values() {
        let p = window_false_trigger_probability(2.0, 0.25, 10.0);
        assert!((p - 0.014_387).abs() < 1e-5);
        assert_eq!(trigger_count(20.0, 0.25), 5);
        assert_eq!(trigger_count(10.0, 0.25), 3);
        assert_eq!(poisson_tail(1.3, 0), 1.0);
    }

    #[test]
    fn first_emission_matches_two_way_race() {
        let p = first_emission_probability(&fig3()).unwrap();
        let up = 100.0 * emission_probability(1, PI);
        assert!((p - up / (up + 20.0)).abs() < 1e-12);
    }
}
