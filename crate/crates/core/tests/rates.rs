use std::f64::consts::PI;

use micromaser::model::no_emission_probability;
use micromaser::oracle::{
    averaged_emission_probability, averaged_emission_quadrature, build_generator,
};
use micromaser::{build_rate_table, emission_probability, trapping_phase, SimParams};
use proptest::prelude::*;

fn params_strategy() -> impl Strategy<Value = SimParams> {
    (
        1.0..2000.0f64,
        0.5..200.0f64,
        0.0..2.0f64,
        0.1..6.0f64,
        0.0..0.5f64,
        1usize..40,
    )
        .prop_map(
            |(pump_rate, gamma, n_thermal, phi0, delta_phi, n_max)| SimParams {
                pump_rate,
                gamma,
                n_thermal,
                phi0,
                delta_phi,
                n_max,
                ..SimParams::default()
            },
        )
}

proptest! {
    #[test]
    fn branch_closure(n in 0usize..60, phi in -20.0..20.0f64) {
        let s = emission_probability(n, phi) + no_emission_probability(n, phi);
        prop_assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn table_rows_close_and_stay_nonnegative(p in params_strategy(), pump_on in any::<bool>()) {
        let table = build_rate_table(&p, p.phi0, pump_on);
        let r = if pump_on { p.pump_rate } else { 0.0 };
        for n in 0..=p.n_max {
            let row = table.at(n);
            prop_assert!(row.loss >= 0.0 && row.thermal >= 0.0);
            prop_assert!(row.atom_ground >= 0.0 && row.atom_excited >= 0.0);
            prop_assert!((row.atom() - r).abs() <= 1e-12 * r.max(1.0));
        }
        prop_assert_eq!(table.at(0).loss, 0.0);
        prop_assert_eq!(table.at(p.n_max).atom_ground, 0.0);
        for n in 1..=p.n_max {
            prop_assert!(table.at(n).loss > table.at(n - 1).loss);
        }
    }

    #[test]
    fn generator_rows_sum_to_zero(p in params_strategy(), pump_on in any::<bool>()) {
        let gen = build_generator(&p, pump_on);
        let scale = gen.max_row_sum().max(1.0);
        for i in 0..gen.dim() {
            let s: f64 = gen.q.row(i).iter().sum();
            prop_assert!(s.abs() < 1e-10 * scale, "row {} sums to {}", i, s);
        }
    }

    #[test]
    fn averaged_emission_matches_quadrature(n in 0usize..=20, phi0 in 2.0..4.5f64, dphi in 0.0..0.2f64) {
        let closed = averaged_emission_probability(n, phi0, dphi);
        let quad = averaged_emission_quadrature(n, phi0, dphi, 32);
        prop_assert!((closed - quad).abs() < 1e-10, "{} vs {}", closed, quad);
    }
}

#[test]
fn trapping_zeros() {
    for n in 0..=10 {
        for k in 1..=3 {
            let phi = trapping_phase(n, k).unwrap();
            assert!(emission_probability(n, phi) < 1e-12, "n={n} k={k}");
        }
    }
    assert!(trapping_phase(0, 0).is_err());
}

#[test]
fn single_photon_switches_emission() {
    assert!(emission_probability(0, PI) < 1e-12);
    assert!(emission_probability(3, PI) < 1e-12);
    let p1 = emission_probability(1, PI);
    assert!((0.925..=0.932).contains(&p1));
    // sin²(π√2) evaluated independently
    let reference = (PI * 2f64.sqrt()).sin().powi(2);
    assert!((p1 - reference).abs() < 1e-14);
}
