mod common;

use std::f64::consts::{FRAC_1_SQRT_2, PI, TAU};

use common::*;
use nalgebra::Matrix2;
use nocollapse::scenarios::{
    chsh_statistic_with, conviviality_violations_with, estimate_correlation,
    estimate_correlation_with, mixture_same_spin_probability_along, no_signaling_report,
    ChshSettings, ClassicalHiddenSign, CorrelationSource, HangingOn, Preparation,
};
use nocollapse::AxisSpec;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `n . sigma` from explicit Pauli matrices.
fn spin(axis: &AxisSpec) -> Matrix2<Complex64> {
    let (t, p) = (axis.theta(), axis.phi());
    let (nx, ny, nz) = (t.sin() * p.cos(), t.sin() * p.sin(), t.cos());
    Matrix2::new(c(nz, 0.0), c(nx, -ny), c(nx, ny), c(-nz, 0.0))
}

/// `<singlet| (a.sigma x b.sigma) |singlet>` with the singlet written out by hand.
fn singlet_expectation(a: &AxisSpec, b: &AxisSpec) -> f64 {
    let psi = [
        c(0.0, 0.0),
        c(FRAC_1_SQRT_2, 0.0),
        c(-FRAC_1_SQRT_2, 0.0),
        c(0.0, 0.0),
    ];
    let (sa, sb) = (spin(a), spin(b));
    let mut e = c(0.0, 0.0);
    for i in 0..4 {
        for j in 0..4 {
            e += psi[i].conj() * sa[(i / 2, j / 2)] * sb[(i % 2, j % 2)] * psi[j];
        }
    }
    e.re
}

fn random_axis_pair(seed: u64) -> (AxisSpec, AxisSpec) {
    let mut r = rng(seed);
    let mut axis = || AxisSpec::new(r.gen_range(0.0..=PI), r.gen_range(0.0..TAU)).unwrap();
    (axis(), axis())
}

#[test]
fn hanging_on_correlation_matches_the_singlet_expectation() {
    const N: u64 = 100_000;
    for k in 0..4 {
        let (a, b) = random_axis_pair(40 + k);
        let expected = singlet_expectation(&a, &b);
        assert!((expected + a.unit_vector().dot(&b.unit_vector())).abs() < 1e-12);
        let est = estimate_correlation(&a, &b, N, 9 + k).unwrap();
        let sigma = ((1.0 - expected * expected) / N as f64)
            .sqrt()
            .max(1.0 / N as f64);
        assert!(
            (est.value - expected).abs() <= 4.0 * sigma,
            "E = {} vs {} (4 sigma = {})",
            est.value,
            expected,
            4.0 * sigma
        );
    }
}

#[test]
fn same_axis_gives_exact_anticorrelation() {
    for k in 0..5 {
        let (a, _) = random_axis_pair(k);
        assert_eq!(estimate_correlation(&a, &a, 5_000, k).unwrap().value, -1.0);
    }
}

/// The hidden-sign model obeys a linear law in the angle between the settings.
#[test]
fn classical_correlation_is_linear_in_angle() {
    const N: u64 = 200_000;
    for theta in [0.0, PI / 4.0, PI / 2.0, 2.0, PI] {
        let a = AxisSpec::z();
        let b = AxisSpec::planar(theta).unwrap();
        let expected = -1.0 + 2.0 * theta / PI;
        let est = estimate_correlation_with(&ClassicalHiddenSign, &a, &b, N, 3).unwrap();
        let sigma = ((1.0 - expected * expected) / N as f64).sqrt();
        assert!((est.value - expected).abs() <= 4.0 * sigma + 1e-12);
    }
}

#[test]
fn chsh_at_canonical_angles_exceeds_two() {
    let res = chsh_statistic_with(&HangingOn, &ChshSettings::default(), 100_000, 1).unwrap();
    assert!((res.s.abs() - 2.0 * 2f64.sqrt()).abs() <= 4.0 * res.standard_error);
    assert!(res.s.abs() > 2.0 + 4.0 * res.standard_error);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    /// On a shared hidden draw every local strategy scores `+-2` per trial.
    #[test]
    fn local_strategies_never_exceed_two(seed in any::<u64>(), axes in any::<u64>()) {
        let mut r = rng(axes);
        let mut axis = || AxisSpec::new(r.gen_range(0.0..=PI), r.gen_range(0.0..TAU)).unwrap();
        let (a, a2, b, b2) = (axis(), axis(), axis(), axis());
        let mut sum = 0i64;
        const N: u64 = 200;
        for t in 0..N {
            let ts = seed.wrapping_add(t);
            let s = |x: &AxisSpec, y: &AxisSpec| {
                let (p, q) = ClassicalHiddenSign.signs(x, y, ts).unwrap();
                i64::from(p * q)
            };
            let per_trial = s(&a, &b) - s(&a, &b2) + s(&a2, &b) + s(&a2, &b2);
            prop_assert!(per_trial.abs() == 2);
            sum += per_trial;
        }
        prop_assert!((sum as f64 / N as f64).abs() <= 2.0);
    }

    /// Any deterministic local response table with any weights stays within the bound.
    #[test]
    fn response_tables_obey_the_bound(
        table in prop::collection::vec((any::<bool>(), any::<bool>(), any::<bool>(), any::<bool>(), 1u32..100), 1..12)
    ) {
        let sign = |b: bool| if b { 1.0 } else { -1.0 };
        let total: f64 = table.iter().map(|e| f64::from(e.4)).sum();
        let e = |x: usize, y: usize| -> f64 {
            table
                .iter()
                .map(|&(a0, a1, b0, b1, w)| {
                    let alice = if x == 0 { sign(a0) } else { sign(a1) };
                    let bob = if y == 0 { sign(b0) } else { sign(b1) };
                    f64::from(w) * alice * bob
                })
                .sum::<f64>()
                / total
        };
        let s = e(0, 0) - e(0, 1) + e(1, 0) + e(1, 1);
        prop_assert!(s.abs() <= 2.0 + 1e-12);
    }

    #[test]
    fn bob_marginal_ignores_alice((ta, pa) in arb_angle_pair(), (ta2, pa2) in arb_angle_pair(), (tb, pb) in arb_angle_pair()) {
        let rep = no_signaling_report(
            &AxisSpec::new(ta, pa).unwrap(),
            &AxisSpec::new(ta2, pa2).unwrap(),
            &AxisSpec::new(tb, pb).unwrap(),
        )
        .unwrap();
        prop_assert!(rep.deviation < 1e-12);
        for m in rep.marginals {
            prop_assert!((m[0] - 0.5).abs() < 1e-12);
        }
    }
}

#[test]
fn mixture_and_singlet_differ_off_axis() {
    // both "+" along x: 1/4 for the z-mixture, 0 for the singlet
    let r = mixture_same_spin_probability_along(&AxisSpec::x(), 100_000, 5).unwrap();
    let sigma = (0.25f64 * 0.75 / 1e5).sqrt();
    assert!((r.mixture - 0.25).abs() <= 4.0 * sigma);
    assert_eq!(r.singlet, 0.0);
    // along z both preparations are perfectly anticorrelated
    let z = mixture_same_spin_probability_along(&AxisSpec::z(), 20_000, 5).unwrap();
    assert_eq!((z.mixture, z.singlet), (0.0, 0.0));
}

#[test]
fn communication_is_convivial_for_both_preparations() {
    for prep in [Preparation::Singlet, Preparation::Mixture] {
        assert_eq!(conviviality_violations_with(prep, 20_000, 11).unwrap(), 0);
    }
}
