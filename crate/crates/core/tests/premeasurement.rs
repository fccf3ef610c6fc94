mod common;

use std::sync::Arc;

use common::*;
use nocollapse::premeasure::{premeasure_along, premeasure_computational};
use nocollapse::{AxisSpec, RegisterKind, RegisterLayout, StateVector};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;

/// Random state on `(S, E)` with fresh pointers `P1, P2` at `|0>`.
fn system_env_pointers(
    seed: u64,
    env_dim: usize,
    pointer_dim: usize,
) -> (StateVector, Vec<Complex64>) {
    let mut r = rng(seed);
    let small = Arc::new(
        RegisterLayout::new([
            ("S", 2, RegisterKind::System),
            ("E", env_dim, RegisterKind::System),
        ])
        .unwrap(),
    );
    let psi = random_state(&mut r, small);
    let layout = Arc::new(
        RegisterLayout::new([
            ("S", 2, RegisterKind::System),
            ("E", env_dim, RegisterKind::System),
            ("P1", pointer_dim, RegisterKind::Apparatus),
            ("P2", pointer_dim, RegisterKind::Brain),
        ])
        .unwrap(),
    );
    let block = pointer_dim * pointer_dim;
    let mut amps = vec![Complex64::new(0.0, 0.0); layout.total_dim()];
    for (i, a) in psi.amplitudes().iter().enumerate() {
        amps[i * block] = *a;
    }
    (
        StateVector::from_amplitudes(layout, amps).unwrap(),
        psi.amplitudes().to_vec(),
    )
}

/// `<psi| (|e_k><e_k| x I) |psi>` for `psi` on `(S, E)`.
fn born(psi: &[Complex64], env_dim: usize, e_k: [Complex64; 2]) -> f64 {
    (0..env_dim)
        .map(|e| (e_k[0].conj() * psi[e] + e_k[1].conj() * psi[env_dim + e]).norm_sqr())
        .sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn pointer_records_born_probabilities(
        seed in any::<u64>(),
        (theta, phi) in arb_angle_pair(),
        env_dim in 2usize..=3,
        pointer_dim in 2usize..=3,
    ) {
        let axis = AxisSpec::new(theta, phi).unwrap();
        let (state, psi) = system_env_pointers(seed, env_dim, pointer_dim);
        let (after, record) = premeasure_along(&state, "S", &axis, "P1", 7).unwrap();
        prop_assert_eq!(record.event_id, 7);
        prop_assert!((after.norm() - 1.0).abs() <= 1e-12);
        for (k, e_k) in [axis.plus_state(), axis.minus_state()].into_iter().enumerate() {
            let recorded = after.projector_weight([("P1", k)]).unwrap();
            prop_assert!((recorded - born(&psi, env_dim, e_k)).abs() <= 1e-12);
        }
        for k in 2..pointer_dim {
            prop_assert!(after.projector_weight([("P1", k)]).unwrap() <= 1e-12);
        }
    }

    #[test]
    fn second_pointer_agrees_with_first(
        seed in any::<u64>(),
        (theta, phi) in arb_angle_pair(),
        env_dim in 2usize..=3,
    ) {
        let axis = AxisSpec::new(theta, phi).unwrap();
        let (state, _) = system_env_pointers(seed, env_dim, 2);
        let (s, _) = premeasure_along(&state, "S", &axis, "P1", 0).unwrap();
        let (twice, _) = premeasure_along(&s, "S", &axis, "P2", 1).unwrap();
        let unequal = twice.projector_weight([("P1", 0), ("P2", 1)]).unwrap()
            + twice.projector_weight([("P1", 1), ("P2", 0)]).unwrap();
        prop_assert!(unequal <= 1e-12);

        // chaining through the computational basis agrees as well
        let (chained, _) = premeasure_computational(&s, "P1", "P2", 1).unwrap();
        for k in 0..2 {
            let same = chained.projector_weight([("P1", k), ("P2", k)]).unwrap();
            prop_assert!((same - s.projector_weight([("P1", k)]).unwrap()).abs() <= 1e-12);
        }
    }
}

#[test]
fn eigenstate_input_gives_one_branch() {
    let mut r = rng(5);
    for _ in 0..50 {
        let axis = AxisSpec::new(
            r.gen_range(0.0..=std::f64::consts::PI),
            r.gen_range(0.0..std::f64::consts::TAU),
        )
        .unwrap();
        let layout = Arc::new(
            RegisterLayout::new([
                ("S", 2, RegisterKind::System),
                ("P", 2, RegisterKind::Apparatus),
            ])
            .unwrap(),
        );
        let plus = axis.plus_state();
        let zero = Complex64::new(0.0, 0.0);
        let state =
            StateVector::from_amplitudes(layout, vec![plus[0], zero, plus[1], zero]).unwrap();
        let (after, _) = premeasure_along(&state, "S", &axis, "P", 0).unwrap();
        assert!((after.projector_weight([("P", 0)]).unwrap() - 1.0).abs() <= 1e-12);
        // the composite is still a product: the system is untouched
        assert!((after.fidelity(&state) - 1.0).abs() <= 1e-12);
    }
}
