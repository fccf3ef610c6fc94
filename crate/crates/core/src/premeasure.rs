//! Entangling interactions that copy a system's measurement eigenbasis into a
//! pointer register, unitarily.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qstate::{AxisSpec, StateVector, UnitaryOp};

/// Basis a premeasurement correlates its pointer with.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MeasurementBasis {
    /// Spin eigenbasis along a direction (qubit systems only).
    Axis(AxisSpec),
    /// The system's own computational basis.
    Computational,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PremeasureRecord {
    pub system: String,
    pub pointer: String,
    pub basis: MeasurementBasis,
    pub event_id: u64,
}

/// Permutation `|i>|j> -> |i>|(j + i) mod pointer_dim>` on a `(system, pointer)` pair.
pub fn fanout_matrix(system_dim: usize, pointer_dim: usize) -> DMatrix<Complex64> {
    let n = system_dim * pointer_dim;
    let mut m = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
    for i in 0..system_dim {
        for j in 0..pointer_dim {
            let from = i * pointer_dim + j;
            let to = i * pointer_dim + (j + i) % pointer_dim;
            m[(to, from)] = Complex64::new(1.0, 0.0);
        }
    }
    m
}

/// Fan-out on two registers of equal dimension `d`.
pub fn fanout_unitary(d: usize, system: &str, pointer: &str) -> Result<UnitaryOp> {
    if d < 2 {
        return Err(Error::DimensionTooSmall {
            name: system.to_string(),
            dim: d,
        });
    }
    UnitaryOp::trusted([system, pointer], fanout_matrix(d, d))
}

fn check_pointer(state: &StateVector, system: &str, pointer: &str) -> Result<(usize, usize)> {
    let layout = state.layout();
    let s = layout.register(system)?;
    let p = layout.register(pointer)?;
    if system == pointer {
        return Err(Error::RepeatedTarget(system.to_string()));
    }
    if p.dim < s.dim {
        return Err(Error::PointerTooSmall {
            system: s.name.clone(),
            pointer: p.name.clone(),
            system_dim: s.dim,
            pointer_dim: p.dim,
        });
    }
    Ok((s.dim, p.dim))
}

/// `(R^dagger x I) F (R x I)` on `(system, pointer)` where `R` rotates `axis` to the
/// computational basis, assembled as `sum_i |e_i><e_i| x X^i` with `X` the pointer shift.
pub fn premeasure_unitary(
    axis: &AxisSpec,
    system: &str,
    pointer: &str,
    pointer_dim: usize,
) -> Result<UnitaryOp> {
    let n = 2 * pointer_dim;
    let mut m = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
    for (i, e) in [axis.plus_state(), axis.minus_state()].iter().enumerate() {
        for s in 0..2 {
            for t in 0..2 {
                let p = e[s] * e[t].conj();
                for j in 0..pointer_dim {
                    m[(s * pointer_dim + (j + i) % pointer_dim, t * pointer_dim + j)] += p;
                }
            }
        }
    }
    UnitaryOp::trusted([system, pointer], m)
}

/// Correlate `pointer` with the spin of `system` along `axis`.
pub fn premeasure_along(
    state: &StateVector,
    system: &str,
    axis: &AxisSpec,
    pointer: &str,
    event_id: u64,
) -> Result<(StateVector, PremeasureRecord)> {
    let (sd, pd) = check_pointer(state, system, pointer)?;
    if sd != 2 {
        return Err(Error::NotQubit {
            register: system.to_string(),
            dim: sd,
        });
    }
    let op = premeasure_unitary(axis, system, pointer, pd)?;
    let next = state.apply_unitary(&op)?;
    Ok((
        next,
        PremeasureRecord {
            system: system.to_string(),
            pointer: pointer.to_string(),
            basis: MeasurementBasis::Axis(*axis),
            event_id,
        },
    ))
}

/// Correlate `pointer` with the computational index of `source`; used to chain an
/// apparatus reading into a brain register.
pub fn premeasure_computational(
    state: &StateVector,
    source: &str,
    pointer: &str,
    event_id: u64,
) -> Result<(StateVector, PremeasureRecord)> {
    let (sd, pd) = check_pointer(state, source, pointer)?;
    let op = UnitaryOp::trusted([source, pointer], fanout_matrix(sd, pd))?;
    let next = state.apply_unitary(&op)?;
    Ok((
        next,
        PremeasureRecord {
            system: source.to_string(),
            pointer: pointer.to_string(),
            basis: MeasurementBasis::Computational,
            event_id,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::{unitarity_deviation, RegisterKind, RegisterLayout};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};
    use std::sync::Arc;

    fn layout(regs: &[(&str, usize, RegisterKind)]) -> Arc<RegisterLayout> {
        Arc::new(RegisterLayout::new(regs.iter().cloned()).unwrap())
    }

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn projector_sum_matches_conjugated_fanout() {
        for (theta, phi) in [(0.0, 0.0), (0.3, 1.1), (1.9, 5.0), (PI, 2.0)] {
            let axis = AxisSpec::new(theta, phi).unwrap();
            for pd in [2, 3] {
                let r = axis.basis_rotation();
                let r = DMatrix::from_iterator(2, 2, r.iter().copied());
                let id = DMatrix::<Complex64>::identity(pd, pd);
                let expected = r.adjoint().kronecker(&id) * fanout_matrix(2, pd) * r.kronecker(&id);
                let got = premeasure_unitary(&axis, "S", "P", pd).unwrap();
                assert!((got.matrix() - &expected).camax() < 1e-14);
                assert!(unitarity_deviation(got.matrix()) < 1e-14);
            }
        }
    }

    #[test]
    fn fanout_permutes_basis_states() {
        let m = fanout_matrix(2, 2);
        // columns are inputs: |10> (index 2) -> |11> (index 3); |00> fixed
        assert_eq!(m[(3, 2)], c(1.0));
        assert_eq!(m[(0, 0)], c(1.0));
        assert_eq!(m[(2, 2)], c(0.0));
    }

    #[test]
    fn fanout_squared_is_identity_for_qubits() {
        let m = fanout_matrix(2, 2);
        assert_eq!(&m * &m, DMatrix::identity(4, 4));
        // not so for qutrits: 2i mod 3 != 0
        let m3 = fanout_matrix(3, 3);
        assert_ne!(&m3 * &m3, DMatrix::identity(9, 9));
        assert_eq!(&m3 * &m3 * &m3, DMatrix::identity(9, 9));
    }

    #[test]
    fn fanout_rejects_trivial_dimension() {
        assert!(fanout_unitary(1, "s", "A").is_err());
        assert!(fanout_unitary(3, "s", "A").is_ok());
    }

    #[test]
    fn z_premeasurement_copies_amplitudes() {
        let l = layout(&[
            ("s", 2, RegisterKind::System),
            ("A", 2, RegisterKind::Apparatus),
        ]);
        let s = StateVector::from_amplitudes(l, vec![c(0.6), c(0.0), c(0.8), c(0.0)]).unwrap();
        let (after, rec) = premeasure_along(&s, "s", &AxisSpec::z(), "A", 4).unwrap();
        assert_eq!(after.amplitudes(), &[c(0.6), c(0.0), c(0.0), c(0.8)]);
        assert_eq!(rec.event_id, 4);
        assert_eq!(rec.basis, MeasurementBasis::Axis(AxisSpec::z()));
    }

    #[test]
    fn singlet_pointers_anticorrelate() {
        // Hand-applied fan-outs on the singlet: support only on (0,1,0,1) and (1,0,1,0).
        let l = layout(&[
            ("U", 2, RegisterKind::System),
            ("V", 2, RegisterKind::System),
            ("A", 2, RegisterKind::Apparatus),
            ("B", 2, RegisterKind::Apparatus),
        ]);
        let s = StateVector::singlet(l.clone(), "U", "V").unwrap();
        let (s, _) = premeasure_along(&s, "U", &AxisSpec::z(), "A", 0).unwrap();
        let (s, _) = premeasure_along(&s, "V", &AxisSpec::z(), "B", 1).unwrap();
        let i0101 = l.flat_index(&[0, 1, 0, 1]).unwrap();
        let i1010 = l.flat_index(&[1, 0, 1, 0]).unwrap();
        for (i, a) in s.amplitudes().iter().enumerate() {
            if i == i0101 {
                assert_abs_diff_eq!(a.re, FRAC_1_SQRT_2, epsilon = 1e-15);
            } else if i == i1010 {
                assert_abs_diff_eq!(a.re, -FRAC_1_SQRT_2, epsilon = 1e-15);
            } else {
                assert_eq!(a.norm(), 0.0);
            }
        }
    }

    #[test]
    fn eigenstate_input_gives_definite_pointer() {
        let l = layout(&[
            ("s", 2, RegisterKind::System),
            ("A", 2, RegisterKind::Apparatus),
        ]);
        let axis = AxisSpec::new(1.2, 0.5).unwrap();
        let m = axis.minus_state();
        let s = StateVector::from_amplitudes(l, vec![m[0], c(0.0), m[1], c(0.0)]).unwrap();
        let (after, _) = premeasure_along(&s, "s", &axis, "A", 0).unwrap();
        assert_abs_diff_eq!(
            after.projector_weight([("A", 1)]).unwrap(),
            1.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn system_is_left_in_axis_eigenstate_per_branch() {
        let l = layout(&[
            ("s", 2, RegisterKind::System),
            ("A", 2, RegisterKind::Apparatus),
        ]);
        let s = StateVector::product(l, &[0, 0]).unwrap();
        let axis = AxisSpec::x();
        let (after, _) = premeasure_along(&s, "s", &axis, "A", 0).unwrap();
        // Rotating the system into the axis basis must align it with the pointer.
        let rotated = after
            .apply_unitary(&crate::qstate::axis_basis_unitary(&axis, "s"))
            .unwrap();
        assert_abs_diff_eq!(
            rotated.projector_weight([("s", 0), ("A", 1)]).unwrap()
                + rotated.projector_weight([("s", 1), ("A", 0)]).unwrap(),
            0.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn computational_chain_into_larger_pointer() {
        let l = layout(&[
            ("A", 2, RegisterKind::Apparatus),
            ("O", 3, RegisterKind::Brain),
        ]);
        let s =
            StateVector::from_amplitudes(l, vec![c(0.6), c(0.0), c(0.0), c(0.8), c(0.0), c(0.0)])
                .unwrap();
        let (after, rec) = premeasure_computational(&s, "A", "O", 2).unwrap();
        assert_eq!(rec.basis, MeasurementBasis::Computational);
        assert_abs_diff_eq!(
            after.projector_weight([("A", 1), ("O", 1)]).unwrap(),
            0.64,
            epsilon = 1e-15
        );
    }

    #[test]
    fn premeasure_errors() {
        let l = layout(&[
            ("s", 3, RegisterKind::System),
            ("A", 2, RegisterKind::Apparatus),
            ("q", 2, RegisterKind::System),
        ]);
        let s = StateVector::product(l, &[0, 0, 0]).unwrap();
        assert!(matches!(
            premeasure_along(&s, "s", &AxisSpec::z(), "A", 0),
            Err(Error::PointerTooSmall { .. })
        ));
        assert!(matches!(
            premeasure_along(&s, "q", &AxisSpec::z(), "q", 0),
            Err(Error::RepeatedTarget(_))
        ));
        assert!(matches!(
            premeasure_along(&s, "q", &AxisSpec::z(), "nope", 0),
            Err(Error::UnknownRegister(_))
        ));
    }
}
