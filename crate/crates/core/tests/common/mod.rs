#![allow(dead_code)]

use std::sync::Arc;

use nalgebra::DMatrix;
use nocollapse::qstate::{Register, UnitaryOp};
use nocollapse::{RegisterKind, RegisterLayout, StateVector};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const KINDS: [RegisterKind; 3] = [
    RegisterKind::System,
    RegisterKind::Apparatus,
    RegisterKind::Brain,
];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_layout<R: Rng>(rng: &mut R, registers: usize) -> Arc<RegisterLayout> {
    let regs: Vec<Register> = (0..registers)
        .map(|i| {
            Register::new(
                format!("r{i}"),
                rng.gen_range(2..=3),
                KINDS[rng.gen_range(0..3)],
            )
        })
        .collect();
    Arc::new(RegisterLayout::new(regs).unwrap())
}

/// Normalized state with Gaussian-ish amplitudes; about a third of them zeroed
/// so that vanishing branches occur.
pub fn random_state<R: Rng>(rng: &mut R, layout: Arc<RegisterLayout>) -> StateVector {
    let n = layout.total_dim();
    let mut amps: Vec<Complex64> = (0..n)
        .map(|_| {
            if rng.gen_bool(0.35) {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
            }
        })
        .collect();
    if amps.iter().all(|a| a.norm() == 0.0) {
        amps[0] = Complex64::new(1.0, 0.0);
    }
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    for a in &mut amps {
        *a /= norm;
    }
    StateVector::from_amplitudes(layout, amps).unwrap()
}

pub fn random_world_state(seed: u64, registers: usize) -> StateVector {
    let mut r = rng(seed);
    let layout = random_layout(&mut r, registers);
    random_state(&mut r, layout)
}

/// Haar-ish random unitary from the QR factor of a random complex matrix.
pub fn random_unitary_matrix<R: Rng>(rng: &mut R, dim: usize) -> DMatrix<Complex64> {
    let m = DMatrix::from_fn(dim, dim, |_, _| {
        Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
    });
    m.qr().q()
}

pub fn random_op<R: Rng>(rng: &mut R, state: &StateVector, targets: &[usize]) -> UnitaryOp {
    let regs = state.layout().registers();
    let dim: usize = targets.iter().map(|&t| regs[t].dim).product();
    let names: Vec<String> = targets.iter().map(|&t| regs[t].name.clone()).collect();
    UnitaryOp::new(names, random_unitary_matrix(rng, dim)).unwrap()
}

/// `|| prod P psi ||^2` by decoding every flat index by hand.
pub fn direct_weight(state: &StateVector, fixed: &[(&str, usize)]) -> f64 {
    let regs = state.layout().registers();
    let dims: Vec<usize> = regs.iter().map(|r| r.dim).collect();
    let wanted: Vec<(usize, usize)> = fixed
        .iter()
        .map(|(name, o)| (regs.iter().position(|r| r.name == *name).unwrap(), *o))
        .collect();
    let mut total = 0.0;
    for (flat, a) in state.amplitudes().iter().enumerate() {
        let mut digits = vec![0; dims.len()];
        let mut rest = flat;
        for k in (0..dims.len()).rev() {
            digits[k] = rest % dims[k];
            rest /= dims[k];
        }
        if wanted.iter().all(|&(p, o)| digits[p] == o) {
            total += a.norm_sqr();
        }
    }
    total
}

pub fn arb_state(max_registers: usize) -> impl Strategy<Value = StateVector> {
    (any::<u64>(), 1..=max_registers).prop_map(|(seed, n)| random_world_state(seed, n))
}

pub fn arb_angle_pair() -> impl Strategy<Value = (f64, f64)> {
    (0.0..=std::f64::consts::PI, 0.0..std::f64::consts::TAU)
}
