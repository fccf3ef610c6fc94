//! The relative-state branch table of a random world against what a crowd of fresh
//! observers actually perceives.

use std::collections::BTreeMap;
use std::sync::Arc;

use nocollapse::oracle::enumerate_branches;
use nocollapse::{RegisterKind, RegisterLayout, StateVector, World};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> nocollapse::Result<()> {
    let layout = Arc::new(RegisterLayout::new([
        ("X", 2, RegisterKind::System),
        ("Y", 3, RegisterKind::System),
    ])?);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut amps: Vec<Complex64> = (0..6)
        .map(|_| Complex64::new(rng.gen(), rng.gen()))
        .collect();
    amps[4] = Complex64::new(0.0, 0.0);
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    amps.iter_mut().for_each(|a| *a /= norm);
    let state = StateVector::from_amplitudes(layout, amps)?;

    let table = enumerate_branches(&state, &["X", "Y"])?;
    let trials = 100_000u64;
    let mut seen: BTreeMap<Vec<usize>, u64> = BTreeMap::new();
    for t in 0..trials {
        let mut world = World::new(state.clone());
        world.new_observer("o", t)?;
        let x = world.perceive("o", "X")?.outcome;
        let y = world.perceive("o", "Y")?.outcome;
        *seen.entry(vec![x, y]).or_default() += 1;
    }
    println!("{:>8} {:>10} {:>10}", "(X,Y)", "Born", "observed");
    for (tuple, p) in table.entries() {
        let f = seen.get(tuple).copied().unwrap_or(0) as f64 / trials as f64;
        println!("{:>8} {:>10.5} {:>10.5}", format!("{tuple:?}"), p, f);
    }
    Ok(())
}
