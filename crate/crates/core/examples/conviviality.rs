//! Two observers of one singlet talk to each other. Each hears an answer that fits
//! their own branch; no contradiction ever shows up.

use nocollapse::scenarios::{conviviality_violations_with, epr_trial, Preparation};
use nocollapse::AxisSpec;

fn main() -> nocollapse::Result<()> {
    let z = AxisSpec::z();
    for seed in 0..5 {
        let t = epr_trial(&z, &z, seed)?;
        println!(
            "trial {seed}: Alice saw {}, Alice hears Bob say {}, Bob (in his own history) saw {}",
            t.alice, t.bob_reported_to_alice, t.bob
        );
    }
    for prep in [Preparation::Singlet, Preparation::Mixture] {
        let v = conviviality_violations_with(prep, 20_000, 1)?;
        println!("{prep:?}: {v} contradictions in 20000 randomized trials");
    }
    Ok(())
}
