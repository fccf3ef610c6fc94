//! One observer hangs on to a branch. The global state is the same before and after,
//! and looking again gives the same answer without drawing new randomness.

use std::sync::Arc;

use nocollapse::qstate::rotation_unitary;
use nocollapse::{AxisSpec, Error, RegisterKind, RegisterLayout, StateVector, World};

fn main() -> nocollapse::Result<()> {
    let layout = Arc::new(RegisterLayout::new([
        ("S", 2, RegisterKind::System),
        ("A", 2, RegisterKind::Apparatus),
        ("O", 2, RegisterKind::Brain),
    ])?);
    let mut world = World::new(StateVector::product(layout, &[0, 0, 0])?);
    world.apply_unitary(&rotation_unitary(&AxisSpec::y(), 1.0, "S"))?;
    world.premeasure_along("S", &AxisSpec::z(), "A")?;
    world.premeasure_computational("A", "O")?;
    world.new_observer("me", 42)?;

    println!("before: {:?}", world.conditional_distribution("me", "O")?);
    let snapshot = world.state().clone();
    let first = world.perceive("me", "O")?;
    println!("perceived O = {} (event {})", first.outcome, first.event_id);
    println!("state unchanged: {}", snapshot.bit_identical(world.state()));
    println!("after:  {:?}", world.conditional_distribution("me", "O")?);

    let draws = world.observer("me")?.draws();
    let again = world.perceive("me", "O")?;
    println!(
        "looked again: {} (draws {} -> {})",
        again.outcome,
        draws,
        world.observer("me")?.draws()
    );
    let dial = world.perceive("me", "A")?;
    println!(
        "apparatus agrees with the brain record: {}",
        dial.outcome == first.outcome
    );

    match world.apply_unitary(&rotation_unitary(&AxisSpec::x(), 0.5, "A")) {
        Err(e @ Error::BranchStructureViolated { .. }) => println!("refused: {e}"),
        other => println!("unexpected: {other:?}"),
    }
    Ok(())
}
