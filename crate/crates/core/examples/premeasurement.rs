//! System -> apparatus -> brain, all unitary. The pointers end up correlated with
//! the spin without anything collapsing.

use std::sync::Arc;

use nocollapse::qstate::rotation_unitary;
use nocollapse::{AxisSpec, RegisterKind, RegisterLayout, StateVector, World};

fn main() -> nocollapse::Result<()> {
    let layout = Arc::new(RegisterLayout::new([
        ("S", 2, RegisterKind::System),
        ("A", 2, RegisterKind::Apparatus),
        ("O", 2, RegisterKind::Brain),
    ])?);
    let mut world = World::new(StateVector::product(layout, &[0, 0, 0])?);
    // cos(0.6)|0> - i sin(0.6)|1> on the spin
    world.apply_unitary(&rotation_unitary(&AxisSpec::x(), 1.2, "S"))?;
    world.premeasure_along("S", &AxisSpec::z(), "A")?;
    world.premeasure_computational("A", "O")?;

    for (i, a) in world.state().amplitudes().iter().enumerate() {
        if a.norm() > 1e-12 {
            println!("|S A O> = |{:03b}>  amplitude {:.4}", i, a);
        }
    }
    for k in 0..2 {
        println!(
            "P(O={k}) = {:.4}   P(S={k}, A={k}, O={k}) = {:.4}",
            world.state().projector_weight([("O", k)])?,
            world
                .state()
                .projector_weight([("S", k), ("A", k), ("O", k)])?
        );
    }
    for r in world.premeasure_log() {
        println!(
            "event {}: {} -> {} ({:?})",
            r.event_id, r.system, r.pointer, r.basis
        );
    }
    Ok(())
}
