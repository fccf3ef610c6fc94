//! Registers, product states and the singlet.

use std::sync::Arc;

use nocollapse::qstate::rotation_unitary;
use nocollapse::{AxisSpec, RegisterKind, RegisterLayout, StateVector};

fn show(amps: &[num_complex::Complex64]) -> String {
    let parts: Vec<String> = amps.iter().map(|a| format!("{:+.4}", a.re)).collect();
    format!("[{}]", parts.join(", "))
}

fn main() -> nocollapse::Result<()> {
    let layout = Arc::new(RegisterLayout::new([
        ("U", 2, RegisterKind::System),
        ("V", 2, RegisterKind::System),
    ])?);

    let product = StateVector::product(layout.clone(), &[0, 1])?;
    println!("|0,1>      : {}", show(product.amplitudes()));

    let singlet = StateVector::singlet(layout, "U", "V")?;
    println!("singlet    : {}", show(singlet.amplitudes()));

    // The same rotation on both spins leaves the singlet alone.
    let axis = AxisSpec::new(1.1, 0.4)?;
    let rotated = singlet
        .apply_unitary(&rotation_unitary(&axis, 2.0, "U"))?
        .apply_unitary(&rotation_unitary(&axis, 2.0, "V"))?;
    println!("fidelity after R x R: {:.15}", rotated.fidelity(&singlet));

    for (u, v) in [(0, 1), (1, 0), (0, 0)] {
        let p = singlet.projector_weight([("U", u), ("V", v)])?;
        println!("P(U={u}, V={v}) = {p:.3}");
    }
    Ok(())
}
