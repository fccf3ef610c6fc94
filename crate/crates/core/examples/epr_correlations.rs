//! Correlation of Alice's result with Bob's report, against -a.b.

use std::f64::consts::PI;

use nocollapse::scenarios::{estimate_correlation, estimate_correlation_with, ClassicalHiddenSign};
use nocollapse::AxisSpec;

fn main() -> nocollapse::Result<()> {
    let trials = 50_000;
    println!("{:>8} {:>10} {:>10} {:>10}", "angle", "E", "-cos", "local");
    for k in 0..=8 {
        let angle = PI * k as f64 / 8.0;
        let a = AxisSpec::z();
        let b = AxisSpec::planar(angle)?;
        let e = estimate_correlation(&a, &b, trials, k)?;
        let local = estimate_correlation_with(&ClassicalHiddenSign, &a, &b, trials, k)?;
        println!(
            "{angle:>8.4} {:>10.4} {:>10.4} {:>10.4}",
            e.value,
            -angle.cos(),
            local.value
        );
    }
    Ok(())
}
