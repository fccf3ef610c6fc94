//! Bob's pointer statistics do not depend on what Alice measures, or on whether
//! she looks at all.

use nocollapse::scenarios::no_signaling_report;
use nocollapse::AxisSpec;

fn main() -> nocollapse::Result<()> {
    let report = no_signaling_report(
        &AxisSpec::z(),
        &AxisSpec::new(1.3, 2.2)?,
        &AxisSpec::new(0.7, 4.0)?,
    )?;
    let cases = [
        "Alice along a",
        "Alice along a'",
        "Alice absent",
        "Alice perceived",
    ];
    for (case, m) in cases.iter().zip(report.marginals) {
        println!("{case:>16}: P(B=+) = {:.15}  P(B=-) = {:.15}", m[0], m[1]);
    }
    println!("max deviation: {:e}", report.deviation);
    Ok(())
}
