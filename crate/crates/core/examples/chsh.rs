//! CHSH statistic at the canonical planar angles: 2 sqrt 2 for the singlet, at most 2
//! for the local hidden-sign model.

use nocollapse::scenarios::{
    chsh_statistic, chsh_statistic_with, ChshSettings, ClassicalHiddenSign,
};

fn main() -> nocollapse::Result<()> {
    let trials: u64 = std::env::args()
        .nth(1)
        .and_then(|a| a.parse().ok())
        .unwrap_or(100_000);
    let settings = ChshSettings::default();
    let q = chsh_statistic(&settings, trials, 1)?;
    let c = chsh_statistic_with(&ClassicalHiddenSign, &settings, trials, 1)?;
    for (name, r) in [("hanging-on", q), ("hidden sign", c)] {
        let e: Vec<String> = r
            .correlations
            .iter()
            .map(|e| format!("{:+.4}", e.value))
            .collect();
        println!(
            "{name:>12}: S = {:+.4} +- {:.4}   E = [{}]",
            r.s,
            r.standard_error,
            e.join(", ")
        );
    }
    println!("{:>12}: {:.4}", "2 sqrt 2", 2.0 * 2f64.sqrt());
    Ok(())
}
