//! Parse and run a scenario script, then print the CSV report.

use nocollapse::script::{emit_report, parse_scenario, run_program, ReportFormat};

const SCRIPT: &str = "\
# shared electron, two observers
reg S 2 system
reg A 2 apparatus
reg OA 2 brain
reg OB 2 brain
init 0 0 0 0
unitary S rot 1.5707963267948966 0.0 1.2
premeasure S axis 0.0 0.0 into A
premeasure A basis into OA
premeasure A basis into OB
observer alice 3
observer bob 4
perceive alice OA as alice_saw
ask alice OB as alice_heard
expect-equal alice_saw alice_heard
tally alice_saw alice_heard
";

fn main() {
    let path = std::env::args().nth(1);
    let text = match &path {
        Some(p) => std::fs::read_to_string(p).expect("readable script"),
        None => SCRIPT.to_string(),
    };
    let program = match parse_scenario(&text) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(2);
        }
    };
    match run_program(&program, 10_000, 1) {
        Ok(report) => print!("{}", emit_report(&report, ReportFormat::Csv)),
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(2);
        }
    }
}
