//! Line-oriented scenario scripts: parse, run many trials, report.

mod parse;
mod report;
mod run;

pub use parse::{
    parse_scenario, Generator, ParseError, ParseErrorKind, ScenarioProgram, Statement,
};
pub use report::{emit_report, format_frequency, ReportFormat};
pub use run::{
    run_program, AssertionResult, ExpectKind, Report, RunError, TallyCounts, TrialRecord,
};
