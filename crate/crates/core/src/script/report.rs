use std::fmt::Write as _;
use std::str::FromStr;

use super::run::{ExpectKind, Report};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ReportFormat {
    #[default]
    Table,
    Csv,
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "table" => Ok(ReportFormat::Table),
            "csv" => Ok(ReportFormat::Csv),
            other => Err(format!("unknown format `{other}` (expected table or csv)")),
        }
    }
}

/// Fixed-point rendering with 10 significant digits, e.g. `0.5000000000`.
pub fn format_frequency(f: f64) -> String {
    if f == 0.0 || !f.is_finite() {
        return format!("{:.9}", f);
    }
    let magnitude = f.abs().log10().floor() as i32;
    let decimals = (9 - magnitude).max(0) as usize;
    let s = format!("{:.*}", decimals, f);
    // rounding can carry into a new leading digit (0.09999999999 -> 0.1000000000)
    let rounded: f64 = s.parse().unwrap_or(f);
    if rounded != 0.0 && rounded.abs().log10().floor() as i32 != magnitude {
        let decimals = (9 - magnitude - 1).max(0) as usize;
        return format!("{:.*}", decimals, f);
    }
    s
}

fn expect_name(kind: ExpectKind) -> &'static str {
    match kind {
        ExpectKind::Equal => "expect-equal",
        ExpectKind::Opposite => "expect-opposite",
    }
}

fn tuple_key(labels: &[String], outcomes: &[usize]) -> String {
    labels
        .iter()
        .zip(outcomes)
        .map(|(l, o)| format!("{l}={o}"))
        .collect::<Vec<_>>()
        .join(";")
}

fn metadata(report: &Report) -> Vec<(String, String)> {
    let mut meta = vec![
        ("seed".to_string(), report.seed.to_string()),
        ("trials".to_string(), report.trials.to_string()),
        ("version".to_string(), report.version.clone()),
    ];
    meta.extend(report.metadata.iter().cloned());
    for a in &report.assertions {
        meta.push((
            format!("{} {} {}", expect_name(a.kind), a.left, a.right),
            format!("violations {}", a.violations),
        ));
    }
    meta
}

fn joint_rows(report: &Report) -> Vec<(String, u64)> {
    let mut rows: Vec<(String, u64)> = report
        .tallies
        .iter()
        .flat_map(|t| t.counts.iter().map(|(k, &c)| (tuple_key(&t.labels, k), c)))
        .collect();
    rows.sort();
    rows
}

fn marginal_rows(report: &Report) -> Vec<(String, usize, u64)> {
    report
        .marginals
        .iter()
        .flat_map(|(l, m)| m.iter().map(move |(&o, &c)| (l.clone(), o, c)))
        .collect()
}

pub fn emit_report(report: &Report, format: ReportFormat) -> String {
    match format {
        ReportFormat::Csv => emit_csv(report),
        ReportFormat::Table => emit_table(report),
    }
}

fn emit_csv(report: &Report) -> String {
    let mut out = String::new();
    for (k, v) in metadata(report) {
        writeln!(out, "# {k}={v}").unwrap();
    }
    out.push_str("tuple,count,frequency\n");
    for (key, count) in joint_rows(report) {
        writeln!(
            out,
            "{key},{count},{}",
            format_frequency(report.frequency(count))
        )
        .unwrap();
    }
    out.push_str("label,outcome,count,frequency\n");
    for (label, outcome, count) in marginal_rows(report) {
        writeln!(
            out,
            "{label},{outcome},{count},{}",
            format_frequency(report.frequency(count))
        )
        .unwrap();
    }
    out
}

fn emit_table(report: &Report) -> String {
    let mut out = String::new();
    for (k, v) in metadata(report) {
        writeln!(out, "{k:<32} {v}").unwrap();
    }

    let joint = joint_rows(report);
    let width = joint.iter().map(|(k, _)| k.len()).max().unwrap_or(0).max(5);
    writeln!(
        out,
        "\n{:<width$}  {:>10}  {:>12}",
        "tuple", "count", "frequency"
    )
    .unwrap();
    for (key, count) in &joint {
        writeln!(
            out,
            "{key:<width$}  {count:>10}  {:>12}",
            format_frequency(report.frequency(*count))
        )
        .unwrap();
    }

    let marginals = marginal_rows(report);
    let width = marginals
        .iter()
        .map(|(l, ..)| l.len())
        .max()
        .unwrap_or(0)
        .max(5);
    writeln!(
        out,
        "\n{:<width$}  {:>7}  {:>10}  {:>12}",
        "label", "outcome", "count", "frequency"
    )
    .unwrap();
    for (label, outcome, count) in &marginals {
        writeln!(
            out,
            "{label:<width$}  {outcome:>7}  {count:>10}  {:>12}",
            format_frequency(report.frequency(*count))
        )
        .unwrap();
    }
    out
}
