//! Command-line front end: scenario scripts and the built-in experiments.
//!
//! Exit status is 0 when every check holds, 1 when any check reports a
//! violation and 2 on usage or runtime errors.

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use crate::error::Error;
use crate::observer::derive_seed;
use crate::qstate::AxisSpec;
use crate::scenarios::{
    chsh_statistic_with, conviviality_violations_with, epr_trial,
    mixture_same_spin_probability_along, no_signaling_report, repeatability_violations,
    ChshSettings, ClassicalHiddenSign, HangingOn, Preparation,
};
use crate::script::{
    emit_report, parse_scenario, run_program, AssertionResult, ExpectKind, Report, ReportFormat,
    TallyCounts,
};

/// Environment variable that overrides the default trial count.
pub const TRIALS_ENV: &str = "NOCOLLAPSE_TRIALS";
pub const DEFAULT_TRIALS: u64 = 10_000;

#[derive(Debug, Parser)]
#[command(
    name = "nocollapse",
    version,
    about = "Measurement without collapse: scenario runner"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a scenario script.
    Run {
        file: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Same-pair EPR experiment: Alice's result against Bob's report to her.
    Epr {
        #[arg(long, default_value = "0", value_parser = parse_axis)]
        axis_a: AxisSpec,
        #[arg(long, default_value = "0", value_parser = parse_axis)]
        axis_b: AxisSpec,
        #[command(flatten)]
        common: Common,
    },
    /// CHSH statistic over four setting pairs (trials are per pair).
    Chsh {
        #[arg(long, default_value = "0", value_parser = parse_axis)]
        axis_a: AxisSpec,
        #[arg(long, default_value = "1.5707963267948966", value_parser = parse_axis)]
        axis_a_prime: AxisSpec,
        #[arg(long, default_value = "0.7853981633974483", value_parser = parse_axis)]
        axis_b: AxisSpec,
        #[arg(long, default_value = "2.356194490192345", value_parser = parse_axis)]
        axis_b_prime: AxisSpec,
        /// Use the local hidden-sign model instead of the quantum pair.
        #[arg(long)]
        classical: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Both-"+" frequency for the z-mixture against the singlet.
    Mixture {
        #[arg(long, default_value = "1.5707963267948966", value_parser = parse_axis)]
        axis: AxisSpec,
        #[command(flatten)]
        common: Common,
    },
    /// Exact marginals of Bob's pointer under Alice's choices.
    Nosignal {
        #[arg(long, default_value = "0", value_parser = parse_axis)]
        axis_a: AxisSpec,
        #[arg(long, default_value = "1.5707963267948966", value_parser = parse_axis)]
        axis_a_prime: AxisSpec,
        #[arg(long, default_value = "0.7853981633974483", value_parser = parse_axis)]
        axis_b: AxisSpec,
        #[command(flatten)]
        output: Output,
    },
    /// Randomized communication trials; counts contradictions.
    Convivial {
        /// Prepare the pair as the z-mixture instead of the singlet.
        #[arg(long)]
        mixture: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Re-perception trials; counts changed answers.
    Repeat {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Args)]
pub struct Common {
    /// Number of trials (default from NOCOLLAPSE_TRIALS, else 10000).
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct Output {
    #[arg(long, default_value = "table")]
    pub format: ReportFormat,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// `THETA` or `THETA,PHI`, radians.
pub fn parse_axis(s: &str) -> Result<AxisSpec, String> {
    let mut parts = s.split(',');
    let mut angle = |what: &str| -> Result<Option<f64>, String> {
        parts
            .next()
            .map(|p| {
                p.trim()
                    .parse::<f64>()
                    .map_err(|_| format!("{what} `{}` is not a number", p.trim()))
            })
            .transpose()
    };
    let theta = angle("theta")?.ok_or("missing theta")?;
    let phi = angle("phi")?.unwrap_or(0.0);
    if parts.next().is_some() {
        return Err("expected THETA or THETA,PHI".into());
    }
    AxisSpec::new(theta, phi).map_err(|e| e.to_string())
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("{path}: {source}")]
    Parse {
        path: String,
        source: crate::script::ParseError,
    },
    #[error(transparent)]
    Run(#[from] crate::script::RunError),
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{TRIALS_ENV}=`{0}` is not a trial count")]
    TrialsEnv(String),
}

/// Rendered output and whether every check held.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub text: String,
    pub ok: bool,
}

struct Trials {
    count: u64,
    from_env: bool,
}

fn resolve_trials(explicit: Option<u64>) -> Result<Trials, CliError> {
    if let Some(count) = explicit {
        return Ok(Trials {
            count,
            from_env: false,
        });
    }
    match std::env::var(TRIALS_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(|count| Trials {
                count,
                from_env: true,
            })
            .map_err(|_| CliError::TrialsEnv(v)),
        Err(_) => Ok(Trials {
            count: DEFAULT_TRIALS,
            from_env: false,
        }),
    }
}

fn axis_text(axis: &AxisSpec) -> String {
    format!("{:?},{:?}", axis.theta(), axis.phi())
}

fn base_report(experiment: &str, trials: &Trials, seed: u64) -> Report {
    let mut r = Report::empty(trials.count, seed);
    r.metadata.push(("experiment".into(), experiment.into()));
    if trials.from_env {
        r.metadata.push(("trials_source".into(), TRIALS_ENV.into()));
    }
    r
}

fn count_check(report: &mut Report, name: &str, violations: u64) {
    report
        .metadata
        .push((format!("{name}_violations"), violations.to_string()));
}

fn epr_report(a: &AxisSpec, b: &AxisSpec, trials: &Trials, seed: u64) -> Result<Report, CliError> {
    if trials.count == 0 {
        return Err(Error::NoTrials.into());
    }
    // counts[2 * alice + bob_report]
    let counts = (0..trials.count)
        .into_par_iter()
        .map(|t| {
            let o = epr_trial(a, b, derive_seed(seed, t))?;
            let mut c = [0u64; 4];
            c[2 * o.alice + o.bob_reported_to_alice] = 1;
            Ok(c)
        })
        .try_reduce(|| [0; 4], |x, y| Ok(std::array::from_fn(|k| x[k] + y[k])))
        .map_err(|e: Error| CliError::Core(e))?;

    let mut r = base_report("epr", trials, seed);
    r.metadata.push(("axis_a".into(), axis_text(a)));
    r.metadata.push(("axis_b".into(), axis_text(b)));
    let mut joint = BTreeMap::new();
    for (k, &c) in counts.iter().enumerate().filter(|(_, &c)| c > 0) {
        joint.insert(vec![k / 2, k % 2], c);
    }
    for (k, &c) in counts.iter().enumerate().filter(|(_, &c)| c > 0) {
        *r.marginals
            .entry("alice_result".into())
            .or_default()
            .entry(k / 2)
            .or_insert(0) += c;
        *r.marginals
            .entry("bob_report".into())
            .or_default()
            .entry(k % 2)
            .or_insert(0) += c;
    }
    r.tallies.push(TallyCounts {
        labels: vec!["alice_result".into(), "bob_report".into()],
        counts: joint,
    });
    let e = (counts[0] + counts[3]) as f64 - (counts[1] + counts[2]) as f64;
    r.metadata.push((
        "correlation".into(),
        format!("{:.6}", e / trials.count as f64),
    ));
    if a == b {
        r.assertions.push(AssertionResult {
            kind: ExpectKind::Opposite,
            left: "alice_result".into(),
            right: "bob_report".into(),
            violations: counts[0] + counts[3],
        });
    }
    Ok(r)
}

/// Execute a parsed command line.
pub fn execute(cli: &Cli) -> Result<Outcome, CliError> {
    let (report, output) = match &cli.command {
        Command::Run { file, common } => {
            let text = std::fs::read_to_string(file)?;
            let program = parse_scenario(&text).map_err(|source| CliError::Parse {
                path: file.display().to_string(),
                source,
            })?;
            let trials = resolve_trials(common.trials)?;
            let mut r = run_program(&program, trials.count, common.seed)?;
            r.metadata
                .push(("script".into(), file.display().to_string()));
            if trials.from_env {
                r.metadata.push(("trials_source".into(), TRIALS_ENV.into()));
            }
            (r, &common.output)
        }
        Command::Epr {
            axis_a,
            axis_b,
            common,
        } => {
            let trials = resolve_trials(common.trials)?;
            (
                epr_report(axis_a, axis_b, &trials, common.seed)?,
                &common.output,
            )
        }
        Command::Chsh {
            axis_a,
            axis_a_prime,
            axis_b,
            axis_b_prime,
            classical,
            common,
        } => {
            let trials = resolve_trials(common.trials)?;
            let settings = ChshSettings {
                a: *axis_a,
                a_prime: *axis_a_prime,
                b: *axis_b,
                b_prime: *axis_b_prime,
            };
            let res = if *classical {
                chsh_statistic_with(&ClassicalHiddenSign, &settings, trials.count, common.seed)?
            } else {
                chsh_statistic_with(&HangingOn, &settings, trials.count, common.seed)?
            };
            let mut r = base_report("chsh", &trials, common.seed);
            r.metadata.push((
                "model".into(),
                if *classical {
                    "classical-hidden-sign"
                } else {
                    "hanging-on"
                }
                .into(),
            ));
            for (name, axis) in [
                ("axis_a", axis_a),
                ("axis_a_prime", axis_a_prime),
                ("axis_b", axis_b),
                ("axis_b_prime", axis_b_prime),
            ] {
                r.metadata.push((name.into(), axis_text(axis)));
            }
            for (name, e) in ["E(a,b)", "E(a,b')", "E(a',b)", "E(a',b')"]
                .iter()
                .zip(&res.correlations)
            {
                r.metadata.push((
                    name.to_string(),
                    format!("{:.6} +- {:.6}", e.value, e.standard_error),
                ));
            }
            r.metadata.push(("S".into(), format!("{:.6}", res.s)));
            r.metadata.push((
                "S_standard_error".into(),
                format!("{:.6}", res.standard_error),
            ));
            (r, &common.output)
        }
        Command::Mixture { axis, common } => {
            let trials = resolve_trials(common.trials)?;
            let res = mixture_same_spin_probability_along(axis, trials.count, common.seed)?;
            let mut r = base_report("mixture", &trials, common.seed);
            r.metadata.push(("axis".into(), axis_text(axis)));
            for (label, f) in [
                ("mixture_both_plus", res.mixture),
                ("singlet_both_plus", res.singlet),
            ] {
                let plus = (f * trials.count as f64).round() as u64;
                let m = r.marginals.entry(label.into()).or_default();
                if plus > 0 {
                    m.insert(1, plus);
                }
                if plus < trials.count {
                    m.insert(0, trials.count - plus);
                }
            }
            (r, &common.output)
        }
        Command::Nosignal {
            axis_a,
            axis_a_prime,
            axis_b,
            output,
        } => {
            let res = no_signaling_report(axis_a, axis_a_prime, axis_b)?;
            let mut r = base_report(
                "nosignal",
                &Trials {
                    count: 0,
                    from_env: false,
                },
                0,
            );
            for (name, axis) in [
                ("axis_a", axis_a),
                ("axis_a_prime", axis_a_prime),
                ("axis_b", axis_b),
            ] {
                r.metadata.push((name.into(), axis_text(axis)));
            }
            let cases = [
                "alice_along_a",
                "alice_along_a_prime",
                "alice_absent",
                "alice_perceived",
            ];
            for (case, m) in cases.iter().zip(&res.marginals) {
                r.metadata.push((
                    format!("bob_marginal[{case}]"),
                    format!("{:.15},{:.15}", m[0], m[1]),
                ));
            }
            r.metadata
                .push(("deviation".into(), format!("{:e}", res.deviation)));
            let ok = res.deviation < 1e-12;
            let text = emit_report(&r, output.format);
            return finish(text, ok, output);
        }
        Command::Convivial { mixture, common } => {
            let trials = resolve_trials(common.trials)?;
            let prep = if *mixture {
                Preparation::Mixture
            } else {
                Preparation::Singlet
            };
            let v = conviviality_violations_with(prep, trials.count, common.seed)?;
            let mut r = base_report("convivial", &trials, common.seed);
            r.metadata.push((
                "preparation".into(),
                if *mixture { "mixture" } else { "singlet" }.into(),
            ));
            count_check(&mut r, "conviviality", v);
            let text = emit_report(&r, common.output.format);
            return finish(text, v == 0, &common.output);
        }
        Command::Repeat { common } => {
            let trials = resolve_trials(common.trials)?;
            let v = repeatability_violations(trials.count, common.seed)?;
            let mut r = base_report("repeat", &trials, common.seed);
            count_check(&mut r, "repeatability", v);
            let text = emit_report(&r, common.output.format);
            return finish(text, v == 0, &common.output);
        }
    };
    let ok = report.all_assertions_hold();
    finish(emit_report(&report, output.format), ok, output)
}

fn finish(text: String, ok: bool, output: &Output) -> Result<Outcome, CliError> {
    if let Some(path) = &output.out {
        std::fs::write(path, &text)?;
    }
    Ok(Outcome { text, ok })
}

/// Entry point shared by the binary; returns the process exit code.
pub fn main() -> i32 {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(outcome) => {
            let to_file = match &cli.command {
                Command::Nosignal { output, .. } => output.out.is_some(),
                Command::Run { common, .. }
                | Command::Epr { common, .. }
                | Command::Chsh { common, .. }
                | Command::Mixture { common, .. }
                | Command::Convivial { common, .. }
                | Command::Repeat { common } => common.output.out.is_some(),
            };
            if !to_file {
                print!("{}", outcome.text);
            }
            if outcome.ok {
                0
            } else {
                eprintln!("nocollapse: checks failed");
                1
            }
        }
        Err(e) => {
            eprintln!("nocollapse: {e}");
            2
        }
    }
}
