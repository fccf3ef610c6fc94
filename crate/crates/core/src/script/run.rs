use std::collections::BTreeMap;
use std::sync::Arc;

use rayon::prelude::*;
use thiserror::Error;

use super::parse::{Generator, ScenarioProgram, Statement};
use crate::error::Error;
use crate::observer::{derive_seed, World};
use crate::premeasure::MeasurementBasis;
use crate::qstate::{rotation_unitary, x_flip, z_phase, Register, RegisterLayout, StateVector};
use crate::scenarios::perceive_checked;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RunError {
    #[error("trial {trial}: {source}")]
    Trial {
        trial: u64,
        #[source]
        source: Error,
    },
    #[error(transparent)]
    Setup(#[from] Error),
}

/// Outcomes of one execution of a program.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialRecord {
    pub trial: u64,
    pub outcomes: BTreeMap<String, usize>,
    /// `[run seed, trial index, trial seed]`.
    pub seed_path: Vec<u64>,
    /// One flag per expect statement, in program order.
    pub violated: Vec<bool>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExpectKind {
    Equal,
    Opposite,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AssertionResult {
    pub kind: ExpectKind,
    pub left: String,
    pub right: String,
    pub violations: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TallyCounts {
    pub labels: Vec<String>,
    pub counts: BTreeMap<Vec<usize>, u64>,
}

/// Aggregated statistics of a run.
#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub trials: u64,
    pub seed: u64,
    pub version: String,
    /// label -> outcome -> count
    pub marginals: BTreeMap<String, BTreeMap<usize, u64>>,
    pub tallies: Vec<TallyCounts>,
    pub assertions: Vec<AssertionResult>,
    /// Extra `key=value` pairs echoed as metadata.
    pub metadata: Vec<(String, String)>,
}

impl Report {
    pub fn empty(trials: u64, seed: u64) -> Self {
        Report {
            trials,
            seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            marginals: BTreeMap::new(),
            tallies: Vec::new(),
            assertions: Vec::new(),
            metadata: Vec::new(),
        }
    }

    pub fn all_assertions_hold(&self) -> bool {
        self.assertions.iter().all(|a| a.violations == 0)
    }

    pub fn frequency(&self, count: u64) -> f64 {
        count as f64 / self.trials as f64
    }
}

fn layout_of(program: &ScenarioProgram) -> Result<Arc<RegisterLayout>, Error> {
    let regs = program.statements.iter().filter_map(|s| match s {
        Statement::Reg { name, dim, kind } => Some(Register::new(name.clone(), *dim, *kind)),
        _ => None,
    });
    Ok(Arc::new(RegisterLayout::new(regs)?))
}

fn run_trial(
    program: &ScenarioProgram,
    layout: &Arc<RegisterLayout>,
    seed: u64,
    trial: u64,
) -> Result<TrialRecord, Error> {
    let trial_seed = derive_seed(seed, trial);
    let mut world: Option<World> = None;
    let mut pending: Vec<(&str, u64)> = Vec::new();
    let mut outcomes = BTreeMap::new();
    let mut violated = Vec::new();

    let start = |world: &mut Option<World>, state: StateVector, pending: &mut Vec<(&str, u64)>| {
        let mut w = World::new(state);
        for (name, s) in pending.drain(..) {
            w.new_observer(name, derive_seed(trial_seed, s))?;
        }
        *world = Some(w);
        Ok::<(), Error>(())
    };

    for st in &program.statements {
        match st {
            Statement::Reg { .. } | Statement::Tally(_) => {}
            Statement::Init { indices } => start(
                &mut world,
                StateVector::product(Arc::clone(layout), indices)?,
                &mut pending,
            )?,
            Statement::Singlet { u, v } => start(
                &mut world,
                StateVector::singlet(Arc::clone(layout), u, v)?,
                &mut pending,
            )?,
            Statement::Observer { name, seed } => match world.as_mut() {
                Some(w) => {
                    w.new_observer(name, derive_seed(trial_seed, *seed))?;
                }
                None => pending.push((name, *seed)),
            },
            Statement::Unitary { target, generator } => {
                let op = match generator {
                    Generator::XFlip => x_flip(target.clone()),
                    Generator::ZPhase => z_phase(target.clone()),
                    Generator::Rot { axis, angle } => {
                        rotation_unitary(axis, *angle, target.clone())
                    }
                };
                live(&mut world)?.apply_unitary(&op)?;
            }
            Statement::Premeasure {
                system,
                basis,
                pointer,
            } => {
                let w = live(&mut world)?;
                match basis {
                    MeasurementBasis::Axis(axis) => w.premeasure_along(system, axis, pointer)?,
                    MeasurementBasis::Computational => {
                        w.premeasure_computational(system, pointer)?
                    }
                };
            }
            Statement::Perceive {
                observer,
                register,
                label,
            } => {
                let a = perceive_checked(live(&mut world)?, observer, register, false)?;
                outcomes.insert(label.clone(), a.outcome);
            }
            Statement::Ask {
                observer,
                register,
                label,
            } => {
                let a = perceive_checked(live(&mut world)?, observer, register, true)?;
                outcomes.insert(label.clone(), a.outcome);
            }
            Statement::ExpectEqual(l, r) => violated.push(outcomes[l] != outcomes[r]),
            Statement::ExpectOpposite(l, r) => {
                let (a, b) = (outcomes[l], outcomes[r]);
                violated.push(!(a <= 1 && b <= 1 && a != b));
            }
        }
    }
    Ok(TrialRecord {
        trial,
        outcomes,
        seed_path: vec![seed, trial, trial_seed],
        violated,
    })
}

fn live(world: &mut Option<World>) -> Result<&mut World, Error> {
    world.as_mut().ok_or(Error::Uninitialized)
}

/// Execute `program` on `trials` fresh worlds and aggregate labeled outcomes.
pub fn run_program(program: &ScenarioProgram, trials: u64, seed: u64) -> Result<Report, RunError> {
    if trials == 0 {
        return Err(Error::NoTrials.into());
    }
    let layout = layout_of(program)?;
    let records: Vec<Result<TrialRecord, Error>> = (0..trials)
        .into_par_iter()
        .map(|t| run_trial(program, &layout, seed, t))
        .collect();

    let mut report = Report::empty(trials, seed);
    let mut tallies: Vec<TallyCounts> = Vec::new();
    let mut assertions: Vec<AssertionResult> = Vec::new();
    for st in &program.statements {
        match st {
            Statement::Tally(labels) => tallies.push(TallyCounts {
                labels: labels.clone(),
                counts: BTreeMap::new(),
            }),
            Statement::ExpectEqual(l, r) | Statement::ExpectOpposite(l, r) => {
                assertions.push(AssertionResult {
                    kind: if matches!(st, Statement::ExpectEqual(..)) {
                        ExpectKind::Equal
                    } else {
                        ExpectKind::Opposite
                    },
                    left: l.clone(),
                    right: r.clone(),
                    violations: 0,
                })
            }
            _ => {}
        }
    }

    for (t, record) in records.into_iter().enumerate() {
        let record = record.map_err(|source| RunError::Trial {
            trial: t as u64,
            source,
        })?;
        for (label, &outcome) in &record.outcomes {
            *report
                .marginals
                .entry(label.clone())
                .or_default()
                .entry(outcome)
                .or_insert(0) += 1;
        }
        for tally in &mut tallies {
            let key: Vec<usize> = tally.labels.iter().map(|l| record.outcomes[l]).collect();
            *tally.counts.entry(key).or_insert(0) += 1;
        }
        for (a, &bad) in assertions.iter_mut().zip(&record.violated) {
            a.violations += u64::from(bad);
        }
    }
    report.tallies = tallies;
    report.assertions = assertions;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::script::parse_scenario;

    const EPR: &str = "\
reg U 2 system
reg V 2 system
reg A 2 apparatus
reg B 2 apparatus
reg OA 2 brain
reg OB 2 brain
singlet U V
premeasure U axis 0 0 into A
premeasure V axis 0 0 into B
premeasure A basis into OA
premeasure B basis into OB
observer alice 1
observer bob 2
perceive alice OA as alice_result
perceive bob OB as bob_result
ask alice OB as bob_report
expect-opposite alice_result bob_report
tally alice_result bob_report
";

    #[test]
    fn epr_script_is_anticorrelated() {
        let p = parse_scenario(EPR).unwrap();
        let r = run_program(&p, 10_000, 3).unwrap();
        assert!(r.all_assertions_hold());
        let keys: Vec<&Vec<usize>> = r.tallies[0].counts.keys().collect();
        assert_eq!(keys, vec![&vec![0, 1], &vec![1, 0]]);
        for counts in r.marginals.values() {
            assert_eq!(counts.values().sum::<u64>(), 10_000);
        }
    }

    #[test]
    fn repeated_perception_agrees() {
        let p = parse_scenario(
            "reg S 2 system\nreg A 2 apparatus\ninit 0 0\nunitary S rot 1.5707963267948966 0 1.0\n\
             premeasure S axis 0 0 into A\nobserver o 5\nperceive o A as first\nperceive o A as second\n\
             expect-equal first second\n",
        )
        .unwrap();
        let r = run_program(&p, 5_000, 1).unwrap();
        assert_eq!(r.assertions[0].violations, 0);
        assert_eq!(r.marginals["first"].len(), 2);
    }

    #[test]
    fn runtime_errors_name_the_trial() {
        let p = parse_scenario(
            "reg S 2 system\nreg A 2 apparatus\ninit 0 0\nobserver o 5\nperceive o S as s\nunitary S x-flip\n",
        )
        .unwrap();
        let err = run_program(&p, 3, 1).unwrap_err();
        assert!(matches!(
            err,
            RunError::Trial {
                trial: 0,
                source: Error::BranchStructureViolated { .. }
            }
        ));
    }

    #[test]
    fn deterministic_records() {
        let p = parse_scenario(EPR).unwrap();
        assert_eq!(
            run_program(&p, 500, 9).unwrap(),
            run_program(&p, 500, 9).unwrap()
        );
        let layout = layout_of(&p).unwrap();
        let rec = run_trial(&p, &layout, 9, 4).unwrap();
        assert_eq!(rec.seed_path, vec![9, 4, derive_seed(9, 4)]);
    }
}
