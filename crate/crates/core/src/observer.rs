//! Observers that hang on to branches of a global state that is never collapsed.
//!
//! A [`World`] owns one global [`StateVector`] plus any number of observers.
//! Perceiving a register samples an outcome by the Born rule *conditioned on the
//! observer's earlier commitments* and records it as a new commitment. The
//! global amplitudes are never touched by perception; only unitary operations
//! change them, and those may not act on a register someone has committed to.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::premeasure::{self, PremeasureRecord};
use crate::qstate::{AxisSpec, Commitment, RegisterKind, StateVector, UnitaryOp, ZERO_PROBABILITY};

/// Mix a base seed with a salt (splitmix64 finalizer).
pub fn derive_seed(base: u64, salt: u64) -> u64 {
    let mut z = base
        ^ salt
            .wrapping_add(0x9e37_79b9_7f4a_7c15)
            .wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn stream_key(seed: u64, id: &str) -> [u8; 32] {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    hasher.update(id.as_bytes());
    hasher.finalize().into()
}

/// Inverse-CDF pick over ascending outcome indices. Entries below
/// [`ZERO_PROBABILITY`] are never selected.
pub fn sample_index(probabilities: &[f64], u: f64) -> usize {
    let mut cumulative = 0.0;
    let mut last = None;
    for (i, &p) in probabilities.iter().enumerate() {
        if p < ZERO_PROBABILITY {
            continue;
        }
        cumulative += p;
        last = Some(i);
        if u < cumulative {
            return i;
        }
    }
    // rounding left u just above the final cumulative sum
    last.expect("distribution has no support")
}

#[derive(Clone, Debug)]
pub struct Observer {
    id: String,
    seed: u64,
    rng: ChaCha8Rng,
    draws: u64,
    commitments: Vec<Commitment>,
}

impl Observer {
    fn new(id: &str, seed: u64) -> Self {
        Observer {
            id: id.to_string(),
            seed,
            rng: ChaCha8Rng::from_seed(stream_key(seed, id)),
            draws: 0,
            commitments: Vec::new(),
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn commitments(&self) -> &[Commitment] {
        &self.commitments
    }

    pub fn committed_outcome(&self, register: &str) -> Option<usize> {
        self.commitments
            .iter()
            .find(|c| c.register == register)
            .map(|c| c.outcome)
    }

    /// How many uniforms this observer has consumed.
    pub fn draws(&self) -> u64 {
        self.draws
    }

    fn next_uniform(&mut self) -> f64 {
        self.draws += 1;
        self.rng.gen::<f64>()
    }
}

/// A definite perceived outcome. Not a vector: there is deliberately no way to
/// turn one into amplitudes or feed it to a state operation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Awareness {
    pub observer: String,
    pub register: String,
    pub outcome: usize,
    pub event_id: u64,
}

/// Born distribution of `register` conditioned on `commitments`.
///
/// A register that is already committed yields the point mass on its outcome.
pub fn conditional_distribution(
    state: &StateVector,
    commitments: &[Commitment],
    register: &str,
) -> Result<Vec<f64>> {
    let dim = state.layout().register(register)?.dim;
    if let Some(c) = commitments.iter().find(|c| c.register == register) {
        let mut point = vec![0.0; dim];
        point[c.outcome] = 1.0;
        return Ok(point);
    }
    let mut weights = state.branch_weights(
        commitments.iter().map(|c| (c.register.as_str(), c.outcome)),
        register,
    )?;
    let total: f64 = weights.iter().sum();
    if total <= ZERO_PROBABILITY {
        return Err(Error::InconsistentCommitments {
            observer: String::new(),
            probability: total,
        });
    }
    for w in &mut weights {
        *w /= total;
    }
    Ok(weights)
}

/// Probability that an observer starting from no commitments perceives
/// `registers` in order and commits to `outcomes`, as a product of conditionals.
pub fn conditional_chain_probability(
    state: &StateVector,
    registers: &[&str],
    outcomes: &[usize],
) -> Result<f64> {
    let mut hypothetical: Vec<Commitment> = Vec::with_capacity(registers.len());
    let mut probability = 1.0;
    for (i, (&reg, &out)) in registers.iter().zip(outcomes).enumerate() {
        let dist = conditional_distribution(state, &hypothetical, reg)?;
        let p = dist
            .get(out)
            .copied()
            .ok_or_else(|| Error::IndexOutOfRange {
                register: reg.to_string(),
                index: out,
                dim: dist.len(),
            })?;
        probability *= p;
        if p < ZERO_PROBABILITY {
            return Ok(0.0);
        }
        if hypothetical.iter().all(|c| c.register != reg) {
            hypothetical.push(Commitment {
                register: reg.to_string(),
                outcome: out,
                event_id: i as u64,
            });
        }
    }
    Ok(probability)
}

/// One global state plus the observers living in it.
#[derive(Clone, Debug)]
pub struct World {
    state: StateVector,
    observers: Vec<Observer>,
    event_counter: u64,
    premeasure_log: Vec<PremeasureRecord>,
}

impl World {
    pub fn new(state: StateVector) -> Self {
        World {
            state,
            observers: Vec::new(),
            event_counter: 0,
            premeasure_log: Vec::new(),
        }
    }

    pub fn state(&self) -> &StateVector {
        &self.state
    }

    pub fn observers(&self) -> &[Observer] {
        &self.observers
    }

    pub fn premeasure_log(&self) -> &[PremeasureRecord] {
        &self.premeasure_log
    }

    pub fn event_counter(&self) -> u64 {
        self.event_counter
    }

    pub fn observer(&self, id: &str) -> Result<&Observer> {
        self.observers
            .iter()
            .find(|o| o.id == id)
            .ok_or_else(|| Error::UnknownObserver(id.to_string()))
    }

    fn observer_index(&self, id: &str) -> Result<usize> {
        self.observers
            .iter()
            .position(|o| o.id == id)
            .ok_or_else(|| Error::UnknownObserver(id.to_string()))
    }

    fn next_event(&mut self) -> u64 {
        let id = self.event_counter;
        self.event_counter += 1;
        id
    }

    pub fn new_observer(&mut self, id: &str, seed: u64) -> Result<&Observer> {
        if self.observers.iter().any(|o| o.id == id) {
            return Err(Error::DuplicateObserver(id.to_string()));
        }
        self.observers.push(Observer::new(id, seed));
        Ok(self.observers.last().expect("just pushed"))
    }

    fn ensure_uncommitted(&self, registers: &[&str]) -> Result<()> {
        for obs in &self.observers {
            if let Some(c) = obs
                .commitments
                .iter()
                .find(|c| registers.contains(&c.register.as_str()))
            {
                return Err(Error::BranchStructureViolated {
                    observer: obs.id.clone(),
                    register: c.register.clone(),
                });
            }
        }
        Ok(())
    }

    /// Unitary evolution of the global state. Registers carrying a commitment are off limits.
    pub fn apply_unitary(&mut self, op: &UnitaryOp) -> Result<()> {
        let targets: Vec<&str> = op.targets().iter().map(String::as_str).collect();
        self.ensure_uncommitted(&targets)?;
        self.state = self.state.apply_unitary(op)?;
        Ok(())
    }

    pub fn premeasure_along(
        &mut self,
        system: &str,
        axis: &AxisSpec,
        pointer: &str,
    ) -> Result<PremeasureRecord> {
        self.ensure_uncommitted(&[system, pointer])?;
        let event = self.event_counter;
        let (state, record) =
            premeasure::premeasure_along(&self.state, system, axis, pointer, event)?;
        self.next_event();
        self.state = state;
        self.premeasure_log.push(record.clone());
        Ok(record)
    }

    pub fn premeasure_computational(
        &mut self,
        source: &str,
        pointer: &str,
    ) -> Result<PremeasureRecord> {
        self.ensure_uncommitted(&[source, pointer])?;
        let event = self.event_counter;
        let (state, record) =
            premeasure::premeasure_computational(&self.state, source, pointer, event)?;
        self.next_event();
        self.state = state;
        self.premeasure_log.push(record.clone());
        Ok(record)
    }

    pub fn conditional_distribution(&self, observer: &str, register: &str) -> Result<Vec<f64>> {
        let obs = self.observer(observer)?;
        conditional_distribution(&self.state, &obs.commitments, register).map_err(|e| match e {
            Error::InconsistentCommitments { probability, .. } => Error::InconsistentCommitments {
                observer: observer.to_string(),
                probability,
            },
            other => other,
        })
    }

    /// Hang on to a branch of `register`. Repeating it returns the committed outcome
    /// without consuming randomness.
    pub fn perceive(&mut self, observer: &str, register: &str) -> Result<Awareness> {
        let idx = self.observer_index(observer)?;
        if let Some(c) = self.observers[idx]
            .commitments
            .iter()
            .find(|c| c.register == register)
        {
            return Ok(Awareness {
                observer: observer.to_string(),
                register: register.to_string(),
                outcome: c.outcome,
                event_id: c.event_id,
            });
        }
        let dist = self.conditional_distribution(observer, register)?;
        let u = self.observers[idx].next_uniform();
        let outcome = sample_index(&dist, u);
        let event_id = self.next_event();
        self.observers[idx].commitments.push(Commitment {
            register: register.to_string(),
            outcome,
            event_id,
        });
        Ok(Awareness {
            observer: observer.to_string(),
            register: register.to_string(),
            outcome,
            event_id,
        })
    }

    /// Communication as measurement: the asker perceives another observer's brain register.
    pub fn ask(&mut self, asker: &str, brain_register: &str) -> Result<Awareness> {
        let reg = self.state.layout().register(brain_register)?;
        let recorded = reg.kind == RegisterKind::Brain
            && self
                .premeasure_log
                .iter()
                .any(|r| r.pointer == brain_register);
        if !recorded {
            return Err(Error::UnrecordedResult(brain_register.to_string()));
        }
        self.perceive(asker, brain_register)
    }
}
