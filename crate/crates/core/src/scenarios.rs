//! Monte Carlo reproductions of the EPR/Bell arguments on top of the hanging-on
//! mechanism.
//!
//! Every trial builds a fresh [`World`] from a seed derived from
//! `(seed, trial index)`, so all results are deterministic functions of their
//! inputs. Trials run in parallel; aggregation only sums integers, so the
//! schedule never changes a result.
//!
//! Outcome index 0 is spin "+" and maps to sign +1; index 1 maps to -1.

use std::f64::consts::{PI, TAU};
use std::sync::{Arc, OnceLock};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::observer::{derive_seed, Awareness, World};
use crate::qstate::{
    rotation_unitary, AxisSpec, RegisterKind, RegisterLayout, StateVector, ZERO_PROBABILITY,
};

pub const ALICE: &str = "alice";
pub const BOB: &str = "bob";

// salts for the per-trial streams that are not observer streams
const SALT_AXES: u64 = 0xa1;
const SALT_PREP: u64 = 0xb2;
const SALT_SHARED: u64 = 0xc3;
const SALT_HIDDEN: u64 = 0xd4;

/// How the (U, V) pair is prepared for a trial.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preparation {
    Singlet,
    /// `|+->` or `|-+>` along z, each with probability 1/2, drawn per trial.
    Mixture,
}

/// Sign of a spin outcome index.
pub fn sign(outcome: usize) -> i8 {
    if outcome == 0 {
        1
    } else {
        -1
    }
}

/// Uniformly random direction on the sphere.
pub fn random_axis<R: Rng + ?Sized>(rng: &mut R) -> AxisSpec {
    let theta = (1.0 - 2.0 * rng.gen::<f64>()).clamp(-1.0, 1.0).acos();
    let phi = (TAU * rng.gen::<f64>()) % TAU;
    AxisSpec::new(theta.min(PI), phi).expect("angles sampled in range")
}

fn pair_layout() -> Arc<RegisterLayout> {
    static LAYOUT: OnceLock<Arc<RegisterLayout>> = OnceLock::new();
    LAYOUT
        .get_or_init(|| {
            Arc::new(
                RegisterLayout::new([
                    ("U", 2, RegisterKind::System),
                    ("V", 2, RegisterKind::System),
                    ("A", 2, RegisterKind::Apparatus),
                    ("B", 2, RegisterKind::Apparatus),
                    ("O_A", 2, RegisterKind::Brain),
                    ("O_B", 2, RegisterKind::Brain),
                ])
                .expect("static layout"),
            )
        })
        .clone()
}

fn shared_layout() -> Arc<RegisterLayout> {
    static LAYOUT: OnceLock<Arc<RegisterLayout>> = OnceLock::new();
    LAYOUT
        .get_or_init(|| {
            Arc::new(
                RegisterLayout::new([
                    ("S", 2, RegisterKind::System),
                    ("A", 2, RegisterKind::Apparatus),
                    ("O_A", 2, RegisterKind::Brain),
                    ("O_B", 2, RegisterKind::Brain),
                ])
                .expect("static layout"),
            )
        })
        .clone()
}

fn prepared_pair(prep: Preparation, prep_seed: u64) -> Result<StateVector> {
    match prep {
        Preparation::Singlet => StateVector::singlet(pair_layout(), "U", "V"),
        Preparation::Mixture => {
            let up_down = ChaCha8Rng::seed_from_u64(prep_seed).gen::<bool>();
            let (u, v) = if up_down { (0, 1) } else { (1, 0) };
            StateVector::product(pair_layout(), &[u, v, 0, 0, 0, 0])
        }
    }
}

/// The two-party world: pair (U, V), apparatus A on U along `axis_a`, B on V along
/// `axis_b`, brains O_A and O_B reading A and B. No observers yet.
pub fn pair_world(
    prep: Preparation,
    axis_a: &AxisSpec,
    axis_b: &AxisSpec,
    prep_seed: u64,
) -> Result<World> {
    let mut world = World::new(prepared_pair(prep, prep_seed)?);
    world.premeasure_along("U", axis_a, "A")?;
    world.premeasure_along("V", axis_b, "B")?;
    world.premeasure_computational("A", "O_A")?;
    world.premeasure_computational("B", "O_B")?;
    Ok(world)
}

/// Perceive or ask, failing if the global amplitudes changed in any bit.
pub(crate) fn perceive_checked(
    world: &mut World,
    observer: &str,
    register: &str,
    ask: bool,
) -> Result<Awareness> {
    let before = world.state().clone();
    let awareness = if ask {
        world.ask(observer, register)?
    } else {
        world.perceive(observer, register)?
    };
    if !before.bit_identical(world.state()) {
        return Err(Error::StateDisturbed);
    }
    Ok(awareness)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EprOutcome {
    pub alice: usize,
    /// What Alice hears when she asks Bob: her measurement of his brain register.
    pub bob_reported_to_alice: usize,
    /// Bob's own awareness, in his own history.
    pub bob: usize,
}

/// One EPR run: both observers look at their own apparatus, then Alice asks Bob.
pub fn epr_trial(axis_a: &AxisSpec, axis_b: &AxisSpec, trial_seed: u64) -> Result<EprOutcome> {
    let mut world = pair_world(Preparation::Singlet, axis_a, axis_b, trial_seed)?;
    world.new_observer(ALICE, trial_seed)?;
    world.new_observer(BOB, trial_seed)?;
    let alice = perceive_checked(&mut world, ALICE, "O_A", false)?.outcome;
    let bob = perceive_checked(&mut world, BOB, "O_B", false)?.outcome;
    let reported = perceive_checked(&mut world, ALICE, "O_B", true)?.outcome;
    Ok(EprOutcome {
        alice,
        bob_reported_to_alice: reported,
        bob,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CorrelationEstimate {
    pub value: f64,
    pub trials: u64,
    pub standard_error: f64,
}

impl CorrelationEstimate {
    pub fn from_sum(sum_of_products: i64, trials: u64) -> Self {
        let value = sum_of_products as f64 / trials as f64;
        CorrelationEstimate {
            value,
            trials,
            standard_error: ((1.0 - value * value).max(0.0) / trials as f64).sqrt(),
        }
    }
}

/// Anything that produces a pair of ±1 outcomes for settings `(a, b)` on one trial.
pub trait CorrelationSource: Sync {
    fn signs(&self, axis_a: &AxisSpec, axis_b: &AxisSpec, trial_seed: u64) -> Result<(i8, i8)>;
}

/// The quantum engine: Alice's own outcome and Bob's answer as she hears it.
#[derive(Clone, Copy, Debug, Default)]
pub struct HangingOn;

impl CorrelationSource for HangingOn {
    fn signs(&self, axis_a: &AxisSpec, axis_b: &AxisSpec, trial_seed: u64) -> Result<(i8, i8)> {
        let out = epr_trial(axis_a, axis_b, trial_seed)?;
        Ok((sign(out.alice), sign(out.bob_reported_to_alice)))
    }
}

/// Local deterministic assignment: a hidden unit vector `l` is drawn per trial;
/// Alice answers `sign(a . l)`, Bob answers `-sign(b . l)`. Each party's answer
/// depends only on its own setting and the shared table, so `|S| <= 2`.
#[derive(Clone, Copy, Debug, Default)]
pub struct ClassicalHiddenSign;

impl CorrelationSource for ClassicalHiddenSign {
    fn signs(&self, axis_a: &AxisSpec, axis_b: &AxisSpec, trial_seed: u64) -> Result<(i8, i8)> {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(trial_seed, SALT_HIDDEN));
        let hidden = random_axis(&mut rng).unit_vector();
        let alice = if axis_a.unit_vector().dot(&hidden) >= 0.0 {
            1
        } else {
            -1
        };
        let bob = if axis_b.unit_vector().dot(&hidden) >= 0.0 {
            -1
        } else {
            1
        };
        Ok((alice, bob))
    }
}

fn sum_over_trials<F>(trials: u64, f: F) -> Result<i64>
where
    F: Fn(u64) -> Result<i64> + Send + Sync,
{
    if trials == 0 {
        return Err(Error::NoTrials);
    }
    (0..trials)
        .into_par_iter()
        .map(f)
        .try_reduce(|| 0, |a, b| Ok(a + b))
}

pub fn estimate_correlation_with<S: CorrelationSource>(
    source: &S,
    axis_a: &AxisSpec,
    axis_b: &AxisSpec,
    trials: u64,
    seed: u64,
) -> Result<CorrelationEstimate> {
    let sum = sum_over_trials(trials, |t| {
        let (sa, sb) = source.signs(axis_a, axis_b, derive_seed(seed, t))?;
        Ok(i64::from(sa * sb))
    })?;
    Ok(CorrelationEstimate::from_sum(sum, trials))
}

/// `E(a, b)`: mean of `s_a * s_b` over hanging-on EPR trials.
pub fn estimate_correlation(
    axis_a: &AxisSpec,
    axis_b: &AxisSpec,
    trials: u64,
    seed: u64,
) -> Result<CorrelationEstimate> {
    estimate_correlation_with(&HangingOn, axis_a, axis_b, trials, seed)
}

/// Settings of a CHSH experiment.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChshSettings {
    pub a: AxisSpec,
    pub a_prime: AxisSpec,
    pub b: AxisSpec,
    pub b_prime: AxisSpec,
}

impl Default for ChshSettings {
    /// Planar angles 0, π/2 for Alice and π/4, 3π/4 for Bob.
    fn default() -> Self {
        ChshSettings {
            a: AxisSpec::planar(0.0).expect("in range"),
            a_prime: AxisSpec::planar(PI / 2.0).expect("in range"),
            b: AxisSpec::planar(PI / 4.0).expect("in range"),
            b_prime: AxisSpec::planar(3.0 * PI / 4.0).expect("in range"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChshResult {
    pub s: f64,
    /// `E(a,b), E(a,b'), E(a',b), E(a',b')`.
    pub correlations: [CorrelationEstimate; 4],
    pub standard_error: f64,
}

/// `S = E(a,b) - E(a,b') + E(a',b) + E(a',b')` from four independent runs.
pub fn chsh_statistic_with<S: CorrelationSource>(
    source: &S,
    settings: &ChshSettings,
    trials_per_pair: u64,
    seed: u64,
) -> Result<ChshResult> {
    let pairs = [
        (settings.a, settings.b),
        (settings.a, settings.b_prime),
        (settings.a_prime, settings.b),
        (settings.a_prime, settings.b_prime),
    ];
    let mut correlations = [CorrelationEstimate::from_sum(0, 1); 4];
    for (k, (x, y)) in pairs.iter().enumerate() {
        correlations[k] =
            estimate_correlation_with(source, x, y, trials_per_pair, derive_seed(seed, k as u64))?;
    }
    let [e_ab, e_abp, e_apb, e_apbp] = correlations.map(|c| c.value);
    Ok(ChshResult {
        s: e_ab - e_abp + e_apb + e_apbp,
        correlations,
        standard_error: correlations
            .iter()
            .map(|c| c.standard_error * c.standard_error)
            .sum::<f64>()
            .sqrt(),
    })
}

pub fn chsh_statistic(
    settings: &ChshSettings,
    trials_per_pair: u64,
    seed: u64,
) -> Result<ChshResult> {
    chsh_statistic_with(&HangingOn, settings, trials_per_pair, seed)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MixtureResult {
    /// Frequency of both-"+" for the z-mixture of `|+->` and `|-+>`.
    pub mixture: f64,
    /// Same frequency for the singlet.
    pub singlet: f64,
    pub trials: u64,
}

fn both_plus_count(prep: Preparation, axis: &AxisSpec, trials: u64, seed: u64) -> Result<i64> {
    sum_over_trials(trials, |t| {
        let trial_seed = derive_seed(seed, t);
        let mut world = pair_world(prep, axis, axis, derive_seed(trial_seed, SALT_PREP))?;
        world.new_observer(ALICE, trial_seed)?;
        let a = perceive_checked(&mut world, ALICE, "A", false)?.outcome;
        let b = perceive_checked(&mut world, ALICE, "B", false)?.outcome;
        Ok(i64::from(a == 0 && b == 0))
    })
}

/// Both-"+" frequencies with both spins measured along `axis`.
pub fn mixture_same_spin_probability_along(
    axis: &AxisSpec,
    trials: u64,
    seed: u64,
) -> Result<MixtureResult> {
    let mixture = both_plus_count(Preparation::Mixture, axis, trials, seed)?;
    let singlet = both_plus_count(Preparation::Singlet, axis, trials, seed)?;
    Ok(MixtureResult {
        mixture: mixture as f64 / trials as f64,
        singlet: singlet as f64 / trials as f64,
        trials,
    })
}

/// Both-"+" frequencies along x: 1/4 for the mixture, 0 for the singlet.
pub fn mixture_same_spin_probability(trials: u64, seed: u64) -> Result<MixtureResult> {
    mixture_same_spin_probability_along(&AxisSpec::x(), trials, seed)
}

#[derive(Clone, Debug, PartialEq)]
pub struct NoSignalingReport {
    /// Bob's exact pointer marginal when Alice measured along `a`, along `a'`,
    /// not at all, and along `a` followed by Alice perceiving her pointer.
    pub marginals: [[f64; 2]; 4],
    pub deviation: f64,
}

pub fn no_signaling_report(
    axis_a: &AxisSpec,
    axis_a_prime: &AxisSpec,
    axis_b: &AxisSpec,
) -> Result<NoSignalingReport> {
    let layout = Arc::new(RegisterLayout::new([
        ("U", 2, RegisterKind::System),
        ("V", 2, RegisterKind::System),
        ("A", 2, RegisterKind::Apparatus),
        ("B", 2, RegisterKind::Apparatus),
    ])?);
    let base = StateVector::singlet(layout, "U", "V")?;
    let world_with = |alice_axis: Option<&AxisSpec>| -> Result<World> {
        let mut w = World::new(base.clone());
        if let Some(axis) = alice_axis {
            w.premeasure_along("U", axis, "A")?;
        }
        w.premeasure_along("V", axis_b, "B")?;
        Ok(w)
    };
    let bob_marginal = |w: &World| -> Result<[f64; 2]> {
        Ok([
            w.state().projector_weight([("B", 0)])?,
            w.state().projector_weight([("B", 1)])?,
        ])
    };

    let along_a = world_with(Some(axis_a))?;
    let along_a_prime = world_with(Some(axis_a_prime))?;
    let untouched = world_with(None)?;
    let mut perceived = world_with(Some(axis_a))?;
    perceived.new_observer(ALICE, 0)?;
    perceive_checked(&mut perceived, ALICE, "A", false)?;

    let marginals = [
        bob_marginal(&along_a)?,
        bob_marginal(&along_a_prime)?,
        bob_marginal(&untouched)?,
        bob_marginal(&perceived)?,
    ];
    let mut deviation: f64 = 0.0;
    for x in &marginals {
        for y in &marginals {
            deviation = deviation.max((x[0] - y[0]).abs()).max((x[1] - y[1]).abs());
        }
    }
    Ok(NoSignalingReport {
        marginals,
        deviation,
    })
}

/// Largest change of Bob's marginal across Alice's choices; exactly zero up to rounding.
pub fn no_signaling_deviation(
    axis_a: &AxisSpec,
    axis_a_prime: &AxisSpec,
    axis_b: &AxisSpec,
) -> Result<f64> {
    Ok(no_signaling_report(axis_a, axis_a_prime, axis_b)?.deviation)
}

fn branch_still_possible(world: &World, observer: &str) -> Result<bool> {
    let obs = world.observer(observer)?;
    Ok(world.state().commitment_probability(obs.commitments())? > ZERO_PROBABILITY)
}

/// One conviviality trial; returns the number of contradictions found (0 or more).
fn conviviality_trial(prep: Preparation, trial_seed: u64) -> Result<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(trial_seed, SALT_AXES));
    let axis_a = random_axis(&mut rng);
    let same_axis = rng.gen::<bool>();
    let axis_b = if same_axis {
        axis_a
    } else {
        random_axis(&mut rng)
    };
    let mut violations = 0;

    // Two particles, each observer reads their own side, then each asks the other.
    let mut world = pair_world(prep, &axis_a, &axis_b, derive_seed(trial_seed, SALT_PREP))?;
    world.new_observer(ALICE, trial_seed)?;
    world.new_observer(BOB, trial_seed)?;
    let alice = perceive_checked(&mut world, ALICE, "O_A", false)?.outcome;
    let bob = perceive_checked(&mut world, BOB, "O_B", false)?.outcome;
    let heard_by_alice = perceive_checked(&mut world, ALICE, "O_B", true)?.outcome;
    let heard_by_bob = perceive_checked(&mut world, BOB, "O_A", true)?.outcome;
    for who in [ALICE, BOB] {
        if !branch_still_possible(&world, who)? {
            violations += 1;
        }
    }
    if prep == Preparation::Singlet && same_axis {
        violations += u64::from(heard_by_alice != 1 - alice);
        violations += u64::from(heard_by_bob != 1 - bob);
    }

    // One electron, one apparatus, both observers read it, then each asks the other.
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(trial_seed, SALT_SHARED));
    let axis = random_axis(&mut rng);
    let initial = match prep {
        Preparation::Singlet => {
            let s = StateVector::product(shared_layout(), &[0, 0, 0, 0])?;
            s.apply_unitary(&rotation_unitary(
                &random_axis(&mut rng),
                TAU * rng.gen::<f64>(),
                "S",
            ))?
        }
        Preparation::Mixture => {
            StateVector::product(shared_layout(), &[usize::from(rng.gen::<bool>()), 0, 0, 0])?
        }
    };
    let mut shared = World::new(initial);
    shared.premeasure_along("S", &axis, "A")?;
    shared.premeasure_computational("A", "O_A")?;
    shared.premeasure_computational("A", "O_B")?;
    shared.new_observer(ALICE, trial_seed)?;
    shared.new_observer(BOB, trial_seed)?;
    let alice = perceive_checked(&mut shared, ALICE, "O_A", false)?.outcome;
    let bob = perceive_checked(&mut shared, BOB, "O_B", false)?.outcome;
    violations += u64::from(perceive_checked(&mut shared, ALICE, "O_B", true)?.outcome != alice);
    violations += u64::from(perceive_checked(&mut shared, BOB, "O_A", true)?.outcome != bob);
    Ok(violations)
}

pub fn conviviality_violations_with(prep: Preparation, trials: u64, seed: u64) -> Result<u64> {
    let total = sum_over_trials(trials, |t| {
        conviviality_trial(prep, derive_seed(seed, t)).map(|v| v as i64)
    })?;
    Ok(total as u64)
}

/// Contradictions between what an observer hears from another and their own branch,
/// over randomized-axis trials.
pub fn conviviality_violations(trials: u64, seed: u64) -> Result<u64> {
    conviviality_violations_with(Preparation::Singlet, trials, seed)
}

fn repeatability_trial(trial_seed: u64) -> Result<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(trial_seed, SALT_AXES));
    let axis_a = random_axis(&mut rng);
    let axis_b = random_axis(&mut rng);
    let mut world = pair_world(Preparation::Singlet, &axis_a, &axis_b, trial_seed)?;
    world.new_observer(ALICE, trial_seed)?;
    world.new_observer(BOB, trial_seed)?;
    let first = [
        perceive_checked(&mut world, ALICE, "O_A", false)?.outcome,
        perceive_checked(&mut world, BOB, "O_B", false)?.outcome,
    ];
    let draws = [world.observer(ALICE)?.draws(), world.observer(BOB)?.draws()];

    // Dynamics on registers nobody committed to.
    world.apply_unitary(&rotation_unitary(
        &random_axis(&mut rng),
        TAU * rng.gen::<f64>(),
        "U",
    ))?;
    world.apply_unitary(&rotation_unitary(
        &random_axis(&mut rng),
        TAU * rng.gen::<f64>(),
        "V",
    ))?;

    let mut violations = 0;
    for (k, (who, reg)) in [(ALICE, "O_A"), (BOB, "O_B")].into_iter().enumerate() {
        let again = perceive_checked(&mut world, who, reg, false)?.outcome;
        violations += u64::from(again != first[k]);
        violations += u64::from(world.observer(who)?.draws() != draws[k]);
    }
    // Looking at the apparatus itself is a daughter branch of the brain record.
    violations += u64::from(perceive_checked(&mut world, ALICE, "A", false)?.outcome != first[0]);
    violations += u64::from(perceive_checked(&mut world, BOB, "B", false)?.outcome != first[1]);
    Ok(violations)
}

/// Mismatches when observers repeat a measurement they already hung on to.
pub fn repeatability_violations(trials: u64, seed: u64) -> Result<u64> {
    let total = sum_over_trials(trials, |t| {
        repeatability_trial(derive_seed(seed, t)).map(|v| v as i64)
    })?;
    Ok(total as u64)
}
