//! Reference dynamics used only as ground truth: textbook projective collapse
//! and exhaustive relative-state branch enumeration.
//!
//! Nothing outside this module ever projects a state.

use rand::Rng;

use crate::error::{Error, Result};
use crate::qstate::{StateVector, ZERO_PROBABILITY};

pub const ENUMERATION_CAP: usize = 1_000_000;

/// Joint outcomes over an ordered register list with their Born probabilities.
#[derive(Clone, Debug, PartialEq)]
pub struct BranchTable {
    registers: Vec<String>,
    entries: Vec<(Vec<usize>, f64)>,
}

impl BranchTable {
    pub fn registers(&self) -> &[String] {
        &self.registers
    }

    pub fn entries(&self) -> &[(Vec<usize>, f64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Probability of a tuple; omitted tuples have probability zero.
    pub fn probability(&self, outcomes: &[usize]) -> f64 {
        self.entries
            .iter()
            .find(|(t, _)| t.as_slice() == outcomes)
            .map_or(0.0, |(_, p)| *p)
    }

    pub fn total(&self) -> f64 {
        self.entries.iter().map(|(_, p)| p).sum()
    }
}

/// Every joint outcome of `registers` with probability `|| P_t psi ||^2`, zero branches omitted.
pub fn enumerate_branches(state: &StateVector, registers: &[&str]) -> Result<BranchTable> {
    let dims = registers
        .iter()
        .map(|r| state.layout().register(r).map(|reg| reg.dim))
        .collect::<Result<Vec<_>>>()?;
    let tuples = dims
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .unwrap_or(usize::MAX);
    if tuples > ENUMERATION_CAP {
        return Err(Error::EnumerationCap {
            tuples,
            cap: ENUMERATION_CAP,
        });
    }
    let mut entries = Vec::new();
    let mut tuple = vec![0usize; dims.len()];
    for _ in 0..tuples {
        let p = state.projector_weight(registers.iter().copied().zip(tuple.iter().copied()))?;
        if p >= ZERO_PROBABILITY {
            entries.push((tuple.clone(), p));
        }
        // odometer, last register fastest
        for k in (0..tuple.len()).rev() {
            tuple[k] += 1;
            if tuple[k] < dims[k] {
                break;
            }
            tuple[k] = 0;
        }
    }
    Ok(BranchTable {
        registers: registers.iter().map(|r| r.to_string()).collect(),
        entries,
    })
}

/// Projective measurement of `register`: sample by the Born rule, then project and renormalize.
pub fn collapse_measure<R: Rng + ?Sized>(
    state: &StateVector,
    register: &str,
    rng: &mut R,
) -> Result<(usize, StateVector)> {
    let dim = state.layout().register(register)?.dim;
    let marginal = (0..dim)
        .map(|o| state.projector_weight([(register, o)]))
        .collect::<Result<Vec<_>>>()?;
    let u: f64 = rng.gen::<f64>() * marginal.iter().sum::<f64>();
    let mut acc = 0.0;
    let mut outcome = dim - 1;
    for (o, p) in marginal.iter().enumerate() {
        acc += p;
        if u < acc {
            outcome = o;
            break;
        }
    }
    if marginal[outcome] < ZERO_PROBABILITY {
        return Err(Error::NegligibleBranch(marginal[outcome]));
    }
    Ok((outcome, state.project(register, outcome)?))
}

/// Collapse each register in turn, returning the outcome tuple.
pub fn sequential_collapse_run<R: Rng + ?Sized>(
    state: &StateVector,
    registers: &[&str],
    rng: &mut R,
) -> Result<Vec<usize>> {
    let mut current = state.clone();
    let mut outcomes = Vec::with_capacity(registers.len());
    for reg in registers {
        let (o, next) = collapse_measure(&current, reg, rng)?;
        outcomes.push(o);
        current = next;
    }
    Ok(outcomes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::premeasure::{premeasure_along, premeasure_computational};
    use crate::qstate::{axis_basis_unitary, AxisSpec, RegisterKind, RegisterLayout};
    use approx::assert_abs_diff_eq;
    use num_complex::Complex64;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn singlet_with_pointers() -> StateVector {
        let l = Arc::new(
            RegisterLayout::new([
                ("U", 2, RegisterKind::System),
                ("V", 2, RegisterKind::System),
                ("A", 2, RegisterKind::Apparatus),
                ("B", 2, RegisterKind::Apparatus),
            ])
            .unwrap(),
        );
        let s = StateVector::singlet(l, "U", "V").unwrap();
        let (s, _) = premeasure_along(&s, "U", &AxisSpec::z(), "A", 0).unwrap();
        premeasure_along(&s, "V", &AxisSpec::z(), "B", 1).unwrap().0
    }

    #[test]
    fn three_register_chain_branches() {
        // alpha = 0.6, beta = 0.8 copied into apparatus then observer.
        let l = Arc::new(
            RegisterLayout::new([
                ("S", 2, RegisterKind::System),
                ("A", 2, RegisterKind::Apparatus),
                ("O", 2, RegisterKind::Brain),
            ])
            .unwrap(),
        );
        let mut amps = vec![c(0.0); 8];
        amps[0] = c(0.6);
        amps[4] = c(0.8);
        let s = StateVector::from_amplitudes(l, amps).unwrap();
        let (s, _) = premeasure_along(&s, "S", &AxisSpec::z(), "A", 0).unwrap();
        let (s, _) = premeasure_computational(&s, "A", "O", 1).unwrap();
        let table = enumerate_branches(&s, &["S", "A", "O"]).unwrap();
        assert_eq!(table.len(), 2);
        assert_abs_diff_eq!(table.probability(&[0, 0, 0]), 0.36, epsilon = 1e-12);
        assert_abs_diff_eq!(table.probability(&[1, 1, 1]), 0.64, epsilon = 1e-12);
    }

    #[test]
    fn singlet_pointer_branches() {
        let table = enumerate_branches(&singlet_with_pointers(), &["A", "B"]).unwrap();
        assert_eq!(table.entries().len(), 2);
        assert_abs_diff_eq!(table.probability(&[0, 1]), 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(table.probability(&[1, 0]), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn product_state_single_branch() {
        let l = Arc::new(
            RegisterLayout::new([
                ("a", 3, RegisterKind::System),
                ("b", 2, RegisterKind::System),
            ])
            .unwrap(),
        );
        let s = StateVector::product(l, &[2, 1]).unwrap();
        let table = enumerate_branches(&s, &["b", "a"]).unwrap();
        assert_eq!(table.entries(), &[(vec![1, 2], 1.0)]);
    }

    #[test]
    fn enumeration_cap() {
        let regs: Vec<(String, usize, RegisterKind)> = (0..20)
            .map(|i| (format!("q{i}"), 2, RegisterKind::System))
            .collect();
        let l = Arc::new(RegisterLayout::new(regs).unwrap());
        let s = StateVector::product(l, &[0; 20]).unwrap();
        let names: Vec<String> = (0..20).map(|i| format!("q{i}")).collect();
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        assert!(matches!(
            enumerate_branches(&s, &refs),
            Err(Error::EnumerationCap { .. })
        ));
    }

    #[test]
    fn collapse_of_rotated_singlet_gives_product() {
        let l = Arc::new(
            RegisterLayout::new([
                ("U", 2, RegisterKind::System),
                ("V", 2, RegisterKind::System),
            ])
            .unwrap(),
        );
        let axis = AxisSpec::new(0.9, 2.5).unwrap();
        let s = StateVector::singlet(l, "U", "V").unwrap();
        // measure along the axis: rotate both into the axis basis, then project.
        let s = s
            .apply_unitary(&axis_basis_unitary(&axis, "U"))
            .unwrap()
            .apply_unitary(&axis_basis_unitary(&axis, "V"))
            .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        loop {
            let (o, post) = collapse_measure(&s, "U", &mut rng).unwrap();
            if o == 0 {
                assert_abs_diff_eq!(
                    post.projector_weight([("U", 0), ("V", 1)]).unwrap(),
                    1.0,
                    epsilon = 1e-12
                );
                break;
            }
        }
    }

    #[test]
    fn collapse_on_basis_state_and_repeat() {
        let s = singlet_with_pointers();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let (o, post) = collapse_measure(&s, "A", &mut rng).unwrap();
        let (o2, post2) = collapse_measure(&post, "A", &mut rng).unwrap();
        assert_eq!(o, o2);
        assert!(post.max_deviation(&post2) < 1e-15);
        let (ob, _) = collapse_measure(&post, "B", &mut rng).unwrap();
        assert_eq!(ob, 1 - o);
    }

    #[test]
    fn sequential_run_frequencies() {
        let s = singlet_with_pointers();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 100_000;
        let zeros = (0..n)
            .filter(|_| sequential_collapse_run(&s, &["A"], &mut rng).unwrap()[0] == 0)
            .count();
        let f = zeros as f64 / n as f64;
        assert!((f - 0.5).abs() < 0.005, "{f}");
    }

    #[test]
    fn sequential_run_definite_registers() {
        let l = Arc::new(
            RegisterLayout::new([
                ("a", 2, RegisterKind::System),
                ("b", 3, RegisterKind::System),
            ])
            .unwrap(),
        );
        let s = StateVector::product(l, &[1, 2]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..10 {
            assert_eq!(
                sequential_collapse_run(&s, &["b", "a"], &mut rng).unwrap(),
                vec![2, 1]
            );
        }
    }
}
