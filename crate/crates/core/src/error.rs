use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("register `{0}` is not part of the layout")]
    UnknownRegister(String),

    #[error("register `{0}` is declared more than once")]
    DuplicateRegister(String),

    #[error("register `{name}` has dimension {dim}; registers need dimension >= 2")]
    DimensionTooSmall { name: String, dim: usize },

    #[error("layout needs {needed} amplitudes, above the cap of {cap}")]
    DimensionCap { needed: usize, cap: usize },

    #[error("index {index} out of range for register `{register}` (dimension {dim})")]
    IndexOutOfRange {
        register: String,
        index: usize,
        dim: usize,
    },

    #[error("expected {expected} basis indices, got {got}")]
    IndexCount { expected: usize, got: usize },

    #[error("register `{register}` must be a qubit (dimension 2), found dimension {dim}")]
    NotQubit { register: String, dim: usize },

    #[error("registers must be distinct, `{0}` used twice")]
    RepeatedTarget(String),

    #[error("operator is {rows}x{cols}, targets need {expected}x{expected}")]
    ShapeMismatch {
        rows: usize,
        cols: usize,
        expected: usize,
    },

    #[error("operator is not unitary (max |U^dagger U - I| = {deviation:e})")]
    NotUnitary { deviation: f64 },

    #[error("non-finite amplitude")]
    NonFinite,

    #[error("state norm {norm} deviates from 1")]
    NotNormalized { norm: f64 },

    #[error("axis angles out of range (theta = {theta}, phi = {phi})")]
    AxisOutOfRange { theta: f64, phi: f64 },

    #[error("pointer `{pointer}` (dimension {pointer_dim}) cannot record `{system}` (dimension {system_dim})")]
    PointerTooSmall {
        system: String,
        pointer: String,
        system_dim: usize,
        pointer_dim: usize,
    },

    #[error("branch structure violated: register `{register}` carries a commitment by observer `{observer}`")]
    BranchStructureViolated { observer: String, register: String },

    #[error("observer `{0}` already exists")]
    DuplicateObserver(String),

    #[error("no observer named `{0}`")]
    UnknownObserver(String),

    #[error(
        "asking about an unrecorded result: `{0}` is not a brain register fed by a premeasurement"
    )]
    UnrecordedResult(String),

    #[error(
        "internal inconsistency: commitments of `{observer}` have probability {probability:e}"
    )]
    InconsistentCommitments { observer: String, probability: f64 },

    #[error("sampled a branch of negligible probability {0:e}")]
    NegligibleBranch(f64),

    #[error("{tuples} outcome tuples exceed the enumeration cap of {cap}")]
    EnumerationCap { tuples: usize, cap: usize },

    #[error("global state changed during perception")]
    StateDisturbed,

    #[error("state used before it was initialized")]
    Uninitialized,

    #[error("trials must be at least 1")]
    NoTrials,
}
