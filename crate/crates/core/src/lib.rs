//! Measurement without collapse.
//!
//! The global state evolves only unitarily. Observers "hang on" to branches of
//! it: each perception samples one outcome by the Born rule conditioned on
//! everything that observer has already perceived, and never touches the
//! amplitudes. Textbook collapse lives only in [`oracle`], as the reference
//! the hanging-on statistics are checked against.

pub mod cli;
pub mod error;
pub mod observer;
pub mod oracle;
pub mod premeasure;
pub mod qstate;
pub mod scenarios;
pub mod script;

pub use error::{Error, Result};
pub use observer::{Awareness, Observer, World};
pub use qstate::{AxisSpec, Commitment, RegisterKind, RegisterLayout, StateVector, UnitaryOp};
