//! Coherent reversal of a uniaxial spin S by a ladder of simultaneous
//! resonant circularly polarized drives.
//!
//! Module map:
//! - [`spin`]: exact spin quantum numbers, operator algebra, basis states
//! - [`linalg`]: dense complex matrices and the Hermitian eigensolver
//! - [`hamiltonian`]: static anisotropy model, ladder frequencies, drive terms
//! - [`protocols`]: named drive protocols and pulse timing
//! - [`integrator`]: fixed-step unitary time evolution
//! - [`analysis`]: observables, reversal periods, sweeps
//! - [`acceptance`]: the reproduction checklist

// `!(x > 0.0)` is used on purpose: it rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acceptance;
pub mod analysis;
pub mod error;
pub mod hamiltonian;
pub mod integrator;
pub mod linalg;
pub mod protocols;
pub mod spin;

pub use analysis::{ObservableSeries, PeriodEstimate, ProtocolKind, RunSpec, SweepAxis};
pub use error::{Error, Result};
pub use hamiltonian::{DriveForm, DriveSpec, Frame, StaticModel};
pub use integrator::{IntegratorConfig, Method, Trajectory};
pub use linalg::{ComplexMatrix, StateVector};
pub use protocols::DriveProtocol;
pub use spin::{HalfInt, SpinOperatorSet, SpinQuantumNumber};
