//! Soft-error tolerance analysis and optimization for combinational
//! gate-level netlists.
//!
//! The crate is organized bottom-up:
//!
//! - [`netlist`]: `.bench` parsing, graph services, path enumeration.
//! - [`gatelib`]: per-gate characterization tables (delay, generated glitch
//!   width, energies, input capacitance) with multilinear interpolation.
//! - [`aserta`]: unreliability estimation from logical, electrical and
//!   latching-window masking.
//! - [`timing`]: arrival times, the path/gate topology matrix, and an exact
//!   potential-based parameterization of its null-space.
//! - [`sertopt`]: library matching and pattern search over null-space
//!   potentials to reduce unreliability at unchanged path delays.

// `!(x > 0.0)` style checks deliberately reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod aserta;
pub mod gatelib;
pub mod netlist;
#[cfg(feature = "oracle")]
pub mod oracle;
pub mod output;
pub mod par;
pub mod sertopt;
pub mod timing;

pub use aserta::{analyze, AnalysisConfig, Report};
pub use gatelib::{CharTable, GateParams, LibraryGrid, ModelConstants};
pub use netlist::{Circuit, GateId, GateKind};
pub use par::Exec;
