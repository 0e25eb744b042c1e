//! Layout synthesis for dynamically reconfigurable neutral-atom arrays (DPQA).
//!
//! A DPQA machine holds one atom per optical trap. Stationary traps come from
//! a spatial light modulator (SLM); mobile traps form a rectangular grid
//! generated by a crossed 2D acousto-optic deflector (AOD) whose rows and
//! columns move rigidly and may never cross. A plane-wide Rydberg pulse
//! entangles every pair of atoms within the blockade radius, so a circuit is
//! executed as a sequence of *stages*: place/move atoms, fire the laser,
//! repeat.
//!
//! This crate compiles a two-qubit-gate circuit onto that machine:
//!
//! * [`circuit`] — circuit IR, benchmark generation and structural analyses,
//! * [`arch`] — machine description and discretization constants,
//! * [`model`]/[`encode`] — the constraint model over discrete per-stage
//!   variables (site indices, AOD row/column indices, array flags, gate
//!   stages),
//! * [`backend`]/[`sat`]/[`lower`] — satisfiability backends: a built-in
//!   finite-domain CDCL solver and an external SMT-LIB2 process backend,
//! * [`driver`] — the depth-minimal solve loop and the greedy peeling hybrid,
//! * [`codegen`] — lowering of a solution to the five-instruction machine
//!   program with continuous coordinates,
//! * [`verifier`] — an independent physics-rule checker for programs,
//! * [`fidelity`] — timing and infidelity estimates.
//!
//! The `dpqa` binary wires these together (`compile`, `verify`, `fidelity`,
//! `bench`, `animate`).

pub mod arch;
pub mod backend;
pub mod circuit;
pub mod codegen;
pub mod driver;
pub mod encode;
pub mod fidelity;
pub mod lower;
pub mod model;
pub mod sat;
pub mod smtlib;
pub mod verifier;

pub use arch::{ArchSpec, PhysicalParams};
pub use circuit::{Circuit, Gate, InteractionMap};
pub use codegen::{Instruction, Program};
pub use driver::{Assignment, SolveOutcome};
pub use fidelity::FidelityReport;
pub use verifier::Violation;
