//! Exact sampling from noisy Clifford and IQP+CNOT circuits.
//!
//! Single-qubit noise interleaved with the circuit layers percolates in the
//! Heisenberg picture: most Pauli observables are killed by some noise event,
//! the handful that survive have support confined to small clusters of qubits,
//! and the output distribution factorizes over those clusters. This crate
//! walks that pipeline end to end — sample a noise realization, propagate the
//! fired noise operators to the input frame, find the surviving Pauli group,
//! split it into lightcone-connected components, and sample each component's
//! marginal chain exactly. A dense density-matrix oracle, usable up to a
//! dozen qubits, backs every step with brute-force cross-checks.
//!
//! ## Module map
//!
//! - [`gf2`]: bit-packed GF(2) vectors, matrices, and elimination.
//! - [`pauli`]: Pauli strings in binary symplectic form with exact phases.
//! - [`circuit`]: Clifford circuits, lattice geometry, text format,
//!   Heisenberg conjugation, lightcones.
//! - [`noise`]: noise models, sampled error configurations, backward
//!   propagation, survival probabilities, Pauli-channel event decomposition.
//! - [`clifford_sampler`]: the component-factorized exact sampler for
//!   Clifford circuits.
//! - [`iqp_sampler`]: the sparse-state exact sampler for IQP+CNOT circuits.
//! - [`oracle`]: dense density-matrix reference simulation and the
//!   combinatorial bound evaluators.
//! - [`diagnostics`]: percolation statistics, sublattice coarse-graining,
//!   depth thresholds.
//! - [`verify`]: the acceptance battery run by tests and the `verify`
//!   subcommand.
//!
//! Shot loops are data-parallel via rayon when the `parallel` feature
//! (default) is enabled; a sequential fallback produces bit-identical output.

pub mod circuit;
pub mod clifford_sampler;
pub mod diagnostics;
pub mod exec;
pub mod gf2;
pub mod iqp_sampler;
pub mod noise;
pub mod oracle;
pub mod pauli;
pub mod report;
pub mod rng;
pub mod synth;
pub mod verify;

mod smallmat;

/// Errors surfaced by parsing, validation, and capacity checks.
///
/// Contract violations inside the algebra (mismatched lengths, out-of-range
/// indices) panic via `assert!` instead — they are programmer errors, not
/// run-time conditions.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Circuit or config text failed to parse. Lines are 1-based.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    /// A well-formed input violates a semantic requirement.
    #[error("invalid input: {0}")]
    Invalid(String),
    /// An operation was asked to exceed a documented size cap.
    #[error("{what} exceeds cap: {got} > {limit}")]
    CapExceeded {
        what: &'static str,
        limit: usize,
        got: usize,
    },
    /// A computed probability left [0, 1] by more than the tolerance.
    /// Signals an internal bug, never a property of the input.
    #[error("internal tolerance violation in {context}: {value}")]
    Tolerance { context: &'static str, value: f64 },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }
}

pub use circuit::{
    BlochRotation, CliffordCircuit, CliffordGate, GateKind, Geometry, MeasurementBasis,
    ProductState,
};
pub use clifford_sampler::{run_shots, SamplerConfig, ShotRecord};
pub use gf2::{BitVector, ColumnOp, Gf2Matrix};
pub use iqp_sampler::{run_iqp_shots, IqpCircuit, IqpGate};
pub use noise::{ErrorConfiguration, NoiseModel, SiteEvent};
pub use pauli::{PauliOp, PauliString};
