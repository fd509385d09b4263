//! Topology-aware synthesis of short-depth quantum circuits.
//!
//! Given a target unitary, the toolkit searches over parameterized
//! circuit structures (an initial U3 layer plus two-qubit expansion
//! layers placed on a coupling graph) and instantiates gate parameters
//! numerically until the circuit is within a distance epsilon of the
//! target. Post-passes re-synthesize windows around prefix seams and
//! delete U3 gates that turn out not to contribute.

pub mod benchmarks;
pub mod circuit;
pub mod error;
pub mod gates;
pub mod matrix;
pub mod optimize;
pub mod postprocess;
pub mod search;
pub mod topology;

pub use circuit::{CircuitStructure, ExpansionLayer, PlacedCircuit, U3Slot};
pub use error::{Error, Result};
pub use gates::{EntanglerSet, GateKind};
pub use matrix::{ComplexMatrix, UnitaryMatrix};
pub use optimize::{MultistartConfig, OptimizerResult};
pub use search::{LeapConfig, SearchMode, SynthesisReport};
pub use topology::CouplingGraph;
