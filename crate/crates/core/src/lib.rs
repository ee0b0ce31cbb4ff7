//! Training and benchmarking toolkit for quantum circuit Born machines.
//!
//! Shallow circuits built from the ion-trap native gates (`Rz`, `Rx`, `XX`)
//! are simulated exactly, trained against classical data sets with a
//! global-best particle swarm, and scored with the qBAS metric, KL divergence
//! and average two-qubit entanglement entropy.

pub mod basis;
pub mod bootstrap;
pub mod circuit;
pub mod config;
pub mod costs;
pub mod datasets;
pub mod distribution;
pub mod entanglement;
pub mod error;
pub mod pso;
pub mod qbas;
pub mod rng;
pub mod runner;
pub mod statevector;
pub mod transport;

pub use basis::SpinString;
pub use circuit::{CircuitTemplate, ParameterVector, Topology};
pub use config::{CircuitSpec, ExperimentConfig};
pub use costs::{CostConfig, CostKind};
pub use datasets::{Dataset, Generator, IsingInstance};
pub use distribution::EmpiricalDistribution;
pub use error::{Error, Result};
pub use statevector::QuantumState;
pub use runner::{run_ddqcl, RunRecord};
