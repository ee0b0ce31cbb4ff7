//! Declarative training experiments, read from TOML.
//!
//! ```toml
//! seed = 7
//! shots = 1000
//! iterations = 100
//! restarts = 25
//!
//! [dataset]
//! kind = "bas"
//! n = 2
//! m = 2
//! size = 1000
//! seed = 1007
//!
//! [circuit]
//! num_qubits = 4
//! layers = 2
//! topology = "all"
//!
//! [cost]
//! kind = "nll"
//! epsilon = 1e-8
//!
//! [swarm]
//! inertia = 0.5
//! ```

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::circuit::{CircuitTemplate, Topology};
use crate::costs::CostConfig;
use crate::datasets::{Generator, MAX_THERMAL_SPINS};
use crate::error::{Error, Result};
use crate::pso::SwarmConfig;

pub const DEFAULT_SHOTS: usize = 1000;
pub const DEFAULT_DATASET_SIZE: usize = 1000;
pub const DEFAULT_RESTARTS: usize = 25;

fn default_shots() -> usize {
    DEFAULT_SHOTS
}

fn default_dataset_size() -> usize {
    DEFAULT_DATASET_SIZE
}

fn default_iterations() -> usize {
    crate::pso::DEFAULT_MAX_ITERATIONS
}

fn default_restarts() -> usize {
    DEFAULT_RESTARTS
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSpec {
    #[serde(flatten)]
    pub generator: Generator,
    #[serde(default = "default_dataset_size")]
    pub size: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitSpec {
    pub num_qubits: usize,
    pub layers: usize,
    pub topology: Topology,
}

impl CircuitSpec {
    pub fn template(&self) -> Result<CircuitTemplate> {
        CircuitTemplate::new(self.num_qubits, self.layers, self.topology)
    }
}

/// Any field left out keeps the swarm default.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SwarmOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cognition: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub social: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inertia: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_step: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub num_particles: Option<usize>,
    /// 0 disables the stall rule.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub patience: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Restart `r` trains with seed `seed + r`.
    pub seed: u64,
    #[serde(default = "default_shots")]
    pub shots: usize,
    #[serde(default = "default_iterations")]
    pub iterations: usize,
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    /// Record the exact KL divergence of the global best after every iteration.
    #[serde(default = "default_true")]
    pub log_kl: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    pub dataset: DatasetSpec,
    pub circuit: CircuitSpec,
    #[serde(default)]
    pub cost: CostConfig,
    #[serde(default)]
    pub swarm: SwarmOverrides,
}

impl ExperimentConfig {
    /// A config with defaults for everything but the data and the circuit.
    pub fn new(generator: Generator, dataset_seed: u64, circuit: CircuitSpec, seed: u64) -> Self {
        ExperimentConfig {
            seed,
            shots: DEFAULT_SHOTS,
            iterations: default_iterations(),
            restarts: DEFAULT_RESTARTS,
            log_kl: true,
            output_dir: None,
            dataset: DatasetSpec {
                generator,
                size: DEFAULT_DATASET_SIZE,
                seed: dataset_seed,
            },
            circuit,
            cost: CostConfig::default(),
            swarm: SwarmOverrides::default(),
        }
    }

    /// Parses and validates.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("experiment configs serialize to TOML")
    }

    /// SHA-256 of the canonical TOML rendering, hex encoded. The output
    /// directory is not part of the hash.
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.output_dir = None;
        hex::encode(Sha256::digest(canonical.to_toml().as_bytes()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.shots == 0 {
            return Err(Error::config("shots", "must be at least 1"));
        }
        if self.restarts == 0 {
            return Err(Error::config("restarts", "must be at least 1"));
        }
        if self.iterations == 0 {
            return Err(Error::config("iterations", "must be at least 1"));
        }
        if self.restarts as u64 > u64::MAX - self.seed {
            return Err(Error::config("seed", "seed + restarts overflows"));
        }
        if self.dataset.size == 0 {
            return Err(Error::config("dataset.size", "must be at least 1"));
        }
        match self.dataset.generator {
            Generator::Bas { n, m } => {
                if n < 2 {
                    return Err(Error::config("dataset.n", format!("must be at least 2, got {n}")));
                }
                if m < 2 {
                    return Err(Error::config("dataset.m", format!("must be at least 2, got {m}")));
                }
            }
            Generator::Ferromagnet { num_qubits } => {
                if num_qubits < 2 {
                    return Err(Error::config("dataset.num_qubits", "must be at least 2"));
                }
            }
            Generator::Thermal {
                num_qubits,
                temperature,
                ..
            } => {
                if !(1..=MAX_THERMAL_SPINS).contains(&num_qubits) {
                    return Err(Error::config(
                        "dataset.num_qubits",
                        format!("must lie in 1..={MAX_THERMAL_SPINS}, got {num_qubits}"),
                    ));
                }
                if !(temperature.is_finite() && temperature > 0.0) {
                    return Err(Error::config(
                        "dataset.temperature",
                        format!("must be positive, got {temperature}"),
                    ));
                }
            }
        }
        let data_qubits = self.dataset.generator.num_qubits();
        if self.circuit.num_qubits != data_qubits {
            return Err(Error::config(
                "circuit.num_qubits",
                format!("is {} but the data set has {data_qubits} variables", self.circuit.num_qubits),
            ));
        }
        if self.circuit.layers == 0 {
            return Err(Error::config("circuit.layers", "must be at least 1"));
        }
        let template = self
            .circuit
            .template()
            .map_err(|e| Error::config("circuit", e.to_string()))?;
        self.cost
            .validate()
            .map_err(|e| Error::config("cost.epsilon", e.to_string()))?;
        self.swarm_config(template.param_count(), self.seed)
            .validate()
            .map_err(|e| Error::config("swarm", e.to_string()))?;
        Ok(())
    }

    pub fn restart_seed(&self, restart: usize) -> u64 {
        self.seed + restart as u64
    }

    pub fn swarm_config(&self, param_dim: usize, rng_seed: u64) -> SwarmConfig {
        let mut c = SwarmConfig::default_for(param_dim);
        let o = &self.swarm;
        c.cognition = o.cognition.unwrap_or(c.cognition);
        c.social = o.social.unwrap_or(c.social);
        c.inertia = o.inertia.unwrap_or(c.inertia);
        c.max_step = o.max_step.unwrap_or(c.max_step);
        c.num_particles = o.num_particles.unwrap_or(c.num_particles);
        if let Some(p) = o.patience {
            c.patience = (p > 0).then_some(p);
        }
        c.max_iterations = self.iterations;
        c.rng_seed = rng_seed;
        c
    }

    pub fn seed_ledger(&self) -> SeedLedger {
        SeedLedger {
            base_seed: self.seed,
            dataset_seed: self.dataset.seed,
            instance_seed: match self.dataset.generator {
                Generator::Thermal { instance_seed, .. } => Some(instance_seed),
                _ => None,
            },
            restart_seeds: (0..self.restarts).map(|r| self.restart_seed(r)).collect(),
        }
    }
}

/// Every seed an experiment consumes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedLedger {
    pub base_seed: u64,
    pub dataset_seed: u64,
    pub instance_seed: Option<u64>,
    pub restart_seeds: Vec<u64>,
}

impl fmt::Display for SeedLedger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "base={} dataset={}", self.base_seed, self.dataset_seed)?;
        if let Some(s) = self.instance_seed {
            write!(f, " instance={s}")?;
        }
        match (self.restart_seeds.first(), self.restart_seeds.last()) {
            (Some(a), Some(b)) if a != b => write!(f, " restarts={a}..={b}"),
            (Some(a), _) => write!(f, " restarts={a}"),
            _ => Ok(()),
        }
    }
}
