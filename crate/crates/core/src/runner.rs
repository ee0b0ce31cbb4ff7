//! The training loop and the reproduction experiments built on it.
//!
//! Training samples the circuit with a finite number of shots and scores the
//! histogram against the data set. The KL divergence recorded alongside is
//! exact: it compares the target distribution with the Born probabilities
//! of the current global best and never feeds back into training.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use tempfile::NamedTempFile;

use crate::bootstrap::{self, BootstrapSummary};
use crate::circuit::{build_ghz_recipe, CircuitTemplate, ParameterVector, Topology};
use crate::config::{CircuitSpec, ExperimentConfig, SeedLedger};
use crate::costs::kl_divergence;
use crate::datasets::{draw_dataset, Dataset, Generator};
use crate::distribution::EmpiricalDistribution;
use crate::error::{Error, Result};
use crate::pso::{self, EvalContext, StopReason};
use crate::qbas::{self, ScoreReport};
use crate::rng;
use crate::statevector::QuantumState;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    /// 1-based.
    pub iteration: usize,
    pub best_cost: f64,
    /// Exact `D_KL(target ‖ circuit)` in nats, when logged.
    pub kl: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunRecord {
    pub restart: usize,
    pub seed: u64,
    pub config: ExperimentConfig,
    pub config_hash: String,
    pub seeds: SeedLedger,
    pub trace: Vec<TracePoint>,
    pub best_parameters: ParameterVector,
    pub best_cost: f64,
    /// Exact KL of the final global best, in nats.
    pub final_kl: f64,
    pub stop_reason: StopReason,
    pub wall_clock_secs: f64,
}

/// Equality ignores the wall-clock time.
impl PartialEq for RunRecord {
    fn eq(&self, other: &Self) -> bool {
        self.restart == other.restart
            && self.seed == other.seed
            && self.config == other.config
            && self.config_hash == other.config_hash
            && self.seeds == other.seeds
            && self.trace == other.trace
            && self.best_parameters == other.best_parameters
            && self.best_cost.to_bits() == other.best_cost.to_bits()
            && self.final_kl.to_bits() == other.final_kl.to_bits()
            && self.stop_reason == other.stop_reason
    }
}

/// Target distribution, training data and circuit for one experiment.
#[derive(Debug, Clone)]
pub struct TrainingProblem {
    pub template: CircuitTemplate,
    pub target: EmpiricalDistribution,
    pub data: Dataset,
    data_hist: EmpiricalDistribution,
}

impl TrainingProblem {
    pub fn from_config(config: &ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let template = config.circuit.template()?;
        let target = config.dataset.generator.target()?;
        let data = draw_dataset(&target, config.dataset.size, config.dataset.seed)?;
        Ok(Self::with_data(template, target, data))
    }

    pub fn with_data(template: CircuitTemplate, target: EmpiricalDistribution, data: Dataset) -> Self {
        let data_hist = data.empirical();
        TrainingProblem {
            template,
            target,
            data,
            data_hist,
        }
    }

    /// Shot-based training cost of `params`, drawing shots from `ctx`'s stream.
    pub fn cost(&self, config: &ExperimentConfig, params: &[f64], ctx: EvalContext) -> Result<f64> {
        let state = self.template.execute(params)?;
        let shots = state.sample_indices(config.shots, &mut ctx.rng())?;
        let model = EmpiricalDistribution::from_samples(self.template.num_qubits(), &shots)?;
        config.cost.evaluate(&self.data.samples, &self.data_hist, &model)
    }

    pub fn exact_kl(&self, params: &[f64]) -> Result<f64> {
        kl_divergence(&self.target, &self.template.execute(params)?.born_probabilities())
    }
}

/// Trains one restart.
pub fn train_restart(config: &ExperimentConfig, problem: &TrainingProblem, restart: usize) -> Result<RunRecord> {
    let started = Instant::now();
    let seed = config.restart_seed(restart);
    let dim = problem.template.param_count();
    let swarm = config.swarm_config(dim, seed);
    let objective = |x: &[f64], ctx: EvalContext| problem.cost(config, x, ctx);
    let mut kls = Vec::new();
    let outcome = pso::run_observed(&swarm, dim, &objective, |state| {
        if config.log_kl {
            kls.push(problem.exact_kl(&state.global_best_position)?);
        }
        Ok(())
    })?;
    let trace = outcome
        .trace
        .iter()
        .enumerate()
        .map(|(i, &best_cost)| TracePoint {
            iteration: i + 1,
            best_cost,
            kl: kls.get(i).copied(),
        })
        .collect();
    let final_kl = problem.exact_kl(&outcome.best_position)?;
    Ok(RunRecord {
        restart,
        seed,
        config: config.clone(),
        config_hash: config.hash(),
        seeds: config.seed_ledger(),
        trace,
        best_parameters: ParameterVector(outcome.best_position),
        best_cost: outcome.best_cost,
        final_kl,
        stop_reason: outcome.stop_reason,
        wall_clock_secs: started.elapsed().as_secs_f64(),
    })
}

/// Trains every restart of `config`, in parallel, returned in restart order.
pub fn run_ddqcl(config: &ExperimentConfig) -> Result<Vec<RunRecord>> {
    let problem = TrainingProblem::from_config(config)?;
    (0..config.restarts)
        .into_par_iter()
        .map(|r| train_restart(config, &problem, r))
        .collect()
}

pub fn median(values: &[f64]) -> Option<f64> {
    let mut sorted: Vec<f64> = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    bootstrap::percentile(&sorted, 50.0).ok()
}

/// The restart with the lowest training cost; ties go to the earlier restart.
pub fn best_record(records: &[RunRecord]) -> Option<&RunRecord> {
    records
        .iter()
        .min_by(|a, b| a.best_cost.total_cmp(&b.best_cost).then(a.restart.cmp(&b.restart)))
}

fn provenance_header(config_hash: &str, seeds: &SeedLedger) -> String {
    format!("# config_sha256: {config_hash}\n# seeds: {seeds}\n")
}

/// CSV trace of one restart, headed by the config hash and seed ledger.
pub fn trace_csv(record: &RunRecord) -> String {
    let mut out = provenance_header(&record.config_hash, &record.seeds);
    writeln!(out, "# restart: {} seed: {}", record.restart, record.seed).unwrap();
    out.push_str("iteration,best_cost_nats,kl_nats\n");
    for p in &record.trace {
        match p.kl {
            Some(kl) => writeln!(out, "{},{:?},{:?}", p.iteration, p.best_cost, kl),
            None => writeln!(out, "{},{:?},", p.iteration, p.best_cost),
        }
        .unwrap();
    }
    out
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RestartSummary {
    restart: usize,
    seed: u64,
    iterations: usize,
    stop_reason: StopReason,
    best_cost_nats: f64,
    final_kl_nats: f64,
    wall_clock_secs: f64,
    best_parameters_rad: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RunSummary {
    config_sha256: String,
    seeds: SeedLedger,
    parameter_order: String,
    median_final_kl_nats: Option<f64>,
    best_restart: Option<usize>,
    restarts: Vec<RestartSummary>,
}

/// Writes `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

pub fn trace_file_name(restart: usize) -> String {
    format!("trace_restart_{restart:03}.csv")
}

/// Writes `config.toml`, one trace CSV per restart and `summary.json` into
/// `dir`. Returns the paths written.
pub fn write_run_outputs(dir: &Path, config: &ExperimentConfig, records: &[RunRecord]) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let hash = config.hash();
    let seeds = config.seed_ledger();
    let mut written = Vec::new();

    let config_path = dir.join("config.toml");
    let config_text = provenance_header(&hash, &seeds) + &config.to_toml();
    write_atomic(&config_path, config_text.as_bytes())?;
    written.push(config_path);

    for record in records {
        let path = dir.join(trace_file_name(record.restart));
        write_atomic(&path, trace_csv(record).as_bytes())?;
        written.push(path);
    }

    let finals: Vec<f64> = records.iter().map(|r| r.final_kl).collect();
    let summary = RunSummary {
        config_sha256: hash,
        seeds,
        parameter_order: crate::circuit::PARAMETER_ORDER.to_string(),
        median_final_kl_nats: median(&finals),
        best_restart: best_record(records).map(|r| r.restart),
        restarts: records
            .iter()
            .map(|r| RestartSummary {
                restart: r.restart,
                seed: r.seed,
                iterations: r.trace.len(),
                stop_reason: r.stop_reason,
                best_cost_nats: r.best_cost,
                final_kl_nats: r.final_kl,
                wall_clock_secs: r.wall_clock_secs,
                best_parameters_rad: r.best_parameters.0.clone(),
            })
            .collect(),
    };
    let path = dir.join("summary.json");
    let json = serde_json::to_string_pretty(&summary).map_err(|e| Error::Parse(e.to_string()))?;
    write_atomic(&path, (json + "\n").as_bytes())?;
    written.push(path);
    Ok(written)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QbasBenchmark {
    /// Restart the scored parameters came from, if any.
    pub restart: Option<usize>,
    pub report: ScoreReport,
    pub summary: BootstrapSummary,
}

/// qBAS(n, m) of a prepared state over `repetitions` batches, with a
/// bootstrapped mean and ±2σ interval.
pub fn qbas_of_state(state: &QuantumState, n: usize, m: usize, repetitions: usize, rng_seed: u64) -> Result<QbasBenchmark> {
    let report = qbas::qbas_score(state, n, m, repetitions, rng_seed)?;
    let summary = bootstrap::bootstrap_mean_ci(&report.scores, bootstrap::DEFAULT_RESAMPLES, rng_seed)?;
    Ok(QbasBenchmark {
        restart: None,
        report,
        summary,
    })
}

/// Scores the lowest-cost restart of a BAS experiment.
pub fn run_qbas_benchmark(config: &ExperimentConfig, records: &[RunRecord]) -> Result<QbasBenchmark> {
    let Generator::Bas { n, m } = config.dataset.generator else {
        return Err(Error::config("dataset.kind", "the qBAS benchmark needs a bas data set"));
    };
    let best = best_record(records).ok_or_else(|| Error::arg("no trained restarts to score"))?;
    let state = config.circuit.template()?.execute(&best.best_parameters.0)?;
    let mut bench = qbas_of_state(&state, n, m, qbas::DEFAULT_REPETITIONS, best.seed)?;
    bench.restart = Some(best.restart);
    Ok(bench)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThermalSuiteConfig {
    pub sizes: Vec<usize>,
    pub temperatures: Vec<f64>,
    pub depths: Vec<usize>,
    pub instances: usize,
    pub iterations: usize,
    pub shots: usize,
    pub dataset_size: usize,
    pub seed: u64,
    pub resamples: usize,
}

impl Default for ThermalSuiteConfig {
    fn default() -> Self {
        ThermalSuiteConfig {
            sizes: vec![5, 6],
            temperatures: crate::datasets::TEMPERATURE_PRESET.to_vec(),
            depths: vec![1, 2, 3],
            instances: 25,
            iterations: 50,
            shots: crate::config::DEFAULT_SHOTS,
            dataset_size: crate::config::DEFAULT_DATASET_SIZE,
            seed: 0,
            resamples: bootstrap::DEFAULT_RESAMPLES,
        }
    }
}

const INSTANCE_SALT: u64 = 1;
const DATA_SALT: u64 = 2;

impl ThermalSuiteConfig {
    /// Instance `i` uses the same couplings at every temperature and depth.
    pub fn instance_seed(&self, num_qubits: usize, instance: usize) -> u64 {
        rng::derive_seed(self.seed, INSTANCE_SALT, (num_qubits << 16 | instance) as u64)
    }

    fn experiment(&self, num_qubits: usize, temperature: f64, layers: usize, instance: usize) -> ExperimentConfig {
        let generator = Generator::Thermal {
            num_qubits,
            temperature,
            instance_seed: self.instance_seed(num_qubits, instance),
        };
        let data_seed = rng::derive_seed(self.seed, DATA_SALT, (num_qubits << 16 | instance) as u64);
        let circuit = CircuitSpec {
            num_qubits,
            layers,
            topology: Topology::All,
        };
        let mut c = ExperimentConfig::new(generator, data_seed, circuit, self.seed + instance as u64);
        c.restarts = 1;
        c.iterations = self.iterations;
        c.shots = self.shots;
        c.dataset.size = self.dataset_size;
        c
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThermalCell {
    pub num_qubits: usize,
    pub temperature: f64,
    pub layers: usize,
    /// Final exact KL per instance, in nats.
    pub final_kls: Vec<f64>,
    /// Bootstrapped median KL after each iteration.
    pub median_trace: Vec<BootstrapSummary>,
}

impl ThermalCell {
    pub fn median_final_kl(&self) -> f64 {
        median(&self.final_kls).unwrap_or(f64::NAN)
    }
}

fn kl_trace_padded(record: &RunRecord, len: usize) -> Vec<f64> {
    let mut kls: Vec<f64> = record.trace.iter().map(|p| p.kl.unwrap_or(f64::NAN)).collect();
    let last = kls.last().copied().unwrap_or(record.final_kl);
    kls.resize(len, last);
    kls
}

/// One training run per (size, temperature, depth, instance) on all-to-all
/// circuits; one cell per (size, temperature, depth).
pub fn run_thermal_suite(suite: &ThermalSuiteConfig) -> Result<Vec<ThermalCell>> {
    if suite.instances < 2 {
        return Err(Error::config("instances", "need at least two instances to bootstrap"));
    }
    let mut cells = Vec::new();
    for &n in &suite.sizes {
        for &t in &suite.temperatures {
            for &layers in &suite.depths {
                let records = (0..suite.instances)
                    .into_par_iter()
                    .map(|i| {
                        let config = suite.experiment(n, t, layers, i);
                        let problem = TrainingProblem::from_config(&config)?;
                        train_restart(&config, &problem, 0)
                    })
                    .collect::<Result<Vec<_>>>()?;
                let traces: Vec<Vec<f64>> = records.iter().map(|r| kl_trace_padded(r, suite.iterations)).collect();
                let median_trace = (0..suite.iterations)
                    .map(|it| {
                        let column: Vec<f64> = traces.iter().map(|t| t[it]).collect();
                        bootstrap::bootstrap_median_ci(&column, suite.resamples, suite.seed ^ it as u64)
                    })
                    .collect::<Result<Vec<_>>>()?;
                cells.push(ThermalCell {
                    num_qubits: n,
                    temperature: t,
                    layers,
                    final_kls: records.iter().map(|r| r.final_kl).collect(),
                    median_trace,
                });
            }
        }
    }
    Ok(cells)
}

pub fn thermal_table_csv(cells: &[ThermalCell]) -> String {
    let mut out = String::from("num_qubits,temperature,layers,iteration,median_kl_nats,lower_kl_nats,upper_kl_nats\n");
    for c in cells {
        for (i, s) in c.median_trace.iter().enumerate() {
            writeln!(
                out,
                "{},{:?},{},{},{:?},{:?},{:?}",
                c.num_qubits,
                c.temperature,
                c.layers,
                i + 1,
                s.center,
                s.lower,
                s.upper
            )
            .unwrap();
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GhzCheck {
    pub num_qubits: usize,
    pub passed: bool,
    /// Largest deviation from the ideal `{0…0: ½, 1…1: ½}` distribution.
    pub max_deviation: f64,
    pub error: Option<String>,
}

pub const GHZ_TOLERANCE: f64 = 1e-9;

/// Builds and simulates the GHZ recipe for every `N` in `2..=max_qubits`.
pub fn verify_ghz_recipes(max_qubits: usize) -> Result<Vec<GhzCheck>> {
    if !(2..=12).contains(&max_qubits) {
        return Err(Error::arg(format!("max_qubits must lie in 2..=12, got {max_qubits}")));
    }
    Ok((2..=max_qubits).map(check_ghz).collect())
}

fn check_ghz(n: usize) -> GhzCheck {
    let outcome = build_ghz_recipe(n).and_then(|(template, params)| template.execute(params.as_slice()));
    match outcome {
        Ok(state) => {
            let probs = state.born_probabilities();
            let last = (1usize << n) - 1;
            let max_deviation = probs
                .probabilities()
                .iter()
                .enumerate()
                .map(|(i, &p)| {
                    let ideal = if i == 0 || i == last { 0.5 } else { 0.0 };
                    (p - ideal).abs()
                })
                .fold(0.0, f64::max);
            GhzCheck {
                num_qubits: n,
                passed: max_deviation <= GHZ_TOLERANCE,
                max_deviation,
                error: None,
            }
        }
        Err(e) => GhzCheck {
            num_qubits: n,
            passed: false,
            max_deviation: f64::NAN,
            error: Some(e.to_string()),
        },
    }
}
