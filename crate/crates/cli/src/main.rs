use std::fs;
use std::fmt::Write as _;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use qcbm::bootstrap::{self, BootstrapSummary};
use qcbm::config::ExperimentConfig;
use qcbm::datasets::{Dataset, TEMPERATURE_PRESET};
use qcbm::entanglement::entropy_surface_csv;
use qcbm::qbas::{BasScorer, ScoreReport};
use qcbm::runner::{self, median, ThermalSuiteConfig};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "qcbm", version, about = "Train and benchmark quantum circuit Born machines")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train every restart of an experiment config and write traces.
    Train(TrainArgs),
    /// Train a BAS experiment and score its best circuit, or score a shot file.
    Qbas(QbasArgs),
    /// Thermal-state suite over sizes, temperatures and depths.
    ThermalSuite(ThermalArgs),
    /// Check the GHZ preparation recipes.
    GhzVerify {
        #[arg(long, default_value_t = 12)]
        max_qubits: usize,
    },
    /// Closed-form BAS(2,2) entanglement entropy surface as CSV.
    EntropySurface {
        #[arg(long, default_value_t = 64)]
        points: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score an external file of measured bit strings.
    ScoreShots(ScoreShotsArgs),
}

#[derive(Args)]
struct Overrides {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    shots: Option<usize>,
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long)]
    restarts: Option<usize>,
    /// Output directory; defaults to `output_dir` from the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Overrides {
    fn apply(&self, config: &mut ExperimentConfig) -> Result<()> {
        if let Some(s) = self.seed {
            config.seed = s;
        }
        if let Some(s) = self.shots {
            config.shots = s;
        }
        if let Some(i) = self.iterations {
            config.iterations = i;
        }
        if let Some(r) = self.restarts {
            config.restarts = r;
        }
        if let Some(out) = &self.out {
            config.output_dir = Some(out.clone());
        }
        config.validate()?;
        Ok(())
    }
}

#[derive(Args)]
struct TrainArgs {
    config: PathBuf,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Args)]
struct QbasArgs {
    #[arg(required_unless_present = "shots_file", conflicts_with = "shots_file")]
    config: Option<PathBuf>,
    /// Score measured bit strings instead of training.
    #[arg(long, requires_all = ["n", "m"])]
    shots_file: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Args)]
struct ThermalArgs {
    #[arg(long, value_delimiter = ',', default_values_t = [5usize, 6])]
    sizes: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = TEMPERATURE_PRESET)]
    temperatures: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = [1usize, 2, 3])]
    depths: Vec<usize>,
    #[arg(long, default_value_t = 25)]
    instances: usize,
    #[arg(long, default_value_t = 50)]
    iterations: usize,
    #[arg(long, default_value_t = 1000)]
    shots: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = bootstrap::DEFAULT_RESAMPLES)]
    resamples: usize,
    /// CSV destination; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ScoreShotsArgs {
    file: PathBuf,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    m: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Serialize)]
struct ScoreOutput<'a> {
    restart: Option<usize>,
    report: &'a ScoreReport,
    mean_score: &'a BootstrapSummary,
}

/// Writes to stdout; a closed pipe on the reading end is not an error.
fn emit(text: &str) -> Result<()> {
    match io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    emit(&(serde_json::to_string_pretty(value)? + "\n"))
}

fn load_config(path: &Path, overrides: &Overrides) -> Result<ExperimentConfig> {
    let mut config = ExperimentConfig::load(path).with_context(|| format!("loading {}", path.display()))?;
    overrides.apply(&mut config)?;
    Ok(config)
}

fn train(args: &TrainArgs) -> Result<()> {
    let config = load_config(&args.config, &args.overrides)?;
    let Some(dir) = config.output_dir.clone() else {
        bail!("no output directory: pass --out or set output_dir in the config");
    };
    let records = runner::run_ddqcl(&config)?;
    runner::write_run_outputs(&dir, &config, &records)?;
    let finals: Vec<f64> = records.iter().map(|r| r.final_kl).collect();
    let mut out = format!("config_sha256 {}\nseeds {}\n", config.hash(), config.seed_ledger());
    for r in &records {
        writeln!(
            out,
            "restart {:>3} seed {:>6} iterations {:>4} best_cost_nats {:.6} final_kl_nats {:.6}",
            r.restart,
            r.seed,
            r.trace.len(),
            r.best_cost,
            r.final_kl
        )?;
    }
    if let Some(m) = median(&finals) {
        writeln!(out, "median_final_kl_nats {m:.6}")?;
    }
    writeln!(out, "wrote {}", dir.display())?;
    emit(&out)
}

fn score_file(path: &Path, n: usize, m: usize, seed: u64) -> Result<()> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let shots = Dataset::from_text(&text)?;
    if shots.num_qubits != n * m {
        bail!("shots have {} bits but BAS({n},{m}) needs {}", shots.num_qubits, n * m);
    }
    let report = BasScorer::new(n, m)?.score_shots(&shots.samples)?;
    let summary = if report.scores.len() >= 2 {
        bootstrap::bootstrap_mean_ci(&report.scores, bootstrap::DEFAULT_RESAMPLES, seed)?
    } else {
        let s = report.scores[0];
        BootstrapSummary {
            center: s,
            lower: s,
            upper: s,
            kind: bootstrap::BootstrapKind::Mean2Sigma,
            num_resamples: 0,
            excluded_count: 0,
        }
    };
    print_json(&ScoreOutput {
        restart: None,
        report: &report,
        mean_score: &summary,
    })
}

fn qbas(args: &QbasArgs) -> Result<()> {
    if let Some(file) = &args.shots_file {
        let (n, m) = (args.n.unwrap_or_default(), args.m.unwrap_or_default());
        return score_file(file, n, m, args.overrides.seed.unwrap_or(0));
    }
    let path = args.config.as_ref().expect("clap enforces config or shots file");
    let config = load_config(path, &args.overrides)?;
    let records = runner::run_ddqcl(&config)?;
    if let Some(dir) = &config.output_dir {
        runner::write_run_outputs(dir, &config, &records)?;
    }
    let bench = runner::run_qbas_benchmark(&config, &records)?;
    print_json(&ScoreOutput {
        restart: bench.restart,
        report: &bench.report,
        mean_score: &bench.summary,
    })
}

fn thermal(args: &ThermalArgs) -> Result<()> {
    let suite = ThermalSuiteConfig {
        sizes: args.sizes.clone(),
        temperatures: args.temperatures.clone(),
        depths: args.depths.clone(),
        instances: args.instances,
        iterations: args.iterations,
        shots: args.shots,
        seed: args.seed,
        resamples: args.resamples,
        ..ThermalSuiteConfig::default()
    };
    let cells = runner::run_thermal_suite(&suite)?;
    let csv = runner::thermal_table_csv(&cells);
    match &args.out {
        Some(path) => {
            runner::write_atomic(path, csv.as_bytes())?;
            let mut out = String::new();
            for c in &cells {
                writeln!(
                    out,
                    "N={} T={:.4} L={} median_final_kl_nats {:.6}",
                    c.num_qubits,
                    c.temperature,
                    c.layers,
                    c.median_final_kl()
                )?;
            }
            emit(&out)?;
        }
        None => emit(&csv)?,
    }
    Ok(())
}

fn ghz_verify(max_qubits: usize) -> Result<bool> {
    let checks = runner::verify_ghz_recipes(max_qubits)?;
    let mut out = String::new();
    for c in &checks {
        match &c.error {
            Some(e) => writeln!(out, "N={:>2} FAIL {e}", c.num_qubits)?,
            None => writeln!(
                out,
                "N={:>2} {} max deviation {:.2e}",
                c.num_qubits,
                if c.passed { "ok  " } else { "FAIL" },
                c.max_deviation
            )?,
        }
    }
    emit(&out)?;
    Ok(checks.iter().all(|c| c.passed))
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Train(args) => train(&args)?,
        Command::Qbas(args) => qbas(&args)?,
        Command::ThermalSuite(args) => thermal(&args)?,
        Command::GhzVerify { max_qubits } => return ghz_verify(max_qubits),
        Command::EntropySurface { points, out } => {
            if points == 0 {
                bail!("--points must be at least 1");
            }
            let csv = entropy_surface_csv(points);
            match out {
                Some(path) => runner::write_atomic(&path, csv.as_bytes())?,
                None => emit(&csv)?,
            }
        }
        Command::ScoreShots(args) => score_file(&args.file, args.n, args.m, args.seed)?,
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
