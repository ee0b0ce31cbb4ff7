//! Global-best particle swarm optimization.
//!
//! Update rule per dimension:
//!
//! ```text
//! v ← w·v + c₁·r₁·(p_best − x) + c₂·r₂·(g_best − x),   |v| ≤ max_step
//! x ← x + v
//! ```
//!
//! with `r₁, r₂ ~ U[0, 1)` drawn independently for every particle and
//! dimension. Positions are never wrapped here; gates reduce angles modulo
//! `2π` when they are applied.
//!
//! Particles are evaluated in parallel. Each evaluation receives an
//! [`EvalContext`] whose random stream depends only on
//! `(seed, iteration, particle)`, so results do not depend on scheduling.
//! Stored personal-best costs are never re-evaluated: with a noisy
//! objective the bests carry a favourable-noise bias.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{self, SimRng};

/// Changes of the global best at or below this count as no progress.
pub const STALL_TOLERANCE: f64 = 1e-12;
pub const DEFAULT_PATIENCE: usize = 20;
pub const DEFAULT_MAX_ITERATIONS: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwarmConfig {
    pub cognition: f64,
    pub social: f64,
    pub inertia: f64,
    /// Per-dimension velocity clamp, in radians.
    pub max_step: f64,
    pub num_particles: usize,
    pub max_iterations: usize,
    /// Stop after this many consecutive iterations without progress;
    /// `None` disables the rule.
    pub patience: Option<usize>,
    pub rng_seed: u64,
}

impl SwarmConfig {
    /// `c₁ = c₂ = w = 0.5`, a clamp of `π`, and twice as many particles as
    /// parameters.
    pub fn default_for(param_dim: usize) -> Self {
        SwarmConfig {
            cognition: 0.5,
            social: 0.5,
            inertia: 0.5,
            max_step: PI,
            num_particles: 2 * param_dim.max(1),
            max_iterations: DEFAULT_MAX_ITERATIONS,
            patience: Some(DEFAULT_PATIENCE),
            rng_seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("cognition", self.cognition),
            ("social", self.social),
            ("inertia", self.inertia),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::arg(format!("{name} must be finite and nonnegative, got {v}")));
            }
        }
        if !(self.max_step.is_finite() && self.max_step > 0.0) {
            return Err(Error::arg(format!("max_step must be positive, got {}", self.max_step)));
        }
        if self.num_particles < 2 {
            return Err(Error::arg("a swarm needs at least two particles"));
        }
        Ok(())
    }
}

/// What an objective evaluation may know about its caller.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EvalContext {
    pub seed: u64,
    /// 0 for the initial evaluation, then 1, 2, …
    pub iteration: u64,
    pub particle: usize,
}

impl EvalContext {
    /// Random stream private to this evaluation.
    pub fn rng(&self) -> SimRng {
        rng::stream(self.seed, rng::stream_id(rng::EVAL_TAG, self.iteration, self.particle as u64))
    }
}

/// A cost to minimize. Implemented for any `Fn(&[f64], EvalContext) -> Result<f64>`.
pub trait Objective: Sync {
    fn evaluate(&self, position: &[f64], ctx: EvalContext) -> Result<f64>;
}

impl<F> Objective for F
where
    F: Fn(&[f64], EvalContext) -> Result<f64> + Sync,
{
    fn evaluate(&self, position: &[f64], ctx: EvalContext) -> Result<f64> {
        self(position, ctx)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Particle {
    pub position: Vec<f64>,
    pub velocity: Vec<f64>,
    pub best_position: Vec<f64>,
    pub best_cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwarmState {
    pub particles: Vec<Particle>,
    pub global_best_position: Vec<f64>,
    pub global_best_cost: f64,
    pub iteration: u64,
}

impl SwarmState {
    pub fn dim(&self) -> usize {
        self.global_best_position.len()
    }

    /// Re-derives the global best from the personal bests (first minimum wins).
    fn refresh_global_best(&mut self) {
        let best = self
            .particles
            .iter()
            .min_by(|a, b| a.best_cost.total_cmp(&b.best_cost))
            .expect("swarm is never empty");
        if best.best_cost < self.global_best_cost {
            self.global_best_cost = best.best_cost;
            self.global_best_position.clone_from(&best.best_position);
        }
    }
}

fn evaluate_all<O: Objective + ?Sized>(
    objective: &O,
    positions: &[&[f64]],
    seed: u64,
    iteration: u64,
) -> Result<Vec<f64>> {
    positions
        .par_iter()
        .enumerate()
        .map(|(particle, x)| {
            let ctx = EvalContext {
                seed,
                iteration,
                particle,
            };
            objective
                .evaluate(x, ctx)
                .and_then(|c| {
                    if c.is_nan() {
                        Err(Error::arg("objective returned NaN"))
                    } else {
                        Ok(c)
                    }
                })
                .map_err(|e| Error::Objective {
                    particle,
                    source: Box::new(e),
                })
        })
        .collect()
}

/// Random positions in `[-π, π)^dim` and velocities in `[-π/2, π/2)^dim`,
/// each evaluated once to seed the personal bests.
pub fn init_swarm<O: Objective + ?Sized>(config: &SwarmConfig, dim: usize, objective: &O) -> Result<SwarmState> {
    config.validate()?;
    if dim == 0 {
        return Err(Error::arg("parameter space must have at least one dimension"));
    }
    let mut rng = rng::stream(config.rng_seed, rng::stream_id(rng::INIT_TAG, 0, 0));
    let mut draws = |half_width: f64| -> Vec<f64> {
        (0..dim).map(|_| rng.random_range(-half_width..half_width)).collect()
    };
    let mut starts = Vec::with_capacity(config.num_particles);
    for _ in 0..config.num_particles {
        let position = draws(PI);
        let velocity = draws(FRAC_PI_2);
        starts.push((position, velocity));
    }
    let positions: Vec<&[f64]> = starts.iter().map(|(x, _)| x.as_slice()).collect();
    let costs = evaluate_all(objective, &positions, config.rng_seed, 0)?;

    let particles: Vec<Particle> = starts
        .into_iter()
        .zip(costs)
        .map(|((position, velocity), cost)| Particle {
            best_position: position.clone(),
            position,
            velocity,
            best_cost: cost,
        })
        .collect();
    let best = particles
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.best_cost.total_cmp(&b.1.best_cost))
        .map(|(i, _)| i)
        .expect("swarm has at least two particles");
    let state = SwarmState {
        global_best_position: particles[best].best_position.clone(),
        global_best_cost: particles[best].best_cost,
        particles,
        iteration: 0,
    };
    Ok(state)
}

/// One velocity/position update followed by evaluation and best bookkeeping.
pub fn step<O: Objective + ?Sized>(config: &SwarmConfig, state: &mut SwarmState, objective: &O) -> Result<()> {
    let iteration = state.iteration + 1;
    let mut rng = rng::stream(config.rng_seed, rng::stream_id(rng::UPDATE_TAG, iteration, 0));
    let gbest = state.global_best_position.clone();
    for p in &mut state.particles {
        for k in 0..p.position.len() {
            let r1: f64 = rng.random();
            let r2: f64 = rng.random();
            let v = config.inertia * p.velocity[k]
                + config.cognition * r1 * (p.best_position[k] - p.position[k])
                + config.social * r2 * (gbest[k] - p.position[k]);
            p.velocity[k] = v.clamp(-config.max_step, config.max_step);
            p.position[k] += p.velocity[k];
        }
    }

    let positions: Vec<&[f64]> = state.particles.iter().map(|p| p.position.as_slice()).collect();
    let costs = evaluate_all(objective, &positions, config.rng_seed, iteration)?;
    for (p, cost) in state.particles.iter_mut().zip(costs) {
        if cost < p.best_cost {
            p.best_cost = cost;
            p.best_position.clone_from(&p.position);
        }
    }
    state.refresh_global_best();
    state.iteration = iteration;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    MaxIterations,
    Stalled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwarmOutcome {
    pub best_position: Vec<f64>,
    pub best_cost: f64,
    /// Global-best cost after each executed iteration.
    pub trace: Vec<f64>,
    pub stop_reason: StopReason,
}

/// Runs the swarm until `max_iterations` or until the global best moves by
/// at most [`STALL_TOLERANCE`] between consecutive iterations `patience`
/// times in a row. The first iteration has no predecessor in the trace and
/// never counts as stalled.
pub fn run<O: Objective + ?Sized>(config: &SwarmConfig, dim: usize, objective: &O) -> Result<SwarmOutcome> {
    run_observed(config, dim, objective, |_| Ok(()))
}

/// [`run`] with a callback after every iteration. The callback sees the
/// state read-only and cannot influence the optimization.
pub fn run_observed<O, F>(config: &SwarmConfig, dim: usize, objective: &O, mut observe: F) -> Result<SwarmOutcome>
where
    O: Objective + ?Sized,
    F: FnMut(&SwarmState) -> Result<()>,
{
    let mut state = init_swarm(config, dim, objective)?;
    let mut trace: Vec<f64> = Vec::with_capacity(config.max_iterations);
    let mut stalled = 0usize;
    let mut stop_reason = StopReason::MaxIterations;
    for _ in 0..config.max_iterations {
        step(config, &mut state, objective)?;
        observe(&state)?;
        if let Some(&prev) = trace.last() {
            if (prev - state.global_best_cost).abs() <= STALL_TOLERANCE || prev == state.global_best_cost {
                stalled += 1;
            } else {
                stalled = 0;
            }
        }
        trace.push(state.global_best_cost);
        if config.patience.is_some_and(|p| stalled >= p) {
            stop_reason = StopReason::Stalled;
            break;
        }
    }
    Ok(SwarmOutcome {
        best_position: state.global_best_position,
        best_cost: state.global_best_cost,
        trace,
        stop_reason,
    })
}
