//! The qBAS(n, m) score: an F₁ score for generating bars-and-stripes
//! patterns with a fixed readout budget.
//!
//! Precision is the fraction of all measured samples that are BAS patterns.
//! Recall is the fraction of distinct BAS patterns seen in one batch of
//! `N_reads` samples, where `N_reads` is the coupon-collector expectation
//! `⌈k·H_k⌉` for `k = N_BAS(n, m)` patterns. One score is produced per
//! batch, all sharing the precision pooled over every batch.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::datasets::{bas_count, bas_indices};
use crate::error::{Error, Result};
use crate::rng;
use crate::statevector::QuantumState;

/// Number of scored batches per evaluation.
pub const DEFAULT_REPETITIONS: usize = 25;

/// `⌈k·H_k⌉`, the expected number of uniform draws needed to see all `k`
/// outcomes.
pub fn coupon_collector_reads(num_patterns: usize) -> Result<usize> {
    if num_patterns == 0 {
        return Err(Error::arg("need at least one pattern"));
    }
    let harmonic: f64 = (1..=num_patterns).rev().map(|i| 1.0 / i as f64).sum();
    let expected = num_patterns as f64 * harmonic;
    // guard against a product that should be integral rounding up
    Ok((expected - 1e-9).ceil() as usize)
}

/// Harmonic mean `2pr/(p+r)`, or 0 when both are 0.
pub fn f1_score(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

/// Membership oracle for BAS(n, m) over basis indices.
#[derive(Debug, Clone)]
pub struct BasScorer {
    n: usize,
    m: usize,
    patterns: HashSet<usize>,
    num_reads: usize,
}

impl BasScorer {
    pub fn new(n: usize, m: usize) -> Result<Self> {
        let patterns: HashSet<usize> = bas_indices(n, m)?.into_iter().collect();
        debug_assert_eq!(patterns.len(), bas_count(n, m));
        let num_reads = coupon_collector_reads(patterns.len())?;
        Ok(BasScorer {
            n,
            m,
            patterns,
            num_reads,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.n * self.m
    }

    pub fn num_patterns(&self) -> usize {
        self.patterns.len()
    }

    pub fn num_reads(&self) -> usize {
        self.num_reads
    }

    pub fn precision(&self, shots: &[usize]) -> Result<f64> {
        if shots.is_empty() {
            return Err(Error::arg("precision needs at least one shot"));
        }
        let hits = shots.iter().filter(|s| self.patterns.contains(s)).count();
        Ok(hits as f64 / shots.len() as f64)
    }

    /// Distinct patterns in one batch of exactly `num_reads` shots.
    pub fn recall(&self, batch: &[usize]) -> Result<f64> {
        if batch.len() != self.num_reads {
            return Err(Error::arg(format!(
                "recall batch must hold exactly {} shots, got {}",
                self.num_reads,
                batch.len()
            )));
        }
        let seen: HashSet<usize> = batch.iter().copied().filter(|s| self.patterns.contains(s)).collect();
        Ok(seen.len() as f64 / self.patterns.len() as f64)
    }

    /// Scores consecutive batches of `num_reads` shots. Trailing shots that
    /// do not fill a batch still count towards the pooled precision.
    pub fn score_shots(&self, shots: &[usize]) -> Result<ScoreReport> {
        let repetitions = shots.len() / self.num_reads;
        if repetitions == 0 {
            return Err(Error::arg(format!(
                "need at least {} shots for one qBAS({},{}) batch, got {}",
                self.num_reads,
                self.n,
                self.m,
                shots.len()
            )));
        }
        let precision = self.precision(shots)?;
        let recalls = shots
            .chunks_exact(self.num_reads)
            .map(|batch| self.recall(batch))
            .collect::<Result<Vec<_>>>()?;
        let scores = recalls.iter().map(|&r| f1_score(precision, r)).collect();
        Ok(ScoreReport {
            n: self.n,
            m: self.m,
            num_reads: self.num_reads,
            precision,
            recalls,
            scores,
            pooled_samples: shots.len(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub n: usize,
    pub m: usize,
    pub num_reads: usize,
    /// Pooled over all batches.
    pub precision: f64,
    pub recalls: Vec<f64>,
    pub scores: Vec<f64>,
    pub pooled_samples: usize,
}

impl ScoreReport {
    pub fn mean_score(&self) -> f64 {
        self.scores.iter().sum::<f64>() / self.scores.len() as f64
    }
}

pub fn precision(shots: &[usize], n: usize, m: usize) -> Result<f64> {
    BasScorer::new(n, m)?.precision(shots)
}

pub fn recall(batch: &[usize], n: usize, m: usize) -> Result<f64> {
    BasScorer::new(n, m)?.recall(batch)
}

/// Measures `repetitions` batches of `N_reads` shots from `state` and
/// scores them. Batch `r` draws from its own stream of `rng_seed`.
pub fn qbas_score(state: &QuantumState, n: usize, m: usize, repetitions: usize, rng_seed: u64) -> Result<ScoreReport> {
    let scorer = BasScorer::new(n, m)?;
    if state.num_qubits() != scorer.num_qubits() {
        return Err(Error::arg(format!(
            "qBAS({n},{m}) needs a {}-qubit state, got {}",
            scorer.num_qubits(),
            state.num_qubits()
        )));
    }
    if repetitions == 0 {
        return Err(Error::arg("need at least one repetition"));
    }
    let mut shots = Vec::with_capacity(repetitions * scorer.num_reads());
    for r in 0..repetitions {
        let mut batch_rng = rng::stream(rng_seed, rng::stream_id(rng::AUX_TAG, 0, r as u64));
        shots.extend(state.sample_indices(scorer.num_reads(), &mut batch_rng)?);
    }
    scorer.score_shots(&shots)
}
