//! Training costs and evaluation divergences. Logarithms are natural (nats).

use serde::{Deserialize, Serialize};

use crate::basis;
use crate::distribution::EmpiricalDistribution;
use crate::error::{Error, Result};
use crate::transport;

/// Clipping floor used for every reported experiment.
pub const DEFAULT_EPSILON: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CostKind {
    /// Clipped negative log-likelihood.
    Nll,
    /// Earth mover's distance under the Hamming metric.
    Emd,
    /// First and second moment matching.
    Mm,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostConfig {
    pub kind: CostKind,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
}

fn default_epsilon() -> f64 {
    DEFAULT_EPSILON
}

impl Default for CostConfig {
    fn default() -> Self {
        CostConfig {
            kind: CostKind::Nll,
            epsilon: DEFAULT_EPSILON,
        }
    }
}

impl CostConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(Error::arg(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        Ok(())
    }

    /// Cost of `model` against the data. NLL reads the raw samples; EMD and
    /// moment matching compare against the data's empirical histogram.
    pub fn evaluate(&self, data: &[usize], data_hist: &EmpiricalDistribution, model: &EmpiricalDistribution) -> Result<f64> {
        match self.kind {
            CostKind::Nll => cost_nll(data, model, self.epsilon),
            CostKind::Emd => cost_emd(data_hist, model),
            CostKind::Mm => cost_mm(data_hist, model),
        }
    }
}

/// `D_KL(target ‖ model)` over the support of `target`.
///
/// Returns `f64::INFINITY` when `model` puts zero mass on a point that
/// `target` supports.
pub fn kl_divergence(target: &EmpiricalDistribution, model: &EmpiricalDistribution) -> Result<f64> {
    target.ensure_same_register(model)?;
    let mut kl = 0.0;
    for (x, p) in target.support() {
        let q = model.prob(x);
        if q == 0.0 {
            return Ok(f64::INFINITY);
        }
        kl += p * (p / q).ln();
    }
    // rounding can leave a tiny negative value for identical inputs
    Ok(kl.max(0.0))
}

/// `−(1/D) Σ_d ln max(ε, P_model(x_d))`.
pub fn cost_nll(data: &[usize], model: &EmpiricalDistribution, epsilon: f64) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::arg("negative log-likelihood needs at least one data point"));
    }
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::arg(format!("epsilon must be positive, got {epsilon}")));
    }
    let total: f64 = data.iter().map(|&x| model.prob(x).max(epsilon).ln()).sum();
    Ok(-total / data.len() as f64)
}

/// Earth mover's distance with the Hamming distance as ground metric,
/// solved exactly on the union of both supports.
pub fn cost_emd(target: &EmpiricalDistribution, model: &EmpiricalDistribution) -> Result<f64> {
    target.ensure_same_register(model)?;
    let (src, supply): (Vec<usize>, Vec<f64>) = target.support().unzip();
    let (dst, demand): (Vec<usize>, Vec<f64>) = model.support().unzip();
    let plan = transport::solve(&supply, &demand, |i, j| (src[i] ^ dst[j]).count_ones() as f64)?;
    Ok(plan.cost)
}

/// `(1/N) Σ_i Δ⟨x_i⟩² + (2/(N(N−1))) Σ_{i>j} Δ⟨x_i x_j⟩²` with spins `±1`.
pub fn cost_mm(target: &EmpiricalDistribution, model: &EmpiricalDistribution) -> Result<f64> {
    target.ensure_same_register(model)?;
    let n = target.num_qubits();
    if n < 2 {
        return Err(Error::arg("moment matching needs at least two variables"));
    }
    let (m1_t, m2_t) = moments(target);
    let (m1_m, m2_m) = moments(model);
    let first: f64 = m1_t.iter().zip(&m1_m).map(|(a, b)| (a - b).powi(2)).sum();
    let second: f64 = m2_t.iter().zip(&m2_m).map(|(a, b)| (a - b).powi(2)).sum();
    Ok(first / n as f64 + 2.0 * second / (n * (n - 1)) as f64)
}

/// `⟨x_i⟩` and `⟨x_i x_j⟩` for `i > j`, the latter in `(i, j)` row order.
fn moments(dist: &EmpiricalDistribution) -> (Vec<f64>, Vec<f64>) {
    let n = dist.num_qubits();
    let mut first = vec![0.0; n];
    let mut second = vec![0.0; n * (n - 1) / 2];
    for (x, p) in dist.support() {
        let s: Vec<f64> = (0..n).map(|q| basis::spin(x, q, n)).collect();
        let mut k = 0;
        for i in 0..n {
            first[i] += p * s[i];
            for j in 0..i {
                second[k] += p * s[i] * s[j];
                k += 1;
            }
        }
    }
    (first, second)
}
