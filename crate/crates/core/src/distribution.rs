use serde::{Deserialize, Serialize};

use crate::basis::MAX_QUBITS;
use crate::error::{Error, Result};

const NORM_TOL: f64 = 1e-10;

/// Normalized histogram over the `2^N` basis indices of an `N`-bit register.
///
/// Used both for exact distributions (data targets, Born probabilities) and
/// for frequencies estimated from samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalDistribution {
    num_qubits: usize,
    probs: Vec<f64>,
}

impl EmpiricalDistribution {
    /// Wraps a probability vector; it must be nonnegative and sum to one.
    pub fn from_probabilities(num_qubits: usize, probs: Vec<f64>) -> Result<Self> {
        check_register(num_qubits)?;
        if probs.len() != 1 << num_qubits {
            return Err(Error::arg(format!(
                "expected {} probabilities for {num_qubits} qubits, got {}",
                1usize << num_qubits,
                probs.len()
            )));
        }
        if let Some(p) = probs.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
            return Err(Error::arg(format!("invalid probability {p}")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > NORM_TOL {
            return Err(Error::arg(format!("probabilities sum to {total}, not 1")));
        }
        Ok(EmpiricalDistribution { num_qubits, probs })
    }

    /// Normalizes nonnegative weights.
    pub fn from_weights(num_qubits: usize, mut weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total.is_finite() && total > 0.0) {
            return Err(Error::arg("weights must have a positive finite total"));
        }
        weights.iter_mut().for_each(|w| *w /= total);
        Self::from_probabilities(num_qubits, weights)
    }

    /// Relative frequencies of a list of basis-index samples.
    pub fn from_samples(num_qubits: usize, samples: &[usize]) -> Result<Self> {
        check_register(num_qubits)?;
        if samples.is_empty() {
            return Err(Error::arg("cannot build a histogram from zero samples"));
        }
        let dim = 1usize << num_qubits;
        let mut counts = vec![0usize; dim];
        for &s in samples {
            if s >= dim {
                return Err(Error::arg(format!("sample {s} outside a {num_qubits}-bit register")));
            }
            counts[s] += 1;
        }
        let total = samples.len() as f64;
        Ok(EmpiricalDistribution {
            num_qubits,
            probs: counts.into_iter().map(|c| c as f64 / total).collect(),
        })
    }

    /// Uniform mass over the listed basis indices.
    pub fn uniform_over(num_qubits: usize, support: &[usize]) -> Result<Self> {
        check_register(num_qubits)?;
        let mut weights = vec![0.0; 1 << num_qubits];
        for &i in support {
            *weights
                .get_mut(i)
                .ok_or_else(|| Error::arg(format!("index {i} outside register")))? = 1.0;
        }
        Self::from_weights(num_qubits, weights)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.probs.len()
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, index: usize) -> f64 {
        self.probs.get(index).copied().unwrap_or(0.0)
    }

    /// `(index, probability)` pairs with nonzero mass, ascending by index.
    pub fn support(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.probs
            .iter()
            .enumerate()
            .filter(|(_, p)| **p > 0.0)
            .map(|(i, p)| (i, *p))
    }

    pub fn support_len(&self) -> usize {
        self.probs.iter().filter(|p| **p > 0.0).count()
    }

    pub(crate) fn ensure_same_register(&self, other: &Self) -> Result<()> {
        if self.num_qubits != other.num_qubits {
            return Err(Error::arg(format!(
                "distributions over {} and {} qubits cannot be compared",
                self.num_qubits, other.num_qubits
            )));
        }
        Ok(())
    }
}

pub(crate) fn check_register(num_qubits: usize) -> Result<()> {
    if num_qubits == 0 || num_qubits > MAX_QUBITS {
        return Err(Error::Capacity(format!(
            "register size {num_qubits} outside 1..={MAX_QUBITS}"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn samples_become_frequencies() {
        let d = EmpiricalDistribution::from_samples(2, &[0, 3, 3, 3]).unwrap();
        assert_eq!(d.probabilities(), &[0.25, 0.0, 0.0, 0.75]);
        assert_eq!(d.support().collect::<Vec<_>>(), vec![(0, 0.25), (3, 0.75)]);
    }

    #[test]
    fn rejects_unnormalized_and_out_of_range() {
        assert!(EmpiricalDistribution::from_probabilities(1, vec![0.5, 0.4]).is_err());
        assert!(EmpiricalDistribution::from_probabilities(1, vec![1.5, -0.5]).is_err());
        assert!(EmpiricalDistribution::from_samples(1, &[2]).is_err());
        assert!(matches!(
            EmpiricalDistribution::from_samples(25, &[0]),
            Err(Error::Capacity(_))
        ));
    }
}
