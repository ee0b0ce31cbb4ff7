//! Dense statevector simulation over the ion-trap native gate set
//! (`Rz`, `Rx`, `XX`, and the global Mølmer–Sørensen gate).
//!
//! Gates act in place on an exclusively owned amplitude buffer. Angles are
//! reduced to `[-π, π)` before use; this flips the sign of the whole state
//! for some inputs, which is a global phase and never visible in
//! probabilities.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use crate::basis::{qubit_mask, MAX_QUBITS};
use crate::distribution::EmpiricalDistribution;
use crate::error::{Error, Result};
use crate::rng;

const NORM_TOL: f64 = 1e-10;

/// Reduces an angle to `[-π, π)`.
pub fn wrap_angle(theta: f64) -> f64 {
    let wrapped = (theta + PI).rem_euclid(TAU) - PI;
    // rem_euclid can round up to exactly TAU
    if wrapped >= PI {
        wrapped - TAU
    } else {
        wrapped
    }
}

fn checked_angle(theta: f64) -> Result<f64> {
    if !theta.is_finite() {
        return Err(Error::arg(format!("rotation angle {theta} is not finite")));
    }
    Ok(wrap_angle(theta))
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    num_qubits: usize,
    amps: Vec<Complex64>,
}

impl QuantumState {
    /// `|0…0⟩` on `num_qubits` qubits.
    pub fn zero(num_qubits: usize) -> Result<Self> {
        if num_qubits == 0 || num_qubits > MAX_QUBITS {
            return Err(Error::Capacity(format!(
                "cannot simulate {num_qubits} qubits (supported: 1..={MAX_QUBITS})"
            )));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << num_qubits];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(QuantumState { num_qubits, amps })
    }

    /// Builds a state from explicit amplitudes, which must have unit norm.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let len = amps.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::arg(format!("amplitude count {len} is not 2^N with N ≥ 1")));
        }
        let num_qubits = len.trailing_zeros() as usize;
        if num_qubits > MAX_QUBITS {
            return Err(Error::Capacity(format!("{num_qubits} qubits exceeds {MAX_QUBITS}")));
        }
        let state = QuantumState { num_qubits, amps };
        let norm = state.norm_sqr();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::arg(format!("state has squared norm {norm}, expected 1")));
        }
        Ok(state)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    fn check_qubit(&self, qubit: usize) -> Result<()> {
        if qubit >= self.num_qubits {
            return Err(Error::QubitIndex {
                index: qubit,
                num_qubits: self.num_qubits,
            });
        }
        Ok(())
    }

    /// `Rz(θ) = exp(-iθσz/2)`: bit 0 picks up `e^{-iθ/2}`, bit 1 `e^{+iθ/2}`.
    pub fn apply_rz(&mut self, qubit: usize, theta: f64) -> Result<()> {
        self.check_qubit(qubit)?;
        let theta = checked_angle(theta)?;
        if theta == 0.0 {
            return Ok(());
        }
        let mask = qubit_mask(qubit, self.num_qubits);
        let phase0 = Complex64::from_polar(1.0, -theta / 2.0);
        let phase1 = phase0.conj();
        for (i, a) in self.amps.iter_mut().enumerate() {
            *a *= if i & mask == 0 { phase0 } else { phase1 };
        }
        Ok(())
    }

    /// `Rx(θ) = exp(-iθσx/2)`.
    pub fn apply_rx(&mut self, qubit: usize, theta: f64) -> Result<()> {
        self.check_qubit(qubit)?;
        let theta = checked_angle(theta)?;
        if theta == 0.0 {
            return Ok(());
        }
        let mask = qubit_mask(qubit, self.num_qubits);
        self.mix_pairs(mask, mask, theta);
        Ok(())
    }

    /// `XX(θ) = exp(-iθ σx⊗σx / 2)` on qubits `i` and `j`.
    pub fn apply_xx(&mut self, qubit_i: usize, qubit_j: usize, theta: f64) -> Result<()> {
        self.check_qubit(qubit_i)?;
        self.check_qubit(qubit_j)?;
        if qubit_i == qubit_j {
            return Err(Error::arg(format!("XX gate needs two distinct qubits, got {qubit_i} twice")));
        }
        let theta = checked_angle(theta)?;
        if theta == 0.0 {
            return Ok(());
        }
        let mi = qubit_mask(qubit_i, self.num_qubits);
        let mj = qubit_mask(qubit_j, self.num_qubits);
        self.mix_pairs(mi, mi | mj, theta);
        Ok(())
    }

    /// Global Mølmer–Sørensen gate: `XX(θ)` on every unordered qubit pair.
    /// The pair gates commute, so the order they are applied in is irrelevant.
    pub fn apply_gms(&mut self, theta: f64) -> Result<()> {
        if self.num_qubits < 2 {
            return Err(Error::arg("GMS gate needs at least two qubits"));
        }
        checked_angle(theta)?;
        for i in 0..self.num_qubits {
            for j in i + 1..self.num_qubits {
                self.apply_xx(i, j, theta)?;
            }
        }
        Ok(())
    }

    /// Applies `cos(θ/2)·1 − i sin(θ/2)·F` where `F` flips the bits in
    /// `flip`. `pivot` is one bit of `flip`, used to visit each pair once.
    fn mix_pairs(&mut self, pivot: usize, flip: usize, theta: f64) {
        let (s, c) = (theta / 2.0).sin_cos();
        let minus_is = Complex64::new(0.0, -s);
        for i in 0..self.amps.len() {
            if i & pivot != 0 {
                continue;
            }
            let j = i ^ flip;
            let (a, b) = (self.amps[i], self.amps[j]);
            self.amps[i] = a * c + b * minus_is;
            self.amps[j] = b * c + a * minus_is;
        }
    }

    /// Exact Born-rule probabilities `|⟨x|ψ⟩|²`.
    pub fn born_probabilities(&self) -> EmpiricalDistribution {
        let mut probs: Vec<f64> = self.amps.iter().map(|a| a.norm_sqr()).collect();
        // absorb floating drift from long gate sequences
        let total: f64 = probs.iter().sum();
        probs.iter_mut().for_each(|p| *p /= total);
        EmpiricalDistribution::from_probabilities(self.num_qubits, probs)
            .expect("a unit-norm state yields a valid distribution")
    }

    /// Draws `num_shots` computational-basis measurement outcomes.
    pub fn sample_indices<R: Rng + ?Sized>(&self, num_shots: usize, rng: &mut R) -> Result<Vec<usize>> {
        if num_shots == 0 {
            return Err(Error::arg("number of shots must be at least 1"));
        }
        let weights = self.amps.iter().map(|a| a.norm_sqr());
        let dist = WeightedIndex::new(weights)
            .map_err(|e| Error::arg(format!("state cannot be sampled: {e}")))?;
        Ok((0..num_shots).map(|_| dist.sample(rng)).collect())
    }

    /// Measurement histogram from `num_shots` shots, reproducible per seed.
    pub fn sample_shots(&self, num_shots: usize, rng_seed: u64) -> Result<EmpiricalDistribution> {
        let shots = self.sample_indices(num_shots, &mut rng::seeded(rng_seed))?;
        EmpiricalDistribution::from_samples(self.num_qubits, &shots)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn assert_amps(state: &QuantumState, expected: &[Complex64]) {
        for (a, e) in state.amplitudes().iter().zip(expected) {
            assert!((a - e).norm() < 1e-12, "{a} != {e}");
        }
    }

    #[test]
    fn zero_state_and_capacity_guard() {
        assert_amps(&QuantumState::zero(1).unwrap(), &[c(1.0, 0.0), c(0.0, 0.0)]);
        assert_eq!(QuantumState::zero(2).unwrap().amplitudes().len(), 4);
        assert!(matches!(QuantumState::zero(25), Err(Error::Capacity(_))));
        assert!(matches!(QuantumState::zero(0), Err(Error::Capacity(_))));
    }

    #[test]
    fn wrap_angle_range() {
        assert_eq!(wrap_angle(PI), -PI);
        assert!((wrap_angle(3.0 * PI / 2.0) + FRAC_PI_2).abs() < 1e-15);
        assert_eq!(wrap_angle(0.25), 0.25);
        for k in -20..20 {
            let w = wrap_angle(0.1 * k as f64 * PI);
            assert!((-PI..PI).contains(&w));
        }
    }

    #[test]
    fn rz_on_plus_state() {
        let h = FRAC_1_SQRT_2;
        let mut s = QuantumState::from_amplitudes(vec![c(h, 0.0), c(h, 0.0)]).unwrap();
        s.apply_rz(0, PI).unwrap();
        // π wraps to -π: diag(e^{iπ/2}, e^{-iπ/2}) = i·diag(1, -1)
        assert_amps(&s, &[c(0.0, h), c(0.0, -h)]);
        let p = s.born_probabilities();
        assert!((p.prob(0) - 0.5).abs() < 1e-12 && (p.prob(1) - 0.5).abs() < 1e-12);

        let mut z = QuantumState::zero(1).unwrap();
        z.apply_rz(0, 1.234).unwrap();
        assert!((z.born_probabilities().prob(0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rx_examples() {
        let mut s = QuantumState::zero(1).unwrap();
        s.apply_rx(0, 0.0).unwrap();
        assert_amps(&s, &[c(1.0, 0.0), c(0.0, 0.0)]);

        let mut s = QuantumState::zero(1).unwrap();
        s.apply_rx(0, FRAC_PI_2).unwrap();
        let h = FRAC_1_SQRT_2;
        assert_amps(&s, &[c(h, 0.0), c(0.0, -h)]);

        let mut s = QuantumState::zero(1).unwrap();
        s.apply_rx(0, PI).unwrap();
        assert!((s.born_probabilities().prob(1) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn xx_examples_and_errors() {
        let mut s = QuantumState::zero(2).unwrap();
        s.apply_xx(0, 1, FRAC_PI_2).unwrap();
        let h = FRAC_1_SQRT_2;
        assert_amps(&s, &[c(h, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, -h)]);

        assert!(matches!(s.apply_xx(1, 1, 0.3), Err(Error::InvalidArgument(_))));
        assert!(matches!(s.apply_xx(0, 2, 0.3), Err(Error::QubitIndex { index: 2, .. })));
        assert!(matches!(s.apply_rx(5, 0.3), Err(Error::QubitIndex { .. })));
        assert!(s.apply_rz(0, f64::NAN).is_err());
    }

    #[test]
    fn gms_on_two_qubits_is_single_xx() {
        let mut a = QuantumState::zero(2).unwrap();
        a.apply_rx(1, 0.7).unwrap();
        let mut b = a.clone();
        a.apply_gms(1.1).unwrap();
        b.apply_xx(0, 1, 1.1).unwrap();
        assert_eq!(a, b);
        assert!(QuantumState::zero(1).unwrap().apply_gms(0.5).is_err());
    }

    #[test]
    fn gms_zero_is_identity() {
        let mut s = QuantumState::zero(3).unwrap();
        s.apply_rx(0, 0.4).unwrap();
        let before = s.clone();
        s.apply_gms(0.0).unwrap();
        assert_eq!(s, before);
    }

    #[test]
    fn shots_follow_support() {
        let s = QuantumState::zero(3).unwrap();
        let d = s.sample_shots(1000, 9).unwrap();
        assert_eq!(d.prob(0), 1.0);
        assert!(s.sample_shots(0, 9).is_err());

        let mut ghz = QuantumState::zero(4).unwrap();
        ghz.apply_gms(FRAC_PI_2).unwrap();
        let d = ghz.sample_shots(1000, 3).unwrap();
        assert_eq!(d.support().map(|(i, _)| i).collect::<Vec<_>>(), vec![0, 15]);
    }

    #[test]
    fn shots_are_seed_deterministic() {
        let mut s = QuantumState::zero(3).unwrap();
        s.apply_rx(0, 1.0).unwrap();
        s.apply_xx(1, 2, 0.6).unwrap();
        assert_eq!(s.sample_shots(500, 4).unwrap(), s.sample_shots(500, 4).unwrap());
    }
}
