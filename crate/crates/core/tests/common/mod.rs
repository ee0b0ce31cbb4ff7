//! Independent reference implementations used by the integration tests.
#![allow(dead_code)]

use minilp::{ComparisonOp, OptimizationDirection, Problem};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use qcbm::{EmpiricalDistribution, QuantumState};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type CMat = DMatrix<Complex64>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity2() -> CMat {
    CMat::identity(2, 2)
}

pub fn pauli_x() -> CMat {
    CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)])
}

pub fn rz_matrix(theta: f64) -> CMat {
    CMat::from_row_slice(
        2,
        2,
        &[Complex64::from_polar(1.0, -theta / 2.0), c(0.0, 0.0), c(0.0, 0.0), Complex64::from_polar(1.0, theta / 2.0)],
    )
}

pub fn rx_matrix(theta: f64) -> CMat {
    let (s, co) = (theta / 2.0).sin_cos();
    CMat::from_row_slice(2, 2, &[c(co, 0.0), c(0.0, -s), c(0.0, -s), c(co, 0.0)])
}

/// `single` on qubit `q` of `n`, qubit 0 leftmost in the Kronecker product.
pub fn embed(single: &CMat, q: usize, n: usize) -> CMat {
    (0..n).fold(CMat::identity(1, 1), |acc, k| {
        let factor = if k == q { single.clone() } else { identity2() };
        acc.kronecker(&factor)
    })
}

/// `cos(θ/2)·1 − i sin(θ/2)·X_i X_j` as a dense matrix.
pub fn xx_matrix(i: usize, j: usize, theta: f64, n: usize) -> CMat {
    let xx = embed(&pauli_x(), i, n) * embed(&pauli_x(), j, n);
    let (s, co) = (theta / 2.0).sin_cos();
    CMat::identity(1 << n, 1 << n) * c(co, 0.0) + xx * c(0.0, -s)
}

pub fn as_vector(state: &QuantumState) -> DVector<Complex64> {
    DVector::from_column_slice(state.amplitudes())
}

/// Largest elementwise gap after removing the global phase.
pub fn phase_free_distance(a: &DVector<Complex64>, b: &DVector<Complex64>) -> f64 {
    let overlap = a.dotc(b);
    let phase = if overlap.norm() > 0.0 { overlap / overlap.norm() } else { c(1.0, 0.0) };
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x * phase - y).norm())
        .fold(0.0, f64::max)
}

/// A Haar-ish random state from Gaussian amplitudes.
pub fn random_state(n: usize, rng: &mut impl Rng) -> QuantumState {
    let amps: Vec<Complex64> = (0..1 << n)
        .map(|_| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
        .collect();
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    QuantumState::from_amplitudes(amps.into_iter().map(|a| a / norm).collect()).unwrap()
}

/// Random distribution on `n` bits with roughly half the points in support.
pub fn random_distribution(n: usize, rng: &mut impl Rng) -> EmpiricalDistribution {
    let mut w: Vec<f64> = (0..1 << n)
        .map(|_| if rng.random_bool(0.5) { rng.random::<f64>() } else { 0.0 })
        .collect();
    if w.iter().all(|&x| x == 0.0) {
        let k = rng.random_range(0..w.len());
        w[k] = 1.0;
    }
    EmpiricalDistribution::from_weights(n, w).unwrap()
}

pub fn test_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Transport LP over every pair of basis states with Hamming ground cost,
/// solved by simplex.
pub fn emd_lp(p: &EmpiricalDistribution, q: &EmpiricalDistribution) -> f64 {
    let dim = p.dim();
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let mut vars = Vec::with_capacity(dim * dim);
    for i in 0..dim {
        for j in 0..dim {
            vars.push(lp.add_var((i ^ j).count_ones() as f64, (0.0, f64::INFINITY)));
        }
    }
    for i in 0..dim {
        let row: Vec<_> = (0..dim).map(|j| (vars[i * dim + j], 1.0)).collect();
        lp.add_constraint(row.as_slice(), ComparisonOp::Eq, p.prob(i));
    }
    for j in 0..dim {
        let col: Vec<_> = (0..dim).map(|i| (vars[i * dim + j], 1.0)).collect();
        lp.add_constraint(col.as_slice(), ComparisonOp::Eq, q.prob(j));
    }
    lp.solve().expect("balanced transport LP is feasible").objective()
}
