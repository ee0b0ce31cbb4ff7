//! Reduced density matrices and von Neumann entropies (in bits), plus the
//! closed-form entropy surface of phased BAS(2,2) states.

use std::f64::consts::TAU;
use std::fmt::Write as _;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::statevector::QuantumState;

const EIGEN_FLOOR: f64 = 1e-12;
const NEGATIVE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    entries: DMatrix<Complex64>,
}

impl DensityMatrix {
    pub fn from_matrix(entries: DMatrix<Complex64>) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::arg("density matrix must be square"));
        }
        let herm_err = (&entries - entries.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if herm_err > 1e-10 {
            return Err(Error::arg(format!("matrix is not Hermitian (deviation {herm_err:e})")));
        }
        let trace = entries.trace();
        if (trace.re - 1.0).abs() > 1e-10 || trace.im.abs() > 1e-10 {
            return Err(Error::arg(format!("density matrix has trace {trace}")));
        }
        Ok(DensityMatrix { entries })
    }

    /// `|ψ⟩⟨ψ|`.
    pub fn pure(state: &QuantumState) -> Self {
        let psi = DMatrix::from_column_slice(state.amplitudes().len(), 1, state.amplitudes());
        DensityMatrix {
            entries: &psi * psi.adjoint(),
        }
    }

    pub fn dimension(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn trace(&self) -> Complex64 {
        self.entries.trace()
    }

    /// Eigenvalues with round-off negatives clamped to zero.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let eig = self.entries.clone().symmetric_eigenvalues();
        eig.iter()
            .map(|&l| {
                if l < -NEGATIVE_TOL {
                    Err(Error::arg(format!("density matrix has negative eigenvalue {l:e}")))
                } else {
                    Ok(l.max(0.0))
                }
            })
            .collect()
    }
}

/// Partial trace of `|ψ⟩⟨ψ|` onto the qubits in `keep`.
///
/// The reduced basis orders the kept qubits by ascending index, the lowest
/// being the most significant bit.
pub fn reduced_density(state: &QuantumState, keep: &[usize]) -> Result<DensityMatrix> {
    let n = state.num_qubits();
    let mut kept = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    if kept.len() != keep.len() {
        return Err(Error::arg("kept qubits must be distinct"));
    }
    if kept.is_empty() || kept.len() >= n {
        return Err(Error::arg(format!(
            "kept subset must be a nonempty proper subset of {n} qubits"
        )));
    }
    if let Some(&q) = kept.iter().find(|&&q| q >= n) {
        return Err(Error::QubitIndex { index: q, num_qubits: n });
    }
    let traced: Vec<usize> = (0..n).filter(|q| !kept.contains(q)).collect();
    let split = |bits: &[usize], index: usize| {
        bits.iter()
            .fold(0usize, |acc, &q| (acc << 1) | ((index >> (n - 1 - q)) & 1))
    };

    // ψ reshaped into (kept × traced); ρ = M M†
    let mut m = DMatrix::<Complex64>::zeros(1 << kept.len(), 1 << traced.len());
    for (index, &a) in state.amplitudes().iter().enumerate() {
        m[(split(&kept, index), split(&traced, index))] = a;
    }
    Ok(DensityMatrix {
        entries: &m * m.adjoint(),
    })
}

/// `−Tr(ρ log₂ ρ)`, summing over eigenvalues above `1e-12`.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    Ok(rho
        .eigenvalues()?
        .into_iter()
        .filter(|&l| l > EIGEN_FLOOR)
        .map(|l| -l * l.log2())
        .sum())
}

/// Mean entropy of `ρ_AB`, `ρ_AC`, `ρ_AD` for a 4-qubit pure state `ABCD`.
pub fn avg_two_qubit_entropy(state: &QuantumState) -> Result<f64> {
    if state.num_qubits() != 4 {
        return Err(Error::arg(format!(
            "average two-qubit entropy is defined for 4 qubits, got {}",
            state.num_qubits()
        )));
    }
    let mut total = 0.0;
    for partner in 1..4 {
        total += von_neumann_entropy(&reduced_density(state, &[0, partner])?)?;
    }
    Ok(total / 3.0)
}

/// Relative phases `u₁…u₅` of a state spreading equal weight over BAS(2,2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseParams {
    pub u: [f64; 5],
}

/// Basis kets carrying `e^{iu₁}`, …, `e^{iu₅}`, then the unphased `|1111⟩`.
const BAS22_KETS: [usize; 6] = [0b0000, 0b0011, 0b0101, 0b1010, 0b1100, 0b1111];

impl PhaseParams {
    /// `v₁ = u₂ − u₃ − u₄ + u₅`, reduced to `[0, 2π)`.
    pub fn v1(&self) -> f64 {
        let [_, u2, u3, u4, u5] = self.u;
        (u2 - u3 - u4 + u5).rem_euclid(TAU)
    }

    /// `v₂ = u₁ − u₃ − u₄`, reduced to `[0, 2π)`.
    pub fn v2(&self) -> f64 {
        let [u1, _, u3, u4, _] = self.u;
        (u1 - u3 - u4).rem_euclid(TAU)
    }

    pub fn state(&self) -> QuantumState {
        let norm = 1.0 / 6f64.sqrt();
        let mut amps = vec![Complex64::new(0.0, 0.0); 16];
        for (k, &ket) in BAS22_KETS.iter().enumerate() {
            let phase = self.u.get(k).copied().unwrap_or(0.0);
            amps[ket] = Complex64::from_polar(norm, phase);
        }
        QuantumState::from_amplitudes(amps).expect("six kets at 1/√6 have unit norm")
    }
}

/// `x·log₂(x)` with `0·log 0 = 0`.
fn xlog2x(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.log2()
    }
}

/// Closed-form average two-qubit entropy (bits) of the phased BAS(2,2)
/// state as a function of `v₁`, `v₂`.
///
/// The `artanh` term and the pair `log₂(4 ± 2√2·√(1+cos v₁))` diverge
/// separately at `cos(v₁/2) = ±1`; with `c = |cos(v₁/2)|` they combine into
/// `4 + (1+c)log₂(1+c) + (1−c)log₂(1−c)`, which is what is evaluated.
pub fn s_bas22_closed_form(v1: f64, v2: f64) -> f64 {
    let c = (v1 / 2.0).cos().abs().min(1.0);
    let singular = 4.0 + xlog2x(1.0 + c) + xlog2x(1.0 - c);
    // 2x·log₂(2x/3) = 2·(x log₂ x) + 2x·log₂(2/3)
    let term = |x: f64| 2.0 * xlog2x(x) + 2.0 * x * (2.0f64 / 3.0).log2();
    let a = v2 / 4.0;
    let b = (v2 - v1) / 4.0;
    let bracket = singular
        + term(a.cos().powi(2))
        + term(b.cos().powi(2))
        + term(a.sin().powi(2))
        + term(b.sin().powi(2))
        - 31104f64.log2();
    -bracket / 9.0
}

/// `(v1, v2, entropy_bits)` on a `points × points` grid over `[0, 2π)²`.
pub fn entropy_surface(points: usize) -> Vec<(f64, f64, f64)> {
    let step = TAU / points as f64;
    let mut out = Vec::with_capacity(points * points);
    for i in 0..points {
        for j in 0..points {
            let (v1, v2) = (i as f64 * step, j as f64 * step);
            out.push((v1, v2, s_bas22_closed_form(v1, v2)));
        }
    }
    out
}

pub fn entropy_surface_csv(points: usize) -> String {
    let mut csv = String::from("v1,v2,entropy_bits\n");
    for (v1, v2, s) in entropy_surface(points) {
        writeln!(csv, "{v1:.12},{v2:.12},{s:.12}").expect("writing to a String");
    }
    csv
}
