//! Synthetic data sets: bars and stripes, random thermal Ising, and the
//! zero-temperature ferromagnet.
//!
//! BAS pixels map to qubits row-major; black (`-1`) is bit `1`.

use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand_distr::Normal;
use serde::{Deserialize, Serialize};

use crate::basis::{self, SpinString, MAX_QUBITS};
use crate::distribution::{check_register, EmpiricalDistribution};
use crate::error::{Error, Result};
use crate::rng;

/// Reference temperature `T_c`.
pub const CRITICAL_TEMPERATURE: f64 = 1.0;

/// The easy / intermediate / hard temperatures `{2T_c, T_c, T_c/1.5}`.
pub const TEMPERATURE_PRESET: [f64; 3] = [
    2.0 * CRITICAL_TEMPERATURE,
    CRITICAL_TEMPERATURE,
    CRITICAL_TEMPERATURE / 1.5,
];

/// Largest system the thermal generator enumerates exactly.
pub const MAX_THERMAL_SPINS: usize = 20;

fn check_bas_shape(n: usize, m: usize) -> Result<()> {
    if n == 0 || m == 0 {
        return Err(Error::arg(format!("BAS({n},{m}) needs positive dimensions")));
    }
    if n.saturating_mul(m) > MAX_QUBITS {
        return Err(Error::Capacity(format!(
            "BAS({n},{m}) needs {} pixels, limit is {MAX_QUBITS}",
            n.saturating_mul(m)
        )));
    }
    Ok(())
}

/// Number of BAS(n, m) patterns, `2^n + 2^m − 2`.
pub fn bas_count(n: usize, m: usize) -> usize {
    (1usize << n) + (1usize << m) - 2
}

/// Basis indices of all BAS(n, m) patterns, ascending.
pub fn bas_indices(n: usize, m: usize) -> Result<Vec<usize>> {
    check_bas_shape(n, m)?;
    let nm = n * m;
    let mut set = BTreeSet::new();
    // stripes: each of the n rows is constant
    for rows in 0..(1usize << n) {
        let mut index = 0usize;
        for r in 0..n {
            if rows >> (n - 1 - r) & 1 == 1 {
                for c in 0..m {
                    index |= basis::qubit_mask(r * m + c, nm);
                }
            }
        }
        set.insert(index);
    }
    // bars: each of the m columns is constant
    for cols in 0..(1usize << m) {
        let mut index = 0usize;
        for c in 0..m {
            if cols >> (m - 1 - c) & 1 == 1 {
                for r in 0..n {
                    index |= basis::qubit_mask(r * m + c, nm);
                }
            }
        }
        set.insert(index);
    }
    Ok(set.into_iter().collect())
}

pub fn bas_patterns(n: usize, m: usize) -> Result<Vec<SpinString>> {
    Ok(bas_indices(n, m)?
        .into_iter()
        .map(|i| SpinString::from_index(i, n * m))
        .collect())
}

/// True iff every row is constant or every column is constant.
pub fn is_bas(pattern: &SpinString, n: usize, m: usize) -> Result<bool> {
    if pattern.len() != n * m {
        return Err(Error::arg(format!(
            "pattern of length {} is not a {n}x{m} image",
            pattern.len()
        )));
    }
    Ok(is_bas_values(pattern.values(), n, m))
}

#[cfg(test)]
fn is_bas_index(index: usize, n: usize, m: usize) -> bool {
    let values: Vec<i8> = SpinString::from_index(index, n * m).into();
    is_bas_values(&values, n, m)
}

fn is_bas_values(px: &[i8], n: usize, m: usize) -> bool {
    let rows_constant = (0..n).all(|r| px[r * m..(r + 1) * m].iter().all(|&v| v == px[r * m]));
    let cols_constant = (0..m).all(|c| (0..n).all(|r| px[r * m + c] == px[c]));
    rows_constant || cols_constant
}

/// Uniform distribution over BAS(n, m).
pub fn bas_distribution(n: usize, m: usize) -> Result<EmpiricalDistribution> {
    EmpiricalDistribution::uniform_over(n * m, &bas_indices(n, m)?)
}

/// Equal mass on `|0…0⟩` and `|1…1⟩`.
pub fn ferromagnet_distribution(num_qubits: usize) -> Result<EmpiricalDistribution> {
    check_register(num_qubits)?;
    EmpiricalDistribution::uniform_over(num_qubits, &[0, (1 << num_qubits) - 1])
}

/// Ising model with `P(x) ∝ exp((Σ_{i<j} J_ij x_i x_j + Σ_i h_i x_i) / T)`.
///
/// Each coupled pair enters the energy once. Note the sign: the exponent is
/// `+E/T`, so configurations with large `E` are the likely ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsingInstance {
    num_spins: usize,
    /// Row-major `N×N`, symmetric with zero diagonal.
    couplings: Vec<f64>,
    fields: Vec<f64>,
    temperature: f64,
}

impl IsingInstance {
    pub fn new(couplings: Vec<Vec<f64>>, fields: Vec<f64>, temperature: f64) -> Result<Self> {
        let n = fields.len();
        if n == 0 || n > MAX_THERMAL_SPINS {
            return Err(Error::arg(format!("Ising size {n} outside 1..={MAX_THERMAL_SPINS}")));
        }
        if !(temperature.is_finite() && temperature > 0.0) {
            return Err(Error::arg(format!("temperature must be positive, got {temperature}")));
        }
        if couplings.len() != n || couplings.iter().any(|row| row.len() != n) {
            return Err(Error::arg("coupling matrix must be N×N"));
        }
        for i in 0..n {
            if couplings[i][i] != 0.0 {
                return Err(Error::arg("coupling matrix must have a zero diagonal"));
            }
            for j in 0..i {
                if couplings[i][j] != couplings[j][i] {
                    return Err(Error::arg("coupling matrix must be symmetric"));
                }
            }
        }
        Ok(IsingInstance {
            num_spins: n,
            couplings: couplings.into_iter().flatten().collect(),
            fields,
            temperature,
        })
    }

    pub fn num_spins(&self) -> usize {
        self.num_spins
    }

    pub fn coupling(&self, i: usize, j: usize) -> f64 {
        self.couplings[i * self.num_spins + j]
    }

    pub fn fields(&self) -> &[f64] {
        &self.fields
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    /// Same couplings and fields at another temperature.
    pub fn with_temperature(&self, temperature: f64) -> Result<Self> {
        if !(temperature.is_finite() && temperature > 0.0) {
            return Err(Error::arg(format!("temperature must be positive, got {temperature}")));
        }
        Ok(IsingInstance {
            temperature,
            ..self.clone()
        })
    }

    pub fn energy(&self, spins: &[f64]) -> f64 {
        let n = self.num_spins;
        let mut e = 0.0;
        for i in 0..n {
            e += self.fields[i] * spins[i];
            for j in i + 1..n {
                e += self.coupling(i, j) * spins[i] * spins[j];
            }
        }
        e
    }
}

/// Couplings `J_ij` (`i < j`, row-major) then fields `h_i`, all drawn i.i.d.
/// from `Normal(0, √N)`. The draws do not depend on `temperature`, so one
/// seed gives the same instance at every temperature.
pub fn random_ising_instance(num_spins: usize, temperature: f64, rng_seed: u64) -> Result<IsingInstance> {
    if num_spins == 0 || num_spins > MAX_THERMAL_SPINS {
        return Err(Error::arg(format!(
            "Ising size {num_spins} outside 1..={MAX_THERMAL_SPINS}"
        )));
    }
    let normal = Normal::new(0.0, (num_spins as f64).sqrt()).expect("positive std");
    let mut rng = rng::seeded(rng_seed);
    let mut couplings = vec![vec![0.0; num_spins]; num_spins];
    for i in 0..num_spins {
        for j in i + 1..num_spins {
            let v = normal.sample(&mut rng);
            couplings[i][j] = v;
            couplings[j][i] = v;
        }
    }
    let fields = (0..num_spins).map(|_| normal.sample(&mut rng)).collect();
    IsingInstance::new(couplings, fields, temperature)
}

/// Exact Boltzmann distribution by enumerating all `2^N` configurations.
pub fn thermal_distribution(instance: &IsingInstance) -> Result<EmpiricalDistribution> {
    let n = instance.num_spins();
    let exponents: Vec<f64> = (0..1usize << n)
        .map(|idx| {
            let spins: Vec<f64> = (0..n).map(|q| basis::spin(idx, q, n)).collect();
            instance.energy(&spins) / instance.temperature()
        })
        .collect();
    let shift = exponents.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights = exponents.into_iter().map(|x| (x - shift).exp()).collect();
    EmpiricalDistribution::from_weights(n, weights)
}

/// A list of samples (basis indices) on a fixed register.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dataset {
    pub num_qubits: usize,
    pub samples: Vec<usize>,
}

impl Dataset {
    pub fn new(num_qubits: usize, samples: Vec<usize>) -> Result<Self> {
        check_register(num_qubits)?;
        if samples.is_empty() {
            return Err(Error::arg("data set is empty"));
        }
        if let Some(s) = samples.iter().find(|&&s| s >> num_qubits != 0) {
            return Err(Error::arg(format!("sample {s} outside a {num_qubits}-bit register")));
        }
        Ok(Dataset { num_qubits, samples })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn empirical(&self) -> EmpiricalDistribution {
        EmpiricalDistribution::from_samples(self.num_qubits, &self.samples).expect("validated on construction")
    }

    /// One `'0'/'1'` string per line.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(self.samples.len() * (self.num_qubits + 1));
        for &s in &self.samples {
            out.push_str(&basis::format_bits(s, self.num_qubits));
            out.push('\n');
        }
        out
    }

    /// Parses the line format; blank lines and `#` comments are skipped.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut width = None;
        let mut samples = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (index, len) = basis::parse_bits(line)
                .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?;
            match width {
                None => width = Some(len),
                Some(w) if w != len => {
                    return Err(Error::Parse(format!(
                        "line {}: expected {w} bits, found {len}",
                        lineno + 1
                    )))
                }
                _ => {}
            }
            samples.push(index);
        }
        let num_qubits = width.ok_or_else(|| Error::Parse("no samples in input".into()))?;
        Dataset::new(num_qubits, samples)
    }
}

/// I.i.d. draws from an exact distribution, reproducible per seed.
pub fn draw_dataset(dist: &EmpiricalDistribution, size: usize, rng_seed: u64) -> Result<Dataset> {
    if size == 0 {
        return Err(Error::arg("data set size must be at least 1"));
    }
    let sampler = WeightedIndex::new(dist.probabilities())
        .map_err(|e| Error::arg(format!("distribution cannot be sampled: {e}")))?;
    let mut rng = rng::seeded(rng_seed);
    let samples = (0..size).map(|_| sampler.sample(&mut rng)).collect();
    Dataset::new(dist.num_qubits(), samples)
}

/// Generator recipe for a target distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Generator {
    Bas { n: usize, m: usize },
    Ferromagnet { num_qubits: usize },
    Thermal {
        num_qubits: usize,
        temperature: f64,
        instance_seed: u64,
    },
}

impl Generator {
    pub fn num_qubits(&self) -> usize {
        match *self {
            Generator::Bas { n, m } => n * m,
            Generator::Ferromagnet { num_qubits } | Generator::Thermal { num_qubits, .. } => num_qubits,
        }
    }

    pub fn target(&self) -> Result<EmpiricalDistribution> {
        match *self {
            Generator::Bas { n, m } => bas_distribution(n, m),
            Generator::Ferromagnet { num_qubits } => ferromagnet_distribution(num_qubits),
            Generator::Thermal {
                num_qubits,
                temperature,
                instance_seed,
            } => thermal_distribution(&random_ising_instance(num_qubits, temperature, instance_seed)?),
        }
    }
}

/// Sidecar document written next to an exported data set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMetadata {
    pub generator: Generator,
    pub size: usize,
    pub seed: u64,
}

pub fn metadata_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".meta.json");
    path.with_file_name(name)
}

/// Writes `path` (one bit string per line) and `<path>.meta.json`.
pub fn export_dataset(path: &Path, data: &Dataset, meta: &DatasetMetadata) -> Result<()> {
    let mut f = fs::File::create(path)?;
    f.write_all(data.to_text().as_bytes())?;
    let json = serde_json::to_string_pretty(meta).map_err(|e| Error::Parse(e.to_string()))?;
    fs::write(metadata_path(path), json + "\n")?;
    Ok(())
}

/// Reads a sample file; the sidecar is returned when present.
pub fn import_dataset(path: &Path) -> Result<(Dataset, Option<DatasetMetadata>)> {
    let data = Dataset::from_text(&fs::read_to_string(path)?)?;
    let meta_path = metadata_path(path);
    let meta = if meta_path.exists() {
        let text = fs::read_to_string(meta_path)?;
        Some(serde_json::from_str(&text).map_err(|e| Error::Parse(e.to_string()))?)
    } else {
        None
    };
    Ok((data, meta))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spins(v: &[i8]) -> SpinString {
        SpinString::new(v.to_vec()).unwrap()
    }

    #[test]
    fn bas_counts() {
        assert_eq!(bas_patterns(2, 2).unwrap().len(), 6);
        assert_eq!(bas_patterns(3, 3).unwrap().len(), 14);
        assert_eq!(bas_patterns(1, 1).unwrap().len(), 2);
        assert_eq!(bas_patterns(2, 3).unwrap().len(), 10);
        assert!(matches!(bas_patterns(5, 5), Err(Error::Capacity(_))));
    }

    #[test]
    fn bas22_indices_are_row_major() {
        assert_eq!(bas_indices(2, 2).unwrap(), vec![0b0000, 0b0011, 0b0101, 0b1010, 0b1100, 0b1111]);
    }

    #[test]
    fn is_bas_examples() {
        assert!(is_bas(&spins(&[-1, -1, 1, 1]), 2, 2).unwrap());
        assert!(!is_bas(&spins(&[-1, 1, 1, -1]), 2, 2).unwrap());
        assert!(is_bas(&spins(&[1, 1, 1, 1]), 2, 2).unwrap());
        assert!(is_bas(&spins(&[-1, 1, -1, 1]), 2, 2).unwrap());
        assert!(is_bas(&spins(&[1, 1, 1]), 2, 2).is_err());
    }

    #[test]
    fn bas_distribution_is_uniform_on_patterns() {
        let d = bas_distribution(2, 2).unwrap();
        for i in 0..16 {
            let expected = if is_bas_index(i, 2, 2) { 1.0 / 6.0 } else { 0.0 };
            assert!((d.prob(i) - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn ising_instance_is_seeded_and_symmetric() {
        let a = random_ising_instance(4, 1.0, 11).unwrap();
        let b = random_ising_instance(4, 1.0, 11).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, random_ising_instance(4, 1.0, 12).unwrap());
        for i in 0..4 {
            assert_eq!(a.coupling(i, i), 0.0);
            for j in 0..4 {
                assert_eq!(a.coupling(i, j), a.coupling(j, i));
            }
        }
        assert!(random_ising_instance(21, 1.0, 0).is_err());
        assert!(random_ising_instance(3, 0.0, 0).is_err());
        let hot = random_ising_instance(4, 2.0, 11).unwrap();
        assert_eq!(hot.with_temperature(1.0).unwrap(), a);
    }

    #[test]
    fn flat_energies_give_uniform() {
        let inst = IsingInstance::new(vec![vec![0.0; 3]; 3], vec![0.0; 3], 1.0).unwrap();
        let d = thermal_distribution(&inst).unwrap();
        assert!(d.probabilities().iter().all(|&p| (p - 0.125).abs() < 1e-15));
    }

    #[test]
    fn strong_ferromagnetic_pair_concentrates_on_aligned() {
        let inst = IsingInstance::new(vec![vec![0.0, 10.0], vec![10.0, 0.0]], vec![0.0, 0.0], 0.5).unwrap();
        let d = thermal_distribution(&inst).unwrap();
        // aligned: e^{+20} each, anti-aligned: e^{-20} each
        let anti = 1.0 / (2.0 + 2.0 * (40.0f64).exp());
        assert!((d.prob(0b00) - d.prob(0b11)).abs() < 1e-15);
        assert!((d.prob(0b01) - anti).abs() < 1e-25);
        assert!(d.prob(0) > 0.4999999);
    }

    #[test]
    fn ferromagnet_support() {
        let d = ferromagnet_distribution(3).unwrap();
        assert_eq!(d.support().collect::<Vec<_>>(), vec![(0, 0.5), (7, 0.5)]);
    }

    #[test]
    fn draws_are_deterministic_and_in_support() {
        let d = ferromagnet_distribution(3).unwrap();
        let a = draw_dataset(&d, 1000, 5).unwrap();
        assert_eq!(a, draw_dataset(&d, 1000, 5).unwrap());
        assert!(a.samples.iter().all(|&s| s == 0 || s == 7));
        assert!(draw_dataset(&d, 0, 5).is_err());
    }

    #[test]
    fn text_format_round_trip_and_errors() {
        let data = Dataset::new(3, vec![0, 5, 7]).unwrap();
        assert_eq!(data.to_text(), "000\n101\n111\n");
        assert_eq!(Dataset::from_text(&data.to_text()).unwrap(), data);
        assert!(Dataset::from_text("01\n011\n").is_err());
        assert!(Dataset::from_text("# nothing\n").is_err());
    }
}
