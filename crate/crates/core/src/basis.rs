//! Mapping between spin strings and computational basis indices.
//!
//! Qubit 0 is the most significant bit of a basis index. Spin `+1` is bit
//! `0` and spin `-1` is bit `1`, so the all-`+1` string is `|0…0⟩`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest register the crate will allocate a dense vector for.
pub const MAX_QUBITS: usize = 24;

/// Bit mask selecting `qubit` inside a basis index of an `num_qubits` register.
#[inline]
pub fn qubit_mask(qubit: usize, num_qubits: usize) -> usize {
    1 << (num_qubits - 1 - qubit)
}

#[inline]
pub fn bit(index: usize, qubit: usize, num_qubits: usize) -> bool {
    index & qubit_mask(qubit, num_qubits) != 0
}

/// Spin value (`±1`) of `qubit` in a basis index.
#[inline]
pub fn spin(index: usize, qubit: usize, num_qubits: usize) -> f64 {
    if bit(index, qubit, num_qubits) {
        -1.0
    } else {
        1.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<i8>", into = "Vec<i8>")]
pub struct SpinString(Vec<i8>);

impl SpinString {
    pub fn new(values: Vec<i8>) -> Result<Self> {
        if let Some(v) = values.iter().find(|&&v| v != 1 && v != -1) {
            return Err(Error::arg(format!("spin value {v} is not ±1")));
        }
        Ok(SpinString(values))
    }

    pub fn from_index(index: usize, num_qubits: usize) -> Self {
        SpinString(
            (0..num_qubits)
                .map(|q| if bit(index, q, num_qubits) { -1 } else { 1 })
                .collect(),
        )
    }

    pub fn to_index(&self) -> usize {
        self.0
            .iter()
            .fold(0usize, |acc, &s| (acc << 1) | usize::from(s == -1))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[i8] {
        &self.0
    }
}

impl TryFrom<Vec<i8>> for SpinString {
    type Error = Error;

    fn try_from(values: Vec<i8>) -> Result<Self> {
        SpinString::new(values)
    }
}

impl From<SpinString> for Vec<i8> {
    fn from(s: SpinString) -> Self {
        s.0
    }
}

impl fmt::Display for SpinString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &s in &self.0 {
            f.write_str(if s == 1 { "0" } else { "1" })?;
        }
        Ok(())
    }
}

/// Renders a basis index as `'0'/'1'` characters, qubit 0 first.
pub fn format_bits(index: usize, num_qubits: usize) -> String {
    (0..num_qubits)
        .map(|q| if bit(index, q, num_qubits) { '1' } else { '0' })
        .collect()
}

pub fn parse_bits(text: &str) -> Result<(usize, usize)> {
    let text = text.trim();
    if text.is_empty() || text.len() > MAX_QUBITS {
        return Err(Error::Parse(format!(
            "bit string must have 1..={MAX_QUBITS} characters, got {:?}",
            text
        )));
    }
    let mut index = 0usize;
    for c in text.chars() {
        index = (index << 1)
            | match c {
                '0' => 0,
                '1' => 1,
                other => return Err(Error::Parse(format!("unexpected character {other:?} in bit string"))),
            };
    }
    Ok((index, text.len()))
}
