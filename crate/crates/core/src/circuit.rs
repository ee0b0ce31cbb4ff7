//! Layered circuit templates.
//!
//! Odd layers (1, 3, …) apply an arbitrary single-qubit rotation
//! `U = Rz(θ₃)·Rx(θ₂)·Rz(θ₁)` to every qubit; even layers (2, 4, …) apply
//! `XX(θ_ij)` to every edge of the topology. Two rotations carry no
//! information and are dropped: `Rz(θ₁)` in layer 1, which acts on `|0…0⟩`,
//! and `Rz(θ₃)` in the last layer when the layer count is odd, which only
//! adds phases. When the circuit has a single layer only the first rule is
//! applied, so that layer keeps `Rx` and `Rz(θ₃)`.
//!
//! Parameters are flattened layer by layer. Inside a rotation layer they are
//! ordered by qubit, then by rotation identifier `k = 1, 2, 3` (skipping the
//! dropped ones); inside an entangling layer by edge `(i, j)` in
//! lexicographic order. This ordering is tagged [`PARAMETER_ORDER`] in
//! serialized templates.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::basis::MAX_QUBITS;
use crate::error::{Error, Result};
use crate::statevector::QuantumState;

pub const PARAMETER_ORDER: &str = "layer-major-v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Topology {
    All,
    Chain,
    Star,
}

impl Topology {
    /// Edges `(i, j)` with `i < j`, in lexicographic order.
    pub fn edges(self, num_qubits: usize) -> Vec<(usize, usize)> {
        match self {
            Topology::All => (0..num_qubits)
                .flat_map(|i| (i + 1..num_qubits).map(move |j| (i, j)))
                .collect(),
            Topology::Chain => (1..num_qubits).map(|j| (j - 1, j)).collect(),
            Topology::Star => (1..num_qubits).map(|j| (0, j)).collect(),
        }
    }

    pub fn edge_count(self, num_qubits: usize) -> usize {
        match self {
            Topology::All => num_qubits * num_qubits.saturating_sub(1) / 2,
            Topology::Chain | Topology::Star => num_qubits.saturating_sub(1),
        }
    }
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Topology::All => "all",
            Topology::Chain => "chain",
            Topology::Star => "star",
        })
    }
}

impl FromStr for Topology {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "all" => Ok(Topology::All),
            "chain" => Ok(Topology::Chain),
            "star" => Ok(Topology::Star),
            other => Err(Error::arg(format!("unknown topology {other:?} (all, chain, star)"))),
        }
    }
}

/// One layer of a template, with the rotations it actually parametrizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layer {
    Rotation { leading_rz: bool, trailing_rz: bool },
    Entangling,
}

impl Layer {
    fn rotations_per_qubit(self) -> usize {
        match self {
            Layer::Rotation { leading_rz, trailing_rz } => 1 + usize::from(leading_rz) + usize::from(trailing_rz),
            Layer::Entangling => 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "TemplateDocument", into = "TemplateDocument")]
pub struct CircuitTemplate {
    num_qubits: usize,
    num_layers: usize,
    topology: Topology,
}

impl CircuitTemplate {
    pub fn new(num_qubits: usize, num_layers: usize, topology: Topology) -> Result<Self> {
        if !(2..=MAX_QUBITS).contains(&num_qubits) {
            return Err(Error::arg(format!("circuit needs 2..={MAX_QUBITS} qubits, got {num_qubits}")));
        }
        if num_layers == 0 {
            return Err(Error::arg("circuit needs at least one layer"));
        }
        Ok(CircuitTemplate {
            num_qubits,
            num_layers,
            topology,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn num_layers(&self) -> usize {
        self.num_layers
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    pub fn layers(&self) -> Vec<Layer> {
        (1..=self.num_layers)
            .map(|l| {
                if l % 2 == 0 {
                    Layer::Entangling
                } else {
                    let first = l == 1;
                    let last_odd = l == self.num_layers && !first;
                    Layer::Rotation {
                        leading_rz: !first,
                        trailing_rz: !last_odd,
                    }
                }
            })
            .collect()
    }

    pub fn layer_param_count(&self, layer: Layer) -> usize {
        match layer {
            Layer::Rotation { .. } => layer.rotations_per_qubit() * self.num_qubits,
            Layer::Entangling => self.topology.edge_count(self.num_qubits),
        }
    }

    /// Length of the flat parameter vector.
    pub fn param_count(&self) -> usize {
        self.layers().into_iter().map(|l| self.layer_param_count(l)).sum()
    }

    /// Runs the circuit on `|0…0⟩`.
    pub fn execute(&self, params: &[f64]) -> Result<QuantumState> {
        let expected = self.param_count();
        if params.len() != expected {
            return Err(Error::arg(format!(
                "template expects {expected} parameters, got {}",
                params.len()
            )));
        }
        let mut state = QuantumState::zero(self.num_qubits)?;
        let edges = self.topology.edges(self.num_qubits);
        let mut it = params.iter().copied();
        let mut next = || it.next().expect("length checked above");
        for layer in self.layers() {
            match layer {
                Layer::Rotation { leading_rz, trailing_rz } => {
                    for q in 0..self.num_qubits {
                        if leading_rz {
                            state.apply_rz(q, next())?;
                        }
                        state.apply_rx(q, next())?;
                        if trailing_rz {
                            state.apply_rz(q, next())?;
                        }
                    }
                }
                Layer::Entangling => {
                    for &(i, j) in &edges {
                        state.apply_xx(i, j, next())?;
                    }
                }
            }
        }
        Ok(state)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("template serializes")
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }
}

/// Serialized form of a template.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct TemplateDocument {
    num_qubits: usize,
    layers: usize,
    topology: Topology,
    parameter_order: String,
}

impl From<CircuitTemplate> for TemplateDocument {
    fn from(t: CircuitTemplate) -> Self {
        TemplateDocument {
            num_qubits: t.num_qubits,
            layers: t.num_layers,
            topology: t.topology,
            parameter_order: PARAMETER_ORDER.to_string(),
        }
    }
}

impl TryFrom<TemplateDocument> for CircuitTemplate {
    type Error = Error;

    fn try_from(doc: TemplateDocument) -> Result<Self> {
        if doc.parameter_order != PARAMETER_ORDER {
            return Err(Error::Parse(format!(
                "unsupported parameter order {:?} (expected {PARAMETER_ORDER:?})",
                doc.parameter_order
            )));
        }
        CircuitTemplate::new(doc.num_qubits, doc.layers, doc.topology)
    }
}

/// Flat angle vector, ordered as described in the module docs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParameterVector(pub Vec<f64>);

impl ParameterVector {
    pub fn zeros(template: &CircuitTemplate) -> Self {
        ParameterVector(vec![0.0; template.param_count()])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

const GHZ_TOL: f64 = 1e-9;

/// GHZ preparation with one rotation layer followed by one GMS layer.
///
/// Even `N`: every `XX` at `π/2` and no single-qubit rotation. Odd `N`:
/// `Rx(π/2)` on every qubit first, then the same GMS layer. The result is
/// checked to give `{0…0: ½, 1…1: ½}` before it is returned.
pub fn build_ghz_recipe(num_qubits: usize) -> Result<(CircuitTemplate, ParameterVector)> {
    if num_qubits < 2 {
        return Err(Error::arg("GHZ recipe needs at least two qubits"));
    }
    let template = CircuitTemplate::new(num_qubits, 2, Topology::All)?;
    let rx = if num_qubits % 2 == 0 { 0.0 } else { FRAC_PI_2 };
    let mut params = Vec::with_capacity(template.param_count());
    for _ in 0..num_qubits {
        params.extend([rx, 0.0]);
    }
    params.extend(std::iter::repeat_n(FRAC_PI_2, Topology::All.edge_count(num_qubits)));

    let probs = template.execute(&params)?.born_probabilities();
    let last = (1usize << num_qubits) - 1;
    let ok = probs.probabilities().iter().enumerate().all(|(i, &p)| {
        let want = if i == 0 || i == last { 0.5 } else { 0.0 };
        (p - want).abs() <= GHZ_TOL
    });
    if !ok {
        return Err(Error::arg(format!("GHZ recipe failed its distribution check at N={num_qubits}")));
    }
    Ok((template, ParameterVector(params)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn count(n: usize, l: usize, t: Topology) -> usize {
        CircuitTemplate::new(n, l, t).unwrap().param_count()
    }

    #[test]
    fn param_counts_follow_layer_rules() {
        for t in [Topology::All, Topology::Chain, Topology::Star] {
            assert_eq!(count(4, 1, t), 8);
        }
        assert_eq!(count(4, 2, Topology::All), 14);
        assert_eq!(count(4, 2, Topology::Chain), 11);
        assert_eq!(count(4, 2, Topology::Star), 11);
        // 2N + E + 2N
        assert_eq!(count(5, 3, Topology::All), 30);
        // 2N + E + 3N + E
        assert_eq!(count(4, 4, Topology::All), 8 + 6 + 12 + 6);
    }

    #[test]
    fn chain_and_star_match_and_depth_doubling_rule() {
        for n in 2..=10 {
            assert_eq!(count(n, 2, Topology::Chain), count(n, 2, Topology::Star));
            for t in [Topology::All, Topology::Chain, Topology::Star] {
                assert_eq!(count(n, 4, t), 2 * count(n, 2, t) - 2 * n + 3 * n);
            }
        }
    }

    #[test]
    fn edges_per_topology() {
        assert_eq!(Topology::All.edges(3), vec![(0, 1), (0, 2), (1, 2)]);
        assert_eq!(Topology::Chain.edges(4), vec![(0, 1), (1, 2), (2, 3)]);
        assert_eq!(Topology::Star.edges(4), vec![(0, 1), (0, 2), (0, 3)]);
        for n in 2..8 {
            for t in [Topology::All, Topology::Chain, Topology::Star] {
                assert_eq!(t.edges(n).len(), t.edge_count(n));
            }
        }
    }

    #[test]
    fn zero_params_give_zero_state() {
        let t = CircuitTemplate::new(3, 3, Topology::Chain).unwrap();
        let p = t.execute(&ParameterVector::zeros(&t).0).unwrap().born_probabilities();
        assert_eq!(p.prob(0), 1.0);
    }

    #[test]
    fn single_xx_layer_example() {
        let t = CircuitTemplate::new(2, 2, Topology::All).unwrap();
        let p = t
            .execute(&[0.0, 0.0, 0.0, 0.0, FRAC_PI_2])
            .unwrap()
            .born_probabilities();
        assert!((p.prob(0) - 0.5).abs() < 1e-12);
        assert!((p.prob(3) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn execute_rejects_wrong_length() {
        let t = CircuitTemplate::new(2, 2, Topology::All).unwrap();
        assert!(matches!(t.execute(&[0.0; 4]), Err(Error::InvalidArgument(_))));
        assert!(CircuitTemplate::new(1, 2, Topology::All).is_err());
        assert!(CircuitTemplate::new(3, 0, Topology::All).is_err());
    }

    #[test]
    fn template_toml_round_trip() {
        let t = CircuitTemplate::new(4, 3, Topology::Star).unwrap();
        let text = t.to_toml();
        assert!(text.contains("parameter_order = \"layer-major-v1\""));
        assert_eq!(CircuitTemplate::from_toml(&text).unwrap(), t);
        let bad = text.replace("layer-major-v1", "something-else");
        assert!(CircuitTemplate::from_toml(&bad).is_err());
    }

    #[test]
    fn ghz_recipes_small() {
        for n in [2, 3, 4, 5] {
            let (t, p) = build_ghz_recipe(n).unwrap();
            let probs = t.execute(p.as_slice()).unwrap().born_probabilities();
            assert!((probs.prob(0) - 0.5).abs() < 1e-9);
            assert!((probs.prob((1 << n) - 1) - 0.5).abs() < 1e-9);
            assert!(p.as_slice().iter().all(|&a| a == 0.0 || (a.abs() - FRAC_PI_2).abs() < 1e-15));
        }
        assert!(build_ghz_recipe(1).is_err());
    }
}
