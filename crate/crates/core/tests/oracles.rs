mod common;

use std::f64::consts::PI;

use nalgebra::DVector;
use num_complex::Complex64;
use qcbm::circuit::{CircuitTemplate, Topology};
use qcbm::costs::cost_emd;
use qcbm::QuantumState;
use rand::Rng;

use common::*;

const GATE_TOL: f64 = 1e-10;

fn check(expected: &DVector<Complex64>, got: &QuantumState) {
    let d = phase_free_distance(expected, &as_vector(got));
    assert!(d < GATE_TOL, "distance {d:e}");
}

#[test]
fn single_qubit_gates_match_dense_matrices() {
    let mut rng = test_rng(1);
    for n in 1..=4 {
        for _ in 0..40 {
            let psi = random_state(n, &mut rng);
            let theta = rng.random_range(-4.0 * PI..4.0 * PI);
            let q = rng.random_range(0..n);
            let mut s = psi.clone();
            s.apply_rz(q, theta).unwrap();
            check(&(embed(&rz_matrix(theta), q, n) * as_vector(&psi)), &s);
            let mut s = psi.clone();
            s.apply_rx(q, theta).unwrap();
            check(&(embed(&rx_matrix(theta), q, n) * as_vector(&psi)), &s);
        }
    }
}

#[test]
fn xx_and_gms_match_dense_matrices() {
    let mut rng = test_rng(2);
    for n in 2..=4 {
        for _ in 0..40 {
            let psi = random_state(n, &mut rng);
            let theta = rng.random_range(-4.0 * PI..4.0 * PI);
            let i = rng.random_range(0..n);
            let j = (i + rng.random_range(1..n)) % n;
            let mut s = psi.clone();
            s.apply_xx(i, j, theta).unwrap();
            check(&(xx_matrix(i, j, theta, n) * as_vector(&psi)), &s);

            let mut s = psi.clone();
            s.apply_gms(theta).unwrap();
            let mut expected = as_vector(&psi);
            for a in 0..n {
                for b in a + 1..n {
                    expected = xx_matrix(a, b, theta, n) * expected;
                }
            }
            check(&expected, &s);
        }
    }
}

#[test]
fn exact_angles_without_phase_alignment() {
    // inside [-π, π) no global phase is introduced
    let mut rng = test_rng(3);
    let psi = random_state(3, &mut rng);
    let theta = 1.3;
    let mut s = psi.clone();
    s.apply_xx(0, 2, theta).unwrap();
    s.apply_rx(1, -theta).unwrap();
    s.apply_rz(2, 0.4).unwrap();
    let expected = embed(&rz_matrix(0.4), 2, 3) * embed(&rx_matrix(-theta), 1, 3) * xx_matrix(0, 2, theta, 3) * as_vector(&psi);
    let gap = expected
        .iter()
        .zip(s.amplitudes())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    assert!(gap < GATE_TOL);
}

fn edges(topology: Topology, n: usize) -> Vec<(usize, usize)> {
    let mut e = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let keep = match topology {
                Topology::All => true,
                Topology::Chain => j == i + 1,
                Topology::Star => i == 0,
            };
            if keep {
                e.push((i, j));
            }
        }
    }
    e
}

/// Dense re-implementation of the layered template from its layout rules.
fn template_oracle(n: usize, layers: usize, topology: Topology, params: &[f64]) -> DVector<Complex64> {
    let mut v = DVector::from_element(1 << n, Complex64::new(0.0, 0.0));
    v[0] = Complex64::new(1.0, 0.0);
    let mut k = 0;
    let mut take = || {
        k += 1;
        params[k - 1]
    };
    for l in 1..=layers {
        if l % 2 == 1 {
            let leading = l > 1;
            let trailing = !(l == layers && layers % 2 == 1 && layers > 1);
            for q in 0..n {
                if leading {
                    v = embed(&rz_matrix(take()), q, n) * v;
                }
                v = embed(&rx_matrix(take()), q, n) * v;
                if trailing {
                    v = embed(&rz_matrix(take()), q, n) * v;
                }
            }
        } else {
            for (i, j) in edges(topology, n) {
                v = xx_matrix(i, j, take(), n) * v;
            }
        }
    }
    assert_eq!(k, params.len(), "oracle consumed every parameter");
    v
}

#[test]
fn templates_match_layered_oracle() {
    let mut rng = test_rng(4);
    for n in 2..=4 {
        for layers in 1..=5 {
            for topology in [Topology::All, Topology::Chain, Topology::Star] {
                let t = CircuitTemplate::new(n, layers, topology).unwrap();
                let params: Vec<f64> = (0..t.param_count()).map(|_| rng.random_range(-PI..PI)).collect();
                let state = t.execute(&params).unwrap();
                check(&template_oracle(n, layers, topology, &params), &state);
            }
        }
    }
}

#[test]
fn emd_matches_transport_lp() {
    let mut rng = test_rng(5);
    for k in 0..50 {
        let n = 1 + k % 4;
        let p = random_distribution(n, &mut rng);
        let q = random_distribution(n, &mut rng);
        let (fast, lp) = (cost_emd(&p, &q).unwrap(), emd_lp(&p, &q));
        assert!((fast - lp).abs() < 1e-9, "pair {k}: {fast} vs {lp}");
    }
}

#[test]
fn emd_is_a_metric_on_random_triples() {
    let mut rng = test_rng(6);
    for k in 0..30 {
        let n = 1 + k % 4;
        let a = random_distribution(n, &mut rng);
        let b = random_distribution(n, &mut rng);
        let c = random_distribution(n, &mut rng);
        let ab = cost_emd(&a, &b).unwrap();
        assert!((ab - cost_emd(&b, &a).unwrap()).abs() < 1e-12);
        assert!((ab - emd_lp(&a, &b)).abs() < 1e-9);
        assert!(ab <= cost_emd(&a, &c).unwrap() + cost_emd(&c, &b).unwrap() + 1e-12);
        assert!(cost_emd(&a, &a).unwrap().abs() < 1e-12);
    }
}
