//! Random instance generators for tests, benchmarks, and the built-in
//! verification suites: circuits (geometric and all-to-all), product states,
//! measurement bases, Pauli strings, and X-type generator sets.
//!
//! Everything draws through [`crate::rng::uniform_f64`] so instance synthesis
//! participates in the same reproducibility contract as sampling.

use crate::circuit::{BlochRotation, CliffordCircuit, CliffordGate, Geometry, MeasurementBasis, ProductState};
use crate::gf2::{BitVector, Gf2Matrix};
use crate::iqp_sampler::{IqpCircuit, IqpGate};
use crate::pauli::{PauliOp, PauliString};
use crate::rng::uniform_f64;
use crate::Error;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

fn pick(rng: &mut ChaCha8Rng, n: usize) -> usize {
    // Uniform over 0..n via the shared double contract; bias is 2^-53-scale.
    ((uniform_f64(rng) * n as f64) as usize).min(n - 1)
}

fn random_one_qubit_gate(rng: &mut ChaCha8Rng, q: usize) -> CliffordGate {
    match pick(rng, 6) {
        0 => CliffordGate::H(q),
        1 => CliffordGate::S(q),
        2 => CliffordGate::Sdg(q),
        3 => CliffordGate::X(q),
        4 => CliffordGate::Y(q),
        _ => CliffordGate::Z(q),
    }
}

fn random_two_qubit_gate(rng: &mut ChaCha8Rng, a: usize, b: usize) -> CliffordGate {
    match pick(rng, 4) {
        0 => CliffordGate::Cnot(a, b),
        1 => CliffordGate::Cnot(b, a),
        2 => CliffordGate::Cz(a, b),
        _ => CliffordGate::Swap(a, b),
    }
}

/// 1D nearest-neighbor brickwork: two-qubit gates on alternating even/odd
/// pairs, random one-qubit gates on the unpaired boundary qubits.
pub fn brickwork_1d(rng: &mut ChaCha8Rng, n: usize, depth: usize) -> Result<CliffordCircuit, Error> {
    let geometry = Geometry::new(vec![n])?;
    let mut layers = Vec::with_capacity(depth);
    for layer in 0..depth {
        let mut gates = Vec::new();
        let start = layer % 2;
        if start == 1 {
            gates.push(random_one_qubit_gate(rng, 0));
        }
        let mut q = start;
        while q + 1 < n {
            gates.push(random_two_qubit_gate(rng, q, q + 1));
            q += 2;
        }
        if q < n {
            gates.push(random_one_qubit_gate(rng, q));
        }
        layers.push(gates);
    }
    CliffordCircuit::new(n, layers, Some(geometry))
}

/// All-to-all random circuit: each layer pairs up a random subset of qubits
/// and sprinkles one-qubit gates on the rest.
pub fn random_clifford_circuit(
    rng: &mut ChaCha8Rng,
    n: usize,
    depth: usize,
) -> Result<CliffordCircuit, Error> {
    let mut layers = Vec::with_capacity(depth);
    for _ in 0..depth {
        let mut order: Vec<usize> = (0..n).collect();
        // Fisher-Yates driven by the shared draw contract.
        for i in (1..n).rev() {
            order.swap(i, pick(rng, i + 1));
        }
        let mut gates = Vec::new();
        let mut i = 0;
        while i < n {
            if i + 1 < n && uniform_f64(rng) < 0.6 {
                gates.push(random_two_qubit_gate(rng, order[i], order[i + 1]));
                i += 2;
            } else {
                if uniform_f64(rng) < 0.8 {
                    gates.push(random_one_qubit_gate(rng, order[i]));
                }
                i += 1;
            }
        }
        layers.push(gates);
    }
    CliffordCircuit::new(n, layers, None)
}

/// Uniform point on the Bloch sphere.
pub fn random_unit_axis(rng: &mut ChaCha8Rng) -> [f64; 3] {
    let z = 2.0 * uniform_f64(rng) - 1.0;
    let phi = 2.0 * PI * uniform_f64(rng);
    let r = (1.0 - z * z).max(0.0).sqrt();
    [r * phi.cos(), r * phi.sin(), z]
}

/// Random pure product input state.
pub fn random_product_state(rng: &mut ChaCha8Rng, n: usize) -> ProductState {
    let blochs: Vec<[f64; 3]> = (0..n).map(|_| random_unit_axis(rng)).collect();
    ProductState::from_bloch(blochs).expect("unit vectors are valid Bloch vectors")
}

/// Random per-qubit measurement axes.
pub fn random_measurement_basis(rng: &mut ChaCha8Rng, n: usize) -> MeasurementBasis {
    let axes: Vec<[f64; 3]> = (0..n).map(|_| random_unit_axis(rng)).collect();
    MeasurementBasis::from_axes(axes).expect("unit vectors are valid axes")
}

/// Random single-qubit rotation for conjugated-circuit tests.
pub fn random_bloch_rotation(rng: &mut ChaCha8Rng) -> BlochRotation {
    BlochRotation::new(random_unit_axis(rng), 2.0 * PI * uniform_f64(rng))
        .expect("unit axis is always valid")
}

/// Uniform random Pauli string (letters only, phase +1). May be identity.
pub fn random_pauli_string(rng: &mut ChaCha8Rng, n: usize) -> PauliString {
    let ops: Vec<PauliOp> = (0..n)
        .map(|_| match pick(rng, 4) {
            0 => PauliOp::I,
            1 => PauliOp::X,
            2 => PauliOp::Y,
            _ => PauliOp::Z,
        })
        .collect();
    PauliString::from_ops(&ops)
}

/// Random subset of `0..n` of the given size, sorted ascending.
pub fn random_subset(rng: &mut ChaCha8Rng, n: usize, size: usize) -> Vec<usize> {
    assert!(size <= n);
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        order.swap(i, pick(rng, i + 1));
    }
    let mut subset = order[..size].to_vec();
    subset.sort_unstable();
    subset
}

/// Diagonal-plus-CNOT circuit on a 1D line: nearest-neighbor entangling
/// gates in brickwork order, random phase gates in between, and an
/// occasional three-qubit CCZ on consecutive qubits.
pub fn random_iqp_circuit(
    rng: &mut ChaCha8Rng,
    n: usize,
    depth: usize,
    with_geometry: bool,
) -> Result<IqpCircuit, Error> {
    let geometry = if with_geometry { Some(Geometry::new(vec![n])?) } else { None };
    let mut layers = Vec::with_capacity(depth);
    for layer in 0..depth {
        let mut gates: Vec<IqpGate> = Vec::new();
        let mut used = vec![false; n];
        let start = layer % 2;
        let mut q = start;
        while q + 1 < n {
            let r = uniform_f64(rng);
            if r < 0.25 && q + 2 < n && with_geometry {
                // CCZ spans three consecutive qubits; exempt from the
                // pairwise neighbor rule.
                gates.push(IqpGate::Ccz(q, q + 1, q + 2));
                used[q] = true;
                used[q + 1] = true;
                used[q + 2] = true;
                q += 3;
            } else if r < 0.6 {
                gates.push(IqpGate::Cnot(q, q + 1));
                used[q] = true;
                used[q + 1] = true;
                q += 2;
            } else {
                gates.push(IqpGate::CPhase { theta: 2.0 * PI * uniform_f64(rng), a: q, b: q + 1 });
                used[q] = true;
                used[q + 1] = true;
                q += 2;
            }
        }
        for i in 0..n {
            if !used[i] && uniform_f64(rng) < 0.5 {
                gates.push(IqpGate::Phase { theta: 2.0 * PI * uniform_f64(rng), q: i });
            }
        }
        layers.push(gates);
    }
    IqpCircuit::new(n, layers, geometry, None)
}

/// Random set of independent X-type generators over `n` qubits, as rows of
/// an X-part matrix. The row count is `<= max_generators` after dropping
/// dependent picks.
pub fn random_x_group(rng: &mut ChaCha8Rng, n: usize, max_generators: usize) -> Gf2Matrix {
    let mut rows: Vec<BitVector> = Vec::new();
    let mut attempts = 0;
    while rows.len() < max_generators && attempts < 4 * max_generators {
        attempts += 1;
        let mut v = BitVector::zeros(n);
        for i in 0..n {
            if uniform_f64(rng) < 0.5 {
                v.set(i, true);
            }
        }
        if v.is_zero() {
            continue;
        }
        let mut candidate = Gf2Matrix::from_rows(rows.clone(), n);
        candidate.push_row(v.clone());
        if candidate.rank() == rows.len() + 1 {
            rows.push(v);
        }
    }
    if rows.is_empty() {
        // Ensure at least one generator so downstream group logic is
        // exercised; X on qubit 0 is always independent.
        rows.push(BitVector::singleton(n, 0));
    }
    Gf2Matrix::from_rows(rows, n)
}
