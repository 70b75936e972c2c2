//! Brute-force ground truth: dense density-matrix evolution of the same
//! noisy circuits the fast samplers handle, plus the combinatorial
//! quantities the samplers are checked against — low-weight observable
//! censuses, total variation distance, collision probabilities, and the
//! closed-form anticoncentration bound.
//!
//! Everything here is O(4^n) or worse and capped accordingly. The point is
//! not speed but independence: this module shares no machinery with the
//! samplers beyond the circuit and noise types themselves.

use num_complex::Complex64;

use crate::circuit::{CliffordCircuit, CliffordGate, MeasurementBasis, ProductState};
use crate::circuit::BlochRotation;
use crate::iqp_sampler::{IqpCircuit, IqpGate};
use crate::noise::{ErrorConfiguration, NoiseModel, SiteEvent};
use crate::pauli::{PauliOp, PauliString};
use crate::smallmat::{self, C, ONE, ZERO};
use crate::Error;

/// Hard cap on dense simulation width.
pub const MAX_DENSE_QUBITS: usize = 12;

const HERMITIAN_TOLERANCE: f64 = 1e-10;
const TRACE_TOLERANCE: f64 = 1e-10;
const EIGENVALUE_TOLERANCE: f64 = 1e-9;

const SQ2INV: f64 = std::f64::consts::FRAC_1_SQRT_2;
const MAT_H: [C; 4] = [
    Complex64::new(SQ2INV, 0.0),
    Complex64::new(SQ2INV, 0.0),
    Complex64::new(SQ2INV, 0.0),
    Complex64::new(-SQ2INV, 0.0),
];
const MAT_S: [C; 4] = [ONE, ZERO, ZERO, Complex64::new(0.0, 1.0)];
const MAT_SDG: [C; 4] = [ONE, ZERO, ZERO, Complex64::new(0.0, -1.0)];

// ---------------------------------------------------------------------------
// Density matrices.
// ---------------------------------------------------------------------------

/// Dense `2^n x 2^n` density matrix, row-major, qubit `i` on bit `i` of the
/// basis index.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n: usize,
    data: Vec<C>,
}

fn cap_check(n: usize) -> Result<(), Error> {
    if n > MAX_DENSE_QUBITS {
        Err(Error::CapExceeded { what: "dense simulation width", limit: MAX_DENSE_QUBITS, got: n })
    } else {
        Ok(())
    }
}

impl DensityMatrix {
    /// Product state from per-qubit Bloch vectors.
    pub fn from_product(state: &ProductState) -> Result<Self, Error> {
        let n = state.n_qubits();
        cap_check(n)?;
        let mut data = vec![ONE];
        let mut dim = 1;
        for q in 0..n {
            let [bx, by, bz] = state.bloch(q);
            // (I + b·σ) / 2
            let single = [
                Complex64::new((1.0 + bz) / 2.0, 0.0),
                Complex64::new(bx / 2.0, -by / 2.0),
                Complex64::new(bx / 2.0, by / 2.0),
                Complex64::new((1.0 - bz) / 2.0, 0.0),
            ];
            data = smallmat::kron(2, &single, dim, &data);
            dim *= 2;
        }
        Ok(DensityMatrix { n, data })
    }

    /// The computational basis state `|y><y|`.
    pub fn computational(n: usize, y: usize) -> Result<Self, Error> {
        cap_check(n)?;
        assert!(y < 1 << n, "basis index out of range");
        let dim = 1usize << n;
        let mut data = vec![ZERO; dim * dim];
        data[y * dim + y] = ONE;
        Ok(DensityMatrix { n, data })
    }

    /// Product of identical pure one-qubit states with amplitudes `(a, b)`.
    pub fn from_uniform_pure(n: usize, a: C, b: C) -> Result<Self, Error> {
        cap_check(n)?;
        let single = [a * a.conj(), a * b.conj(), b * a.conj(), b * b.conj()];
        let mut data = vec![ONE];
        let mut dim = 1;
        for _ in 0..n {
            data = smallmat::kron(2, &single, dim, &data);
            dim *= 2;
        }
        Ok(DensityMatrix { n, data })
    }

    #[must_use]
    pub fn n_qubits(&self) -> usize {
        self.n
    }

    #[must_use]
    pub fn dim(&self) -> usize {
        1 << self.n
    }

    #[must_use]
    pub fn data(&self) -> &[C] {
        &self.data
    }

    #[must_use]
    pub fn trace(&self) -> C {
        smallmat::trace(self.dim(), &self.data)
    }

    /// Diagonal entries as reals (the computational-basis distribution).
    #[must_use]
    pub fn diagonal(&self) -> Vec<f64> {
        let dim = self.dim();
        (0..dim).map(|i| self.data[i * dim + i].re).collect()
    }

    /// Checks Hermiticity, unit trace, and (up to 6 qubits, where the
    /// eigensolve is cheap) positive semidefiniteness.
    pub fn validate(&self) -> Result<(), Error> {
        let dim = self.dim();
        for i in 0..dim {
            for j in i..dim {
                let d = (self.data[i * dim + j] - self.data[j * dim + i].conj()).norm();
                if d > HERMITIAN_TOLERANCE {
                    return Err(Error::Tolerance { context: "density matrix hermiticity", value: d });
                }
            }
        }
        let t = self.trace();
        if (t.re - 1.0).abs() > TRACE_TOLERANCE || t.im.abs() > TRACE_TOLERANCE {
            return Err(Error::Tolerance { context: "density matrix trace", value: t.re });
        }
        if self.n <= 6 {
            let min = min_eigenvalue_hermitian(dim, &self.data);
            if min < -EIGENVALUE_TOLERANCE {
                return Err(Error::Tolerance { context: "density matrix positivity", value: min });
            }
        }
        Ok(())
    }

    /// Panicking form of [`validate`](Self::validate); test-scale matrices
    /// only.
    pub fn assert_valid(&self) {
        if let Err(e) = self.validate() {
            panic!("invalid density matrix: {e}");
        }
    }

    /// `rho -> (M ⊗ I) rho (M ⊗ I)†` with `M` (row-major 2x2) on qubit `q`.
    pub fn apply_one_qubit(&mut self, q: usize, m: &[C; 4]) {
        assert!(q < self.n, "qubit index out of range");
        let dim = self.dim();
        let bit = 1usize << q;
        // Left multiply by M.
        for j in 0..dim {
            for i0 in 0..dim {
                if i0 & bit != 0 {
                    continue;
                }
                let i1 = i0 | bit;
                let (r0, r1) = (self.data[i0 * dim + j], self.data[i1 * dim + j]);
                self.data[i0 * dim + j] = m[0] * r0 + m[1] * r1;
                self.data[i1 * dim + j] = m[2] * r0 + m[3] * r1;
            }
        }
        // Right multiply by M†.
        for i in 0..dim {
            for j0 in 0..dim {
                if j0 & bit != 0 {
                    continue;
                }
                let j1 = j0 | bit;
                let (c0, c1) = (self.data[i * dim + j0], self.data[i * dim + j1]);
                self.data[i * dim + j0] = c0 * m[0].conj() + c1 * m[1].conj();
                self.data[i * dim + j1] = c0 * m[2].conj() + c1 * m[3].conj();
            }
        }
    }

    /// Conjugation by a basis permutation that is its own inverse.
    fn apply_involution(&mut self, perm: impl Fn(usize) -> usize) {
        let dim = self.dim();
        for i in 0..dim {
            for j in 0..dim {
                let (pi, pj) = (perm(i), perm(j));
                if (pi, pj) > (i, j) {
                    self.data.swap(i * dim + j, pi * dim + pj);
                }
            }
        }
    }

    /// Conjugation by a diagonal unitary with entries `phase(i)`.
    fn apply_diagonal(&mut self, phase: impl Fn(usize) -> C) {
        let dim = self.dim();
        let phases: Vec<C> = (0..dim).map(phase).collect();
        for i in 0..dim {
            for j in 0..dim {
                self.data[i * dim + j] *= phases[i] * phases[j].conj();
            }
        }
    }

    /// Conjugation `rho -> P rho P` by a single-qubit Pauli.
    pub fn apply_pauli(&mut self, q: usize, op: PauliOp) {
        assert!(q < self.n, "qubit index out of range");
        let bit = 1usize << q;
        match op {
            PauliOp::I => {}
            PauliOp::X => self.apply_involution(|i| i ^ bit),
            PauliOp::Z => {
                self.apply_diagonal(|i| if i & bit != 0 { -ONE } else { ONE });
            }
            PauliOp::Y => {
                // Y = iXZ, and the scalars cancel under conjugation.
                self.apply_pauli(q, PauliOp::Z);
                self.apply_pauli(q, PauliOp::X);
            }
        }
    }

    /// `rho -> Σ w_k P_k rho P_k` on qubit `q`.
    fn mix_paulis(&mut self, q: usize, terms: &[(f64, PauliOp)]) {
        if let [(w, op)] = terms {
            assert!((*w - 1.0).abs() < 1e-15, "single-term mixture must have weight 1");
            self.apply_pauli(q, *op);
            return;
        }
        let mut acc = vec![ZERO; self.data.len()];
        for &(w, op) in terms {
            let mut branch = self.clone();
            branch.apply_pauli(q, op);
            let w = Complex64::new(w, 0.0);
            for (slot, v) in acc.iter_mut().zip(&branch.data) {
                *slot += w * v;
            }
        }
        self.data = acc;
    }

    /// One fired noise event, applied exactly.
    pub fn apply_site_event(&mut self, q: usize, event: SiteEvent) {
        use PauliOp::*;
        match event {
            SiteEvent::Depolarize => {
                self.mix_paulis(q, &[(0.25, I), (0.25, X), (0.25, Y), (0.25, Z)]);
            }
            SiteEvent::ProjectZ => self.mix_paulis(q, &[(0.5, I), (0.5, Z)]),
            SiteEvent::XProjectZ => self.mix_paulis(q, &[(0.5, X), (0.5, Y)]),
            SiteEvent::FlipX => self.mix_paulis(q, &[(1.0, X)]),
            SiteEvent::DetY => self.mix_paulis(q, &[(1.0, Y)]),
            SiteEvent::DetZ => self.mix_paulis(q, &[(1.0, Z)]),
        }
    }

    /// The full CPTP noise channel on qubit `q`.
    pub fn apply_noise_channel(&mut self, q: usize, model: &NoiseModel) {
        use PauliOp::*;
        match *model {
            NoiseModel::Depolarizing { gamma } => {
                let p = gamma / 4.0;
                self.mix_paulis(q, &[(1.0 - 3.0 * p, I), (p, X), (p, Y), (p, Z)]);
            }
            NoiseModel::PauliChannel { px, py, pz } => {
                self.mix_paulis(q, &[(1.0 - px - py - pz, I), (px, X), (py, Y), (pz, Z)]);
            }
        }
    }

    /// One Clifford gate as a dense unitary.
    pub fn apply_gate(&mut self, gate: &CliffordGate) {
        match *gate {
            CliffordGate::H(q) => self.apply_one_qubit(q, &MAT_H),
            CliffordGate::S(q) => self.apply_one_qubit(q, &MAT_S),
            CliffordGate::Sdg(q) => self.apply_one_qubit(q, &MAT_SDG),
            CliffordGate::X(q) => self.apply_pauli(q, PauliOp::X),
            CliffordGate::Y(q) => self.apply_pauli(q, PauliOp::Y),
            CliffordGate::Z(q) => self.apply_pauli(q, PauliOp::Z),
            CliffordGate::Cnot(c, t) => {
                let (cb, tb) = (1usize << c, 1usize << t);
                self.apply_involution(|i| if i & cb != 0 { i ^ tb } else { i });
            }
            CliffordGate::Cz(a, b) => {
                let (ab, bb) = (1usize << a, 1usize << b);
                self.apply_diagonal(|i| if i & ab != 0 && i & bb != 0 { -ONE } else { ONE });
            }
            CliffordGate::Swap(a, b) => {
                let (ab, bb) = (1usize << a, 1usize << b);
                self.apply_involution(|i| {
                    if ((i >> a) ^ (i >> b)) & 1 == 1 {
                        i ^ ab ^ bb
                    } else {
                        i
                    }
                });
            }
        }
    }

    /// One diagonal-circuit gate as a dense unitary.
    pub fn apply_iqp_gate(&mut self, gate: &IqpGate) {
        match *gate {
            IqpGate::Phase { theta, q } => {
                let rot = Complex64::from_polar(1.0, theta);
                let bit = 1usize << q;
                self.apply_diagonal(|i| if i & bit != 0 { rot } else { ONE });
            }
            IqpGate::CPhase { theta, a, b } => {
                let rot = Complex64::from_polar(1.0, theta);
                let (ab, bb) = (1usize << a, 1usize << b);
                self.apply_diagonal(|i| if i & ab != 0 && i & bb != 0 { rot } else { ONE });
            }
            IqpGate::Ccz(a, b, c) => {
                let mask = (1usize << a) | (1usize << b) | (1usize << c);
                self.apply_diagonal(|i| if i & mask == mask { -ONE } else { ONE });
            }
            IqpGate::Cnot(c, t) => {
                let (cb, tb) = (1usize << c, 1usize << t);
                self.apply_involution(|i| if i & cb != 0 { i ^ tb } else { i });
            }
        }
    }
}

/// Unitary whose first column is the `+1` eigenstate of `axis · σ`, built
/// from the polar angles `theta = acos(nz)`, `phi = atan2(ny, nx)`.
pub fn axis_unitary(axis: [f64; 3]) -> [C; 4] {
    let theta = axis[2].clamp(-1.0, 1.0).acos();
    let phi = axis[1].atan2(axis[0]);
    let (ct, st) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    let ephi = Complex64::from_polar(1.0, phi);
    [
        Complex64::new(ct, 0.0),
        -st * ephi.conj(),
        st * ephi,
        Complex64::new(ct, 0.0),
    ]
}

fn measure_in_basis(mut rho: DensityMatrix, basis: &MeasurementBasis) -> Vec<f64> {
    assert_eq!(basis.n_qubits(), rho.n_qubits(), "basis size mismatch");
    for q in 0..rho.n_qubits() {
        let u = axis_unitary(basis.axis(q));
        let udag = [u[0].conj(), u[2].conj(), u[1].conj(), u[3].conj()];
        rho.apply_one_qubit(q, &udag);
    }
    let p = rho.diagonal();
    debug_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9, "probabilities must sum to 1");
    p
}

fn noise_layer(
    rho: &mut DensityMatrix,
    layer: usize,
    model: &NoiseModel,
    config: Option<&ErrorConfiguration>,
) {
    match config {
        None => {
            for q in 0..rho.n_qubits() {
                rho.apply_noise_channel(q, model);
            }
        }
        Some(b) => {
            for site in b.sites().iter().filter(|s| s.layer == layer) {
                rho.apply_site_event(site.qubit, site.event);
            }
        }
    }
}

/// Exact output distribution of a noisy Clifford circuit on input `rho`.
/// With `config` absent every site applies the CPTP channel; with `config`
/// given, exactly the listed events fire and all other sites are the
/// identity.
pub fn exact_noisy_distribution(
    c: &CliffordCircuit,
    rho: &DensityMatrix,
    basis: &MeasurementBasis,
    model: &NoiseModel,
    config: Option<&ErrorConfiguration>,
) -> Result<Vec<f64>, Error> {
    cap_check(c.n_qubits())?;
    assert_eq!(rho.n_qubits(), c.n_qubits(), "input size mismatch");
    let mut state = rho.clone();
    noise_layer(&mut state, 0, model, config);
    for (ell, layer) in c.layers().iter().enumerate() {
        for gate in layer {
            state.apply_gate(gate);
        }
        noise_layer(&mut state, ell + 1, model, config);
    }
    Ok(measure_in_basis(state, basis))
}

/// Exact output distribution of a noisy diagonal circuit: `|+>^n` in, all
/// gates dense, Hadamard-basis readout.
pub fn exact_iqp_distribution(
    c: &IqpCircuit,
    model: &NoiseModel,
    config: Option<&ErrorConfiguration>,
) -> Result<Vec<f64>, Error> {
    let n = c.n_qubits();
    cap_check(n)?;
    let plus = Complex64::new(SQ2INV, 0.0);
    let mut state = DensityMatrix::from_uniform_pure(n, plus, plus)?;
    noise_layer(&mut state, 0, model, config);
    for (ell, layer) in c.layers().iter().enumerate() {
        for gate in layer {
            state.apply_iqp_gate(gate);
        }
        noise_layer(&mut state, ell + 1, model, config);
    }
    Ok(measure_in_basis(state, &MeasurementBasis::all_x(n)))
}

/// Exact output distribution of a conjugated-circuit run: every qubit is
/// prepared in `u†|0>`, the inner circuit evolves with noise, `u` is applied
/// back, and the computational basis is read out. Deliberately built from
/// `u`'s matrix alone so it cross-checks the canonicalized sampler path.
pub fn exact_ccc_distribution(
    u: &BlochRotation,
    c: &CliffordCircuit,
    model: &NoiseModel,
    config: Option<&ErrorConfiguration>,
) -> Result<Vec<f64>, Error> {
    let n = c.n_qubits();
    cap_check(n)?;
    let m = u.unitary();
    // First column of u† is the conjugated first row of u.
    let mut state = DensityMatrix::from_uniform_pure(n, m[0].conj(), m[1].conj())?;
    noise_layer(&mut state, 0, model, config);
    for (ell, layer) in c.layers().iter().enumerate() {
        for gate in layer {
            state.apply_gate(gate);
        }
        noise_layer(&mut state, ell + 1, model, config);
    }
    for q in 0..n {
        state.apply_one_qubit(q, &m);
    }
    Ok(state.diagonal())
}

// ---------------------------------------------------------------------------
// Distances.
// ---------------------------------------------------------------------------

/// Total variation distance as the full 1-norm `Σ |p_i - q_i|`.
pub fn tvd(p: &[f64], q: &[f64]) -> Result<f64, Error> {
    if p.len() != q.len() {
        return Err(Error::invalid(format!(
            "distribution lengths differ: {} vs {}",
            p.len(),
            q.len()
        )));
    }
    Ok(p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum())
}

/// Half the 1-norm — the "probability mass moved" normalization.
pub fn half_tvd(p: &[f64], q: &[f64]) -> Result<f64, Error> {
    Ok(tvd(p, q)? / 2.0)
}

// ---------------------------------------------------------------------------
// Low-weight observable census.
// ---------------------------------------------------------------------------

/// Result of sweeping all Pauli strings on a region: the strings whose
/// entire conjugation trajectory stays in the region and whose minimal
/// weight along it equals the requested value.
#[derive(Debug, Clone)]
pub struct SwCensus {
    /// Number of matching strings.
    pub count: u64,
    /// The matching strings, as they read at the measurement end.
    pub elements: Vec<PauliString>,
}

fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let mut acc = 1u64;
    for i in 0..k.min(n - k) {
        acc = acc * (n - i) as u64 / (i + 1) as u64;
    }
    acc
}

/// Sweeps the `4^|A|` Pauli strings supported on `region` (read at the
/// measurement end), follows each backward through every layer, and counts
/// those whose images all stay inside `region` with minimal weight exactly
/// `w`. The count is checked against the layer-counting bound
/// `(d+1)·C(|A|,w)·3^w`.
pub fn enumerate_s_w(c: &CliffordCircuit, region: &[usize], w: usize) -> Result<SwCensus, Error> {
    let n = c.n_qubits();
    let mut seen = vec![false; n];
    for &q in region {
        if q >= n {
            return Err(Error::invalid(format!("region qubit {q} out of range (n={n})")));
        }
        if seen[q] {
            return Err(Error::invalid(format!("region lists qubit {q} twice")));
        }
        seen[q] = true;
    }
    if region.len() > 8 {
        return Err(Error::CapExceeded { what: "census region size", limit: 8, got: region.len() });
    }
    let a = region.len();
    let mut elements = Vec::new();
    'sweep: for code in 0u64..1 << (2 * a) {
        let mut s = PauliString::identity(n);
        for (pos, &q) in region.iter().enumerate() {
            let x = code >> (2 * pos) & 1 == 1;
            let z = code >> (2 * pos + 1) & 1 == 1;
            s.set_op(q, PauliOp::from_xz(x, z));
        }
        let mut image = s.clone();
        let mut min_weight = image.weight();
        for t in (1..=c.depth()).rev() {
            for gate in &c.layers()[t - 1] {
                gate.conjugate_inverse(&mut image);
            }
            for q in image.support().iter_ones() {
                if !seen[q] {
                    continue 'sweep;
                }
            }
            min_weight = min_weight.min(image.weight());
        }
        if min_weight == w {
            elements.push(s);
        }
    }
    let count = elements.len() as u64;
    let bound = (c.depth() as u64 + 1) * binomial(a, w) * 3u64.pow(w as u32);
    assert!(count <= bound, "census count {count} exceeds the layer bound {bound}");
    Ok(SwCensus { count, elements })
}

// ---------------------------------------------------------------------------
// Collision probability and its bound.
// ---------------------------------------------------------------------------

/// `E_y Σ_x p_y(x)^2` over all computational inputs `y`, computed densely
/// with the full CPTP channel.
pub fn collision_probability(
    c: &CliffordCircuit,
    model: &NoiseModel,
    basis: &MeasurementBasis,
) -> Result<f64, Error> {
    let n = c.n_qubits();
    if n > 6 {
        return Err(Error::CapExceeded { what: "collision probability width", limit: 6, got: n });
    }
    let mut acc = 0.0f64;
    for y in 0..1usize << n {
        let rho = DensityMatrix::computational(n, y)?;
        let p = exact_noisy_distribution(c, &rho, basis, model, None)?;
        acc += p.iter().map(|x| x * x).sum::<f64>();
    }
    Ok(acc / (1u64 << n) as f64)
}

/// Closed-form collision-probability bound
/// `2^{-n} (1 + (1-γ)^L · L · e^{3 (1-γ)^L n})` with `L` the number of
/// noise layers the caller's convention assigns to the circuit.
#[must_use]
pub fn anticoncentration_bound(n: usize, layers: usize, gamma: f64) -> f64 {
    let decay = (1.0 - gamma).powi(layers as i32);
    (1.0 + decay * layers as f64 * (3.0 * decay * n as f64).exp()) / (1u64 << n) as f64
}

// ---------------------------------------------------------------------------
// Eigenvalues (validation only).
// ---------------------------------------------------------------------------

/// Smallest eigenvalue of a Hermitian matrix by cyclic Jacobi rotations.
/// Small dimensions only; used to certify positivity.
fn min_eigenvalue_hermitian(dim: usize, a: &[C]) -> f64 {
    let mut m = a.to_vec();
    for _ in 0..60 {
        let off: f64 = (0..dim)
            .flat_map(|p| ((p + 1)..dim).map(move |q| (p, q)))
            .map(|(p, q)| m[p * dim + q].norm_sqr())
            .sum();
        if off < 1e-26 {
            break;
        }
        for p in 0..dim {
            for q in (p + 1)..dim {
                let b = m[p * dim + q];
                if b.norm_sqr() < 1e-32 {
                    continue;
                }
                let app = m[p * dim + p].re;
                let aqq = m[q * dim + q].re;
                // Top eigenpair of the 2x2 block [[app, b], [b*, aqq]].
                let mid = (app + aqq) / 2.0;
                let rad = ((app - aqq) / 2.0).hypot(b.norm());
                let lam = mid + rad;
                let v = (b, Complex64::new(lam - app, 0.0));
                let norm = (v.0.norm_sqr() + v.1.norm_sqr()).sqrt();
                let (alpha, beta) = (v.0 / norm, v.1 / norm);
                // Columns p, q pick up the rotation [[α, -β̄], [β, ᾱ]] …
                for k in 0..dim {
                    let (cp, cq) = (m[k * dim + p], m[k * dim + q]);
                    m[k * dim + p] = cp * alpha + cq * beta;
                    m[k * dim + q] = -cp * beta.conj() + cq * alpha.conj();
                }
                // … and rows its adjoint.
                for k in 0..dim {
                    let (rp, rq) = (m[p * dim + k], m[q * dim + k]);
                    m[p * dim + k] = alpha.conj() * rp + beta.conj() * rq;
                    m[q * dim + k] = -beta * rp + alpha * rq;
                }
            }
        }
    }
    (0..dim).map(|i| m[i * dim + i].re).fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::sample_error_configuration;
    use crate::rng::shot_rng;
    use proptest::prelude::*;

    fn identity_circuit(n: usize, depth: usize) -> CliffordCircuit {
        CliffordCircuit::new(n, vec![Vec::new(); depth], None).unwrap()
    }

    #[test]
    fn noiseless_identity_keeps_the_point_mass() {
        let c = identity_circuit(2, 1);
        let rho = DensityMatrix::from_product(&ProductState::all_zero(2)).unwrap();
        let model = NoiseModel::depolarizing(0.0).unwrap();
        let p = exact_noisy_distribution(&c, &rho, &MeasurementBasis::all_z(2), &model, None)
            .unwrap();
        assert!((p[0] - 1.0).abs() < 1e-12);
        assert!(p[1..].iter().all(|&x| x.abs() < 1e-12));
    }

    #[test]
    fn full_depolarizing_is_a_fair_coin() {
        let c = identity_circuit(1, 1);
        let rho = DensityMatrix::from_product(&ProductState::all_magic(1)).unwrap();
        let model = NoiseModel::depolarizing(1.0).unwrap();
        let p = exact_noisy_distribution(&c, &rho, &MeasurementBasis::all_z(1), &model, None)
            .unwrap();
        assert!((p[0] - 0.5).abs() < 1e-12 && (p[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn readout_probability_is_the_bloch_overlap() {
        // p(0) = (1 + axis · bloch) / 2 on one qubit, for assorted pairs.
        let pairs = [
            ([0.0, 0.0, 1.0], [0.0, 0.0, 1.0]),
            ([1.0, 0.0, 0.0], [0.0, 0.0, 1.0]),
            ([SQ2INV, SQ2INV, 0.0], [0.6, 0.0, 0.8]),
            ([0.0, 1.0, 0.0], [0.0, -1.0, 0.0]),
            ([-0.6, 0.48, 0.64], [0.36, -0.8, 0.48]),
        ];
        for (axis, bloch) in pairs {
            let rho =
                DensityMatrix::from_product(&ProductState::from_bloch(vec![bloch]).unwrap())
                    .unwrap();
            let basis = MeasurementBasis::from_axes(vec![axis]).unwrap();
            let p = measure_in_basis(rho, &basis);
            let dot: f64 = axis.iter().zip(bloch).map(|(a, b)| a * b).sum();
            assert!((p[0] - (1.0 + dot) / 2.0).abs() < 1e-12, "axis {axis:?} bloch {bloch:?}");
        }
    }

    #[test]
    fn site_events_scale_bloch_vectors_as_advertised() {
        for event in [
            SiteEvent::Depolarize,
            SiteEvent::ProjectZ,
            SiteEvent::XProjectZ,
            SiteEvent::FlipX,
            SiteEvent::DetY,
            SiteEvent::DetZ,
        ] {
            let bloch = [0.48, -0.6, 0.64];
            let mut rho =
                DensityMatrix::from_product(&ProductState::from_bloch(vec![bloch]).unwrap())
                    .unwrap();
            rho.apply_site_event(0, event);
            let [_, cx, cy, cz] = event.ptm_diagonal();
            let expect = [cx * bloch[0], cy * bloch[1], cz * bloch[2]];
            // Read the Bloch vector back off the 2x2 matrix.
            let d = rho.data();
            let got = [2.0 * d[1].re, -2.0 * d[1].im, (d[0] - d[3]).re];
            for (g, e) in got.iter().zip(expect) {
                assert!((g - e).abs() < 1e-12, "{event:?}: got {got:?} want {expect:?}");
            }
            rho.assert_valid();
        }
    }

    #[test]
    fn gates_preserve_validity_and_match_clifford_action() {
        // S X S† = Y up to phase: conjugating |+><+| by S gives the +Y state.
        let mut rho = DensityMatrix::from_product(&ProductState::all_plus(1)).unwrap();
        rho.apply_gate(&CliffordGate::S(0));
        rho.assert_valid();
        let d = rho.data();
        let got = [2.0 * d[1].re, -2.0 * d[1].im, (d[0] - d[3]).re];
        assert!((got[1] - 1.0).abs() < 1e-12, "got {got:?}");
        // H |0> = |+>.
        let mut rho = DensityMatrix::from_product(&ProductState::all_zero(1)).unwrap();
        rho.apply_gate(&CliffordGate::H(0));
        let d = rho.data();
        assert!((2.0 * d[1].re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_qubit_gates_permute_and_phase_correctly() {
        // CNOT |10> = |11>  (qubit 0 is the control and bit 0).
        let mut rho = DensityMatrix::computational(2, 0b01).unwrap();
        rho.apply_gate(&CliffordGate::Cnot(0, 1));
        assert!((rho.diagonal()[0b11] - 1.0).abs() < 1e-12);
        // SWAP |01> = |10>.
        let mut rho = DensityMatrix::computational(2, 0b10).unwrap();
        rho.apply_gate(&CliffordGate::Swap(0, 1));
        assert!((rho.diagonal()[0b01] - 1.0).abs() < 1e-12);
        // CZ phases |11> only; diagonal unchanged, coherence sign flips.
        let mut rho = DensityMatrix::from_product(&ProductState::all_plus(2)).unwrap();
        rho.apply_gate(&CliffordGate::Cz(0, 1));
        rho.assert_valid();
        assert!((rho.data()[3].re + 0.25).abs() < 1e-12);
    }

    #[test]
    fn config_average_converges_to_the_cptp_channel() {
        let mut rng = shot_rng(41, 0);
        let c = crate::synth::random_clifford_circuit(&mut rng, 3, 2).unwrap();
        let rho = DensityMatrix::from_product(&ProductState::all_magic(3)).unwrap();
        let basis = MeasurementBasis::all_z(3);
        let model = NoiseModel::depolarizing(0.3).unwrap();
        let exact = exact_noisy_distribution(&c, &rho, &basis, &model, None).unwrap();
        let trials = 10_000u64;
        let mut avg = vec![0.0f64; 8];
        let mut sq = vec![0.0f64; 8];
        for t in 0..trials {
            let mut crng = shot_rng(4100, t);
            let b = sample_error_configuration(&mut crng, 3, 2, &model);
            let p = exact_noisy_distribution(&c, &rho, &basis, &model, Some(&b)).unwrap();
            for (z, v) in p.into_iter().enumerate() {
                avg[z] += v;
                sq[z] += v * v;
            }
        }
        for z in 0..8 {
            avg[z] /= trials as f64;
            let var = (sq[z] / trials as f64 - avg[z] * avg[z]).max(0.0);
            let sigma = (var / trials as f64).sqrt().max(1e-9);
            assert!(
                (avg[z] - exact[z]).abs() <= 3.0 * sigma + 1e-12,
                "outcome {z}: {} vs {} (sigma {sigma})",
                avg[z],
                exact[z]
            );
        }
    }

    #[test]
    fn iqp_oracle_agrees_with_clifford_oracle_on_shared_gates() {
        // CZ- and CNOT-only diagonal circuits are Clifford circuits; both
        // dense paths must produce the same distribution, with and without
        // noise.
        let iqp = IqpCircuit::new(
            3,
            vec![
                vec![IqpGate::CPhase { theta: std::f64::consts::PI, a: 0, b: 1 }],
                vec![IqpGate::Cnot(1, 2)],
            ],
            None,
            None,
        )
        .unwrap();
        let cliff = CliffordCircuit::new(
            3,
            vec![vec![CliffordGate::Cz(0, 1)], vec![CliffordGate::Cnot(1, 2)]],
            None,
        )
        .unwrap();
        let rho = DensityMatrix::from_product(&ProductState::all_plus(3)).unwrap();
        let basis = MeasurementBasis::all_x(3);
        for gamma in [0.0, 0.35] {
            let model = NoiseModel::depolarizing(gamma).unwrap();
            let p = exact_iqp_distribution(&iqp, &model, None).unwrap();
            let q = exact_noisy_distribution(&cliff, &rho, &basis, &model, None).unwrap();
            assert!(tvd(&p, &q).unwrap() < 1e-12, "gamma {gamma}");
        }
    }

    #[test]
    fn ccc_direct_path_matches_the_canonicalized_path() {
        let mut rng = shot_rng(43, 0);
        for trial in 0..10 {
            let n = 2 + trial % 3;
            let c = crate::synth::random_clifford_circuit(&mut rng, n, 3).unwrap();
            let u = BlochRotation::new(
                [
                    crate::rng::uniform_f64(&mut rng) - 0.5,
                    crate::rng::uniform_f64(&mut rng) - 0.5,
                    crate::rng::uniform_f64(&mut rng) - 0.5,
                ],
                std::f64::consts::TAU * crate::rng::uniform_f64(&mut rng),
            )
            .unwrap();
            let model = NoiseModel::depolarizing(if trial % 2 == 0 { 0.0 } else { 0.25 }).unwrap();
            let direct = exact_ccc_distribution(&u, &c, &model, None).unwrap();
            let (inner, input, basis) = crate::circuit::canonicalize_conjugated_clifford(&u, &c);
            let rho = DensityMatrix::from_product(&input).unwrap();
            let canon = exact_noisy_distribution(&inner, &rho, &basis, &model, None).unwrap();
            assert!(
                tvd(&direct, &canon).unwrap() < 1e-10,
                "trial {trial}: direct and canonicalized paths disagree"
            );
        }
    }

    #[test]
    fn tvd_reference_values() {
        assert_eq!(tvd(&[0.5, 0.5], &[0.5, 0.5]).unwrap(), 0.0);
        assert_eq!(tvd(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 2.0);
        assert_eq!(tvd(&[0.5, 0.5], &[1.0, 0.0]).unwrap(), 1.0);
        assert_eq!(half_tvd(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 1.0);
        assert!(tvd(&[1.0], &[0.5, 0.5]).is_err());
    }

    #[test]
    fn census_on_identity_circuits_counts_all_low_weight_strings() {
        let c = identity_circuit(5, 3);
        let region = [0, 2, 3, 4];
        for w in 0..=region.len() {
            let got = enumerate_s_w(&c, &region, w).unwrap();
            let expect = binomial(region.len(), w) * 3u64.pow(w as u32);
            assert_eq!(got.count, expect, "w = {w}");
        }
        assert_eq!(enumerate_s_w(&c, &region, 0).unwrap().count, 1);
    }

    #[test]
    fn census_rejects_bad_regions() {
        let c = identity_circuit(4, 1);
        assert!(enumerate_s_w(&c, &[0, 0], 1).is_err());
        assert!(enumerate_s_w(&c, &[9], 1).is_err());
        let wide = identity_circuit(9, 1);
        assert!(matches!(
            enumerate_s_w(&wide, &[0, 1, 2, 3, 4, 5, 6, 7, 8], 1),
            Err(Error::CapExceeded { .. })
        ));
    }

    #[test]
    fn census_trajectories_stay_in_region_and_hit_their_minimum() {
        let mut rng = shot_rng(47, 0);
        for trial in 0..8 {
            let c = crate::synth::random_clifford_circuit(&mut rng, 4, 3).unwrap();
            let region = [0, 1, 3];
            let seen = [true, true, false, true];
            let mut total = 0;
            for w in 0..=region.len() {
                let census = enumerate_s_w(&c, &region, w).unwrap();
                total += census.count;
                for s in &census.elements {
                    // Independent re-walk: pull the string all the way back,
                    // then push it forward to each intermediate time.
                    let s0 = c.conjugate_backward(s, c.depth());
                    let mut min_weight = usize::MAX;
                    for t in 0..=c.depth() {
                        let img = c.conjugate_forward(&s0, t);
                        min_weight = min_weight.min(img.weight());
                        assert!(img.support().iter_ones().all(|q| seen[q]));
                    }
                    assert_eq!(min_weight, w, "trial {trial}");
                }
            }
            // Every string whose trajectory stays in the region lands in
            // exactly one weight class.
            assert!(total <= 1 << (2 * region.len()), "trial {trial}");
        }
    }

    #[test]
    fn collision_probability_extremes() {
        let c = identity_circuit(3, 2);
        let z = MeasurementBasis::all_z(3);
        let dep = NoiseModel::depolarizing(1.0).unwrap();
        let got = collision_probability(&c, &dep, &z).unwrap();
        assert!((got - 0.125).abs() < 1e-12);
        let clean = NoiseModel::depolarizing(0.0).unwrap();
        let got = collision_probability(&c, &clean, &z).unwrap();
        assert!((got - 1.0).abs() < 1e-12);
    }

    #[test]
    fn collision_probability_respects_the_closed_form_bound() {
        let mut rng = shot_rng(53, 0);
        let n = 3;
        let d = 10;
        let c = crate::synth::random_clifford_circuit(&mut rng, n, d).unwrap();
        let model = NoiseModel::depolarizing(0.2).unwrap();
        let got = collision_probability(&c, &model, &MeasurementBasis::all_z(n)).unwrap();
        let bound = anticoncentration_bound(n, d + 1, 0.2);
        assert!(got <= bound, "{got} > {bound}");
        assert!(got >= (1.0 / 8.0) - 1e-12);
    }

    #[test]
    fn anticoncentration_bound_reference_values() {
        assert!((anticoncentration_bound(4, 7, 1.0) - 1.0 / 16.0).abs() < 1e-15);
        let expect = 0.5 * (1.0 + 3.0f64.exp());
        assert!((anticoncentration_bound(1, 1, 0.0) - expect).abs() < 1e-12);
        // Nonincreasing in the layer count.
        let mut prev = f64::INFINITY;
        for layers in 1..12 {
            let v = anticoncentration_bound(5, layers, 0.3);
            assert!(v <= prev + 1e-15);
            prev = v;
        }
    }

    #[test]
    fn validity_flags_broken_matrices() {
        let mut rho = DensityMatrix::computational(1, 0).unwrap();
        rho.assert_valid();
        rho.data[1] = Complex64::new(0.9, 0.0); // breaks positivity, keeps hermiticity below
        rho.data[2] = Complex64::new(0.9, 0.0);
        assert!(matches!(rho.validate(), Err(Error::Tolerance { .. })));
    }

    #[test]
    fn jacobi_eigensolver_matches_known_spectra() {
        // diag(3, -1) in a rotated basis via H.
        let mut rho = DensityMatrix::computational(1, 0).unwrap();
        rho.data = vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(2.0, 0.0),
            Complex64::new(2.0, 0.0),
            Complex64::new(1.0, 0.0),
        ];
        let min = min_eigenvalue_hermitian(2, &rho.data);
        assert!((min + 1.0).abs() < 1e-10);
        // A complex Hermitian pair: [[2, i], [-i, 2]] has eigenvalues 1, 3.
        let m = vec![
            Complex64::new(2.0, 0.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(0.0, -1.0),
            Complex64::new(2.0, 0.0),
        ];
        assert!((min_eigenvalue_hermitian(2, &m) - 1.0).abs() < 1e-10);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]

        // Dense distributions are distributions, for random circuits, inputs,
        // noise levels, and fixed configurations alike.
        #[test]
        fn oracle_outputs_are_distributions(seed in 0u64..400) {
            let mut rng = shot_rng(seed, 7);
            let n = 2 + (seed % 3) as usize;
            let c = crate::synth::random_clifford_circuit(&mut rng, n, 2).unwrap();
            let rho = DensityMatrix::from_product(&ProductState::all_magic(n)).unwrap();
            let basis = MeasurementBasis::all_z(n);
            let model = NoiseModel::pauli(0.1, 0.05, 0.2).unwrap();
            let b = sample_error_configuration(&mut rng, n, 2, &model);
            for p in [
                exact_noisy_distribution(&c, &rho, &basis, &model, None).unwrap(),
                exact_noisy_distribution(&c, &rho, &basis, &model, Some(&b)).unwrap(),
            ] {
                let total: f64 = p.iter().sum();
                prop_assert!((total - 1.0).abs() < 1e-9);
                prop_assert!(p.iter().all(|&x| x >= -1e-12));
            }
        }
    }

}
