//! Circuit model: gates, layers, geometry, parsing, and Heisenberg-picture
//! conjugation.
//!
//! A circuit is an ordered list of layers; gates within a layer act on
//! disjoint qubits, and when a lattice is declared every two-qubit gate must
//! join nearest neighbors. Circuits are immutable once constructed, so they
//! can be shared freely across worker threads.
//!
//! The text format is line-oriented with `#` comments. Header lines
//! (`qubits`, optional `lattice`, `noise`, `conjugate`) come first, then
//! optional `input` / `measure` blocks, then the gate body with layers
//! separated by `---` lines. A trailing `---` closes the last layer; interior
//! empty segments denote explicit identity layers.

use crate::gf2::BitVector;
use crate::noise::NoiseModel;
use crate::pauli::PauliString;
use crate::Error;
use num_complex::Complex64;

// ========== Gates ==========

/// Tag for the gate alphabet.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GateKind {
    H,
    S,
    Sdg,
    X,
    Y,
    Z,
    Cnot,
    Cz,
    Swap,
}

/// A gate with its qubit operands. Two-qubit gates carry distinct indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CliffordGate {
    H(usize),
    S(usize),
    Sdg(usize),
    X(usize),
    Y(usize),
    Z(usize),
    Cnot(usize, usize),
    Cz(usize, usize),
    Swap(usize, usize),
}

impl CliffordGate {
    #[must_use]
    pub fn kind(&self) -> GateKind {
        match self {
            CliffordGate::H(_) => GateKind::H,
            CliffordGate::S(_) => GateKind::S,
            CliffordGate::Sdg(_) => GateKind::Sdg,
            CliffordGate::X(_) => GateKind::X,
            CliffordGate::Y(_) => GateKind::Y,
            CliffordGate::Z(_) => GateKind::Z,
            CliffordGate::Cnot(_, _) => GateKind::Cnot,
            CliffordGate::Cz(_, _) => GateKind::Cz,
            CliffordGate::Swap(_, _) => GateKind::Swap,
        }
    }

    /// First operand, and the second for two-qubit gates.
    #[must_use]
    pub fn qubit_pair(&self) -> (usize, Option<usize>) {
        match *self {
            CliffordGate::H(q)
            | CliffordGate::S(q)
            | CliffordGate::Sdg(q)
            | CliffordGate::X(q)
            | CliffordGate::Y(q)
            | CliffordGate::Z(q) => (q, None),
            CliffordGate::Cnot(a, b) | CliffordGate::Cz(a, b) | CliffordGate::Swap(a, b) => {
                (a, Some(b))
            }
        }
    }

    pub fn qubits(&self) -> impl Iterator<Item = usize> {
        let (a, b) = self.qubit_pair();
        std::iter::once(a).chain(b)
    }

    /// The same gate with every operand renamed through `f`.
    #[must_use]
    pub fn map_qubits(&self, mut f: impl FnMut(usize) -> usize) -> CliffordGate {
        match *self {
            CliffordGate::H(q) => CliffordGate::H(f(q)),
            CliffordGate::S(q) => CliffordGate::S(f(q)),
            CliffordGate::Sdg(q) => CliffordGate::Sdg(f(q)),
            CliffordGate::X(q) => CliffordGate::X(f(q)),
            CliffordGate::Y(q) => CliffordGate::Y(f(q)),
            CliffordGate::Z(q) => CliffordGate::Z(f(q)),
            CliffordGate::Cnot(a, b) => CliffordGate::Cnot(f(a), f(b)),
            CliffordGate::Cz(a, b) => CliffordGate::Cz(f(a), f(b)),
            CliffordGate::Swap(a, b) => CliffordGate::Swap(f(a), f(b)),
        }
    }

    /// Heisenberg update `p ← U p U†`.
    pub(crate) fn conjugate(&self, p: &mut PauliString) {
        match *self {
            CliffordGate::H(q) => p.conj_h(q),
            CliffordGate::S(q) => p.conj_s(q),
            CliffordGate::Sdg(q) => p.conj_sdg(q),
            CliffordGate::X(q) => p.conj_x(q),
            CliffordGate::Y(q) => p.conj_y(q),
            CliffordGate::Z(q) => p.conj_z(q),
            CliffordGate::Cnot(a, b) => p.conj_cnot(a, b),
            CliffordGate::Cz(a, b) => p.conj_cz(a, b),
            CliffordGate::Swap(a, b) => p.conj_swap(a, b),
        }
    }

    /// Heisenberg update for the inverse gate, `p ← U† p U`.
    pub(crate) fn conjugate_inverse(&self, p: &mut PauliString) {
        match *self {
            CliffordGate::S(q) => p.conj_sdg(q),
            CliffordGate::Sdg(q) => p.conj_s(q),
            _ => self.conjugate(p),
        }
    }

    fn render(&self) -> String {
        match *self {
            CliffordGate::H(q) => format!("H {q}"),
            CliffordGate::S(q) => format!("S {q}"),
            CliffordGate::Sdg(q) => format!("SDG {q}"),
            CliffordGate::X(q) => format!("X {q}"),
            CliffordGate::Y(q) => format!("Y {q}"),
            CliffordGate::Z(q) => format!("Z {q}"),
            CliffordGate::Cnot(a, b) => format!("CNOT {a} {b}"),
            CliffordGate::Cz(a, b) => format!("CZ {a} {b}"),
            CliffordGate::Swap(a, b) => format!("SWAP {a} {b}"),
        }
    }
}

// ========== Geometry ==========

/// A D-dimensional rectangular lattice with row-major qubit numbering:
/// the last coordinate varies fastest.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Geometry {
    dims: Vec<usize>,
}

impl Geometry {
    pub fn new(dims: Vec<usize>) -> Result<Self, Error> {
        if dims.is_empty() {
            return Err(Error::invalid("lattice needs at least one extent"));
        }
        if dims.iter().any(|&e| e == 0) {
            return Err(Error::invalid("lattice extents must be positive"));
        }
        Ok(Geometry { dims })
    }

    #[must_use]
    pub fn dim(&self) -> usize {
        self.dims.len()
    }

    #[must_use]
    pub fn extents(&self) -> &[usize] {
        &self.dims
    }

    #[must_use]
    pub fn n_sites(&self) -> usize {
        self.dims.iter().product()
    }

    #[must_use]
    pub fn coords(&self, q: usize) -> Vec<usize> {
        assert!(q < self.n_sites(), "site index out of range");
        let mut rem = q;
        let mut c = vec![0; self.dims.len()];
        for (k, &e) in self.dims.iter().enumerate().rev() {
            c[k] = rem % e;
            rem /= e;
        }
        c
    }

    #[must_use]
    pub fn index(&self, coords: &[usize]) -> usize {
        assert_eq!(coords.len(), self.dims.len(), "coordinate arity mismatch");
        let mut idx = 0;
        for (&c, &e) in coords.iter().zip(&self.dims) {
            assert!(c < e, "coordinate out of range");
            idx = idx * e + c;
        }
        idx
    }

    #[must_use]
    pub fn manhattan_dist(&self, a: usize, b: usize) -> usize {
        self.coords(a)
            .iter()
            .zip(self.coords(b).iter())
            .map(|(&x, &y)| x.abs_diff(y))
            .sum()
    }

    #[must_use]
    pub fn are_neighbors(&self, a: usize, b: usize) -> bool {
        self.manhattan_dist(a, b) == 1
    }
}

// ========== Input states and measurement bases ==========

/// A product input state, one Bloch vector per qubit (|b| ≤ 1, so mixed
/// single-qubit states are allowed).
#[derive(Clone, Debug, PartialEq)]
pub struct ProductState {
    bloch: Vec<[f64; 3]>,
}

pub const BLOCH_ZERO: [f64; 3] = [0.0, 0.0, 1.0];
pub const BLOCH_PLUS: [f64; 3] = [1.0, 0.0, 0.0];
/// (|0⟩ + e^{iπ/4}|1⟩)/√2 on the Bloch sphere.
pub const BLOCH_MAGIC: [f64; 3] = [std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2, 0.0];

impl ProductState {
    #[must_use]
    pub fn all_zero(n: usize) -> Self {
        ProductState {
            bloch: vec![BLOCH_ZERO; n],
        }
    }

    #[must_use]
    pub fn all_plus(n: usize) -> Self {
        ProductState {
            bloch: vec![BLOCH_PLUS; n],
        }
    }

    #[must_use]
    pub fn all_magic(n: usize) -> Self {
        ProductState {
            bloch: vec![BLOCH_MAGIC; n],
        }
    }

    pub fn from_bloch(bloch: Vec<[f64; 3]>) -> Result<Self, Error> {
        for (i, b) in bloch.iter().enumerate() {
            let norm = (b[0] * b[0] + b[1] * b[1] + b[2] * b[2]).sqrt();
            if norm > 1.0 + 1e-12 {
                return Err(Error::invalid(format!(
                    "input Bloch vector for qubit {i} has length {norm} > 1"
                )));
            }
        }
        Ok(ProductState { bloch })
    }

    #[must_use]
    pub fn n_qubits(&self) -> usize {
        self.bloch.len()
    }

    #[must_use]
    pub fn bloch(&self, qubit: usize) -> [f64; 3] {
        self.bloch[qubit]
    }

    pub fn set_bloch(&mut self, qubit: usize, b: [f64; 3]) -> Result<(), Error> {
        let norm = (b[0] * b[0] + b[1] * b[1] + b[2] * b[2]).sqrt();
        if norm > 1.0 + 1e-12 {
            return Err(Error::invalid(format!(
                "input Bloch vector for qubit {qubit} has length {norm} > 1"
            )));
        }
        self.bloch[qubit] = b;
        Ok(())
    }
}

/// Per-qubit measurement axes: qubit i is read out along the unit Bloch
/// vector n̂_i (the axis of the outcome-0 projector).
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementBasis {
    axes: Vec<[f64; 3]>,
}

impl MeasurementBasis {
    #[must_use]
    pub fn all_z(n: usize) -> Self {
        MeasurementBasis {
            axes: vec![[0.0, 0.0, 1.0]; n],
        }
    }

    #[must_use]
    pub fn all_x(n: usize) -> Self {
        MeasurementBasis {
            axes: vec![[1.0, 0.0, 0.0]; n],
        }
    }

    pub fn from_axes(axes: Vec<[f64; 3]>) -> Result<Self, Error> {
        for (i, a) in axes.iter().enumerate() {
            check_unit_axis(a).map_err(|_| {
                Error::invalid(format!("measurement axis for qubit {i} is not a unit vector"))
            })?;
        }
        Ok(MeasurementBasis { axes })
    }

    #[must_use]
    pub fn n_qubits(&self) -> usize {
        self.axes.len()
    }

    #[must_use]
    pub fn axis(&self, qubit: usize) -> [f64; 3] {
        self.axes[qubit]
    }

    pub fn set_axis(&mut self, qubit: usize, a: [f64; 3]) -> Result<(), Error> {
        check_unit_axis(&a)
            .map_err(|_| Error::invalid(format!("measurement axis for qubit {qubit} is not a unit vector")))?;
        self.axes[qubit] = a;
        Ok(())
    }
}

fn check_unit_axis(a: &[f64; 3]) -> Result<(), ()> {
    let norm = (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
    if (norm - 1.0).abs() <= 1e-12 {
        Ok(())
    } else {
        Err(())
    }
}

/// A single-qubit rotation `exp(-i θ/2 n̂·σ)` given by axis and angle; used
/// to describe the conjugating unitary of a conjugated-Clifford run.
#[derive(Clone, Debug, PartialEq)]
pub struct BlochRotation {
    pub axis: [f64; 3],
    pub angle: f64,
}

impl BlochRotation {
    pub fn new(axis: [f64; 3], angle: f64) -> Result<Self, Error> {
        let norm = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
        if norm < 1e-12 {
            if angle != 0.0 {
                return Err(Error::invalid(
                    "rotation axis is numerically zero but the angle is not",
                ));
            }
            return Ok(BlochRotation {
                axis: [0.0, 0.0, 1.0],
                angle: 0.0,
            });
        }
        Ok(BlochRotation {
            axis: [axis[0] / norm, axis[1] / norm, axis[2] / norm],
            angle,
        })
    }

    #[must_use]
    pub fn identity() -> Self {
        BlochRotation {
            axis: [0.0, 0.0, 1.0],
            angle: 0.0,
        }
    }

    /// Axis (1,0,1)/√2, angle π — the Hadamard up to global phase.
    #[must_use]
    pub fn hadamard() -> Self {
        BlochRotation::new([1.0, 0.0, 1.0], std::f64::consts::PI).expect("valid axis")
    }

    /// The 2×2 unitary, row-major: cos(θ/2)·I − i·sin(θ/2)·(n̂·σ).
    #[must_use]
    pub fn unitary(&self) -> [Complex64; 4] {
        let (c, s) = ((self.angle / 2.0).cos(), (self.angle / 2.0).sin());
        let [nx, ny, nz] = self.axis;
        [
            Complex64::new(c, -s * nz),
            Complex64::new(-s * ny, -s * nx),
            Complex64::new(s * ny, -s * nx),
            Complex64::new(c, s * nz),
        ]
    }
}

// ========== Circuit ==========

/// A layered Clifford circuit with optional lattice geometry, per-qubit
/// input state and measurement axes, and optional noise / conjugation
/// declarations carried over from the circuit file.
#[derive(Clone, Debug)]
pub struct CliffordCircuit {
    n: usize,
    layers: Vec<Vec<CliffordGate>>,
    geometry: Option<Geometry>,
    input: ProductState,
    measurement: MeasurementBasis,
    noise: Option<NoiseModel>,
    conjugation: Option<BlochRotation>,
}

impl CliffordCircuit {
    /// Validates qubit ranges, two-qubit distinctness, within-layer
    /// disjointness, lattice size, and neighbor constraints.
    pub fn new(
        n: usize,
        layers: Vec<Vec<CliffordGate>>,
        geometry: Option<Geometry>,
    ) -> Result<Self, Error> {
        if n == 0 {
            return Err(Error::invalid("circuit needs at least one qubit"));
        }
        if layers.is_empty() {
            return Err(Error::invalid("circuit needs at least one layer"));
        }
        if let Some(g) = &geometry {
            if g.n_sites() != n {
                return Err(Error::invalid(format!(
                    "lattice has {} sites but the circuit has {n} qubits",
                    g.n_sites()
                )));
            }
        }
        for (li, layer) in layers.iter().enumerate() {
            let mut used = BitVector::zeros(n);
            for gate in layer {
                let (a, b) = gate.qubit_pair();
                for q in gate.qubits() {
                    if q >= n {
                        return Err(Error::invalid(format!(
                            "layer {}: qubit {q} out of range (n={n})",
                            li + 1
                        )));
                    }
                    if used.get(q) {
                        return Err(Error::invalid(format!(
                            "layer {}: qubit {q} used by two gates",
                            li + 1
                        )));
                    }
                    used.set(q, true);
                }
                if let Some(b) = b {
                    if a == b {
                        return Err(Error::invalid(format!(
                            "layer {}: two-qubit gate with repeated qubit {a}",
                            li + 1
                        )));
                    }
                    if let Some(g) = &geometry {
                        if !g.are_neighbors(a, b) {
                            return Err(Error::invalid(format!(
                                "layer {}: gate joins non-neighbors {a} and {b}",
                                li + 1
                            )));
                        }
                    }
                }
            }
        }
        Ok(CliffordCircuit {
            n,
            layers,
            geometry,
            input: ProductState::all_zero(n),
            measurement: MeasurementBasis::all_z(n),
            noise: None,
            conjugation: None,
        })
    }

    pub fn with_input(mut self, input: ProductState) -> Result<Self, Error> {
        if input.n_qubits() != self.n {
            return Err(Error::invalid("input state qubit count mismatch"));
        }
        self.input = input;
        Ok(self)
    }

    pub fn with_measurement(mut self, m: MeasurementBasis) -> Result<Self, Error> {
        if m.n_qubits() != self.n {
            return Err(Error::invalid("measurement basis qubit count mismatch"));
        }
        self.measurement = m;
        Ok(self)
    }

    #[must_use]
    pub fn with_noise(mut self, noise: Option<NoiseModel>) -> Self {
        self.noise = noise;
        self
    }

    #[must_use]
    pub fn with_conjugation(mut self, c: Option<BlochRotation>) -> Self {
        self.conjugation = c;
        self
    }

    #[must_use]
    pub fn n_qubits(&self) -> usize {
        self.n
    }

    /// Number of layers.
    #[must_use]
    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    #[must_use]
    pub fn layers(&self) -> &[Vec<CliffordGate>] {
        &self.layers
    }

    #[must_use]
    pub fn geometry(&self) -> Option<&Geometry> {
        self.geometry.as_ref()
    }

    #[must_use]
    pub fn input(&self) -> &ProductState {
        &self.input
    }

    #[must_use]
    pub fn measurement(&self) -> &MeasurementBasis {
        &self.measurement
    }

    #[must_use]
    pub fn noise(&self) -> Option<&NoiseModel> {
        self.noise.as_ref()
    }

    #[must_use]
    pub fn conjugation(&self) -> Option<&BlochRotation> {
        self.conjugation.as_ref()
    }

    /// `C_upto(p) = U_upto … U_1 p U_1† … U_upto†`; `upto = 0` is the
    /// identity map.
    #[must_use]
    pub fn conjugate_forward(&self, p: &PauliString, upto: usize) -> PauliString {
        assert!(upto <= self.depth(), "layer index out of range");
        assert_eq!(p.n_qubits(), self.n, "qubit count mismatch");
        let mut q = p.clone();
        for layer in &self.layers[..upto] {
            for gate in layer {
                gate.conjugate(&mut q);
            }
        }
        q
    }

    /// `C_from†(p)` — pushes `p` backward through the first `from` layers.
    /// Inverse of [`conjugate_forward`](Self::conjugate_forward) at the same
    /// index.
    #[must_use]
    pub fn conjugate_backward(&self, p: &PauliString, from: usize) -> PauliString {
        assert!(from <= self.depth(), "layer index out of range");
        assert_eq!(p.n_qubits(), self.n, "qubit count mismatch");
        let mut q = p.clone();
        for layer in self.layers[..from].iter().rev() {
            for gate in layer {
                gate.conjugate_inverse(&mut q);
            }
        }
        q
    }

    /// Qubits reachable from `q` sweeping forward through all layers.
    /// Within a layer gates act on disjoint qubits, so one pass per layer
    /// suffices.
    #[must_use]
    pub fn forward_lightcone(&self, q: usize) -> BitVector {
        assert!(q < self.n, "qubit index out of range");
        let mut cone = BitVector::zeros(self.n);
        cone.set(q, true);
        for layer in &self.layers {
            for gate in layer {
                let (a, b) = gate.qubit_pair();
                if let Some(b) = b {
                    if cone.get(a) || cone.get(b) {
                        cone.set(a, true);
                        cone.set(b, true);
                    }
                }
            }
        }
        cone
    }

    /// Weights |C_i(s)| for i = 0..=depth.
    #[must_use]
    pub fn weight_profile(&self, s: &PauliString) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.depth() + 1);
        let mut p = s.clone();
        out.push(p.weight());
        for layer in &self.layers {
            for gate in layer {
                gate.conjugate(&mut p);
            }
            out.push(p.weight());
        }
        out
    }

    /// Canonical text form; `parse_circuit(render(c))` reproduces `c`.
    #[must_use]
    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("qubits {}\n", self.n));
        if let Some(g) = &self.geometry {
            out.push_str(&format!("lattice {}", g.dim()));
            for e in g.extents() {
                out.push_str(&format!(" {e}"));
            }
            out.push('\n');
        }
        if let Some(m) = &self.noise {
            out.push_str(&format!("{}\n", m.render()));
        }
        if let Some(c) = &self.conjugation {
            out.push_str(&format!(
                "conjugate bloch {} {} {} {}\n",
                render_f64(c.axis[0]),
                render_f64(c.axis[1]),
                render_f64(c.axis[2]),
                render_f64(c.angle)
            ));
        }
        let nondefault_inputs: Vec<usize> = (0..self.n)
            .filter(|&q| self.input.bloch(q) != BLOCH_ZERO)
            .collect();
        if !nondefault_inputs.is_empty() {
            out.push_str("input\n");
            for q in nondefault_inputs {
                let b = self.input.bloch(q);
                out.push_str(&format!(
                    "state {q} bloch {} {} {}\n",
                    render_f64(b[0]),
                    render_f64(b[1]),
                    render_f64(b[2])
                ));
            }
        }
        let nondefault_axes: Vec<usize> = (0..self.n)
            .filter(|&q| self.measurement.axis(q) != [0.0, 0.0, 1.0])
            .collect();
        if !nondefault_axes.is_empty() {
            out.push_str("measure\n");
            for q in nondefault_axes {
                let a = self.measurement.axis(q);
                out.push_str(&format!(
                    "basis {q} bloch {} {} {}\n",
                    render_f64(a[0]),
                    render_f64(a[1]),
                    render_f64(a[2])
                ));
            }
        }
        for layer in &self.layers {
            for gate in layer {
                out.push_str(&gate.render());
                out.push('\n');
            }
            out.push_str("---\n");
        }
        out
    }
}

/// Rewrites a conjugated-Clifford run `U^{⊗n} ∘ C̃ ∘ U^{†⊗n}` over |0⟩^n
/// with computational readout as the inner noisy circuit over the product
/// state `U†|0⟩⟨0|U` measured along the same Bloch axis; single-qubit
/// depolarizing (and any Pauli channel conjugated accordingly — here the
/// noise layers are left untouched, which is exact for depolarizing noise)
/// commutes with the basis change.
pub fn canonicalize_conjugated_clifford(
    u: &BlochRotation,
    c: &CliffordCircuit,
) -> (CliffordCircuit, ProductState, MeasurementBasis) {
    let n = c.n_qubits();
    let m = u.unitary();
    // U†|0⟩ is the first column of U†, i.e. the conjugated first row of U.
    let a = m[0].conj();
    let b = m[1].conj();
    let ab = a.conj() * b;
    let bloch = [2.0 * ab.re, 2.0 * ab.im, a.norm_sqr() - b.norm_sqr()];
    let input = ProductState::from_bloch(vec![bloch; n]).expect("unit Bloch vector");
    let basis = MeasurementBasis::from_axes(vec![bloch; n]).expect("unit Bloch vector");
    let mut inner = c.clone();
    inner.conjugation = None;
    (inner, input, basis)
}

pub(crate) fn render_f64(x: f64) -> String {
    format!("{x:.16e}")
}

// ========== Parsing ==========

/// Pre-tokenized circuit file: headers resolved, blocks collected, body
/// split into layers of raw gate lines. The gate alphabet is left to the
/// caller, so the Clifford and IQP parsers share all framing logic.
pub(crate) struct FileSkeleton {
    pub n: usize,
    pub geometry: Option<Geometry>,
    pub noise: Option<NoiseModel>,
    pub conjugation: Option<BlochRotation>,
    pub input_lines: Vec<(usize, Vec<String>)>,
    pub measure_lines: Vec<(usize, Vec<String>)>,
    pub layers: Vec<Vec<(usize, Vec<String>)>>,
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

pub(crate) fn parse_f64(tok: &str, line: usize) -> Result<f64, Error> {
    tok.parse::<f64>()
        .map_err(|_| parse_err(line, format!("expected a number, got {tok:?}")))
}

pub(crate) fn parse_usize(tok: &str, line: usize) -> Result<usize, Error> {
    tok.parse::<usize>()
        .map_err(|_| parse_err(line, format!("expected a non-negative integer, got {tok:?}")))
}

pub(crate) fn parse_skeleton(text: &str) -> Result<FileSkeleton, Error> {
    #[derive(PartialEq)]
    enum Section {
        Header,
        Input,
        Measure,
        Body,
    }
    let mut n: Option<usize> = None;
    let mut geometry = None;
    let mut noise = None;
    let mut conjugation = None;
    let mut input_lines = Vec::new();
    let mut measure_lines = Vec::new();
    let mut segments: Vec<Vec<(usize, Vec<String>)>> = vec![Vec::new()];
    let mut section = Section::Header;
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let stripped = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        };
        let trimmed = stripped.trim();
        if trimmed.is_empty() {
            continue;
        }
        let toks: Vec<String> = trimmed.split_whitespace().map(str::to_owned).collect();
        let head = toks[0].as_str();
        let in_header = |section: &Section| matches!(section, Section::Header);
        match head {
            "qubits" => {
                if !in_header(&section) {
                    return Err(parse_err(lineno, "qubits line must come first"));
                }
                if n.is_some() {
                    return Err(parse_err(lineno, "duplicate qubits line"));
                }
                if toks.len() != 2 {
                    return Err(parse_err(lineno, "usage: qubits N"));
                }
                let count = parse_usize(&toks[1], lineno)?;
                if count == 0 {
                    return Err(parse_err(lineno, "qubit count must be positive"));
                }
                n = Some(count);
            }
            "lattice" => {
                if !in_header(&section) {
                    return Err(parse_err(lineno, "lattice line must precede the body"));
                }
                if geometry.is_some() {
                    return Err(parse_err(lineno, "duplicate lattice line"));
                }
                if toks.len() < 3 {
                    return Err(parse_err(lineno, "usage: lattice D e1 [e2 …]"));
                }
                let d = parse_usize(&toks[1], lineno)?;
                let extents: Result<Vec<usize>, Error> =
                    toks[2..].iter().map(|t| parse_usize(t, lineno)).collect();
                let extents = extents?;
                if extents.len() != d {
                    return Err(parse_err(
                        lineno,
                        format!("lattice declares dimension {d} but lists {} extents", extents.len()),
                    ));
                }
                geometry = Some(Geometry::new(extents).map_err(|e| parse_err(lineno, e.to_string()))?);
            }
            "noise" => {
                if !in_header(&section) {
                    return Err(parse_err(lineno, "noise line must precede the body"));
                }
                if noise.is_some() {
                    return Err(parse_err(lineno, "duplicate noise line"));
                }
                noise = Some(NoiseModel::parse_line(&toks, lineno)?);
            }
            "conjugate" => {
                if !in_header(&section) {
                    return Err(parse_err(lineno, "conjugate line must precede the body"));
                }
                if conjugation.is_some() {
                    return Err(parse_err(lineno, "duplicate conjugate line"));
                }
                if toks.len() != 6 || toks[1] != "bloch" {
                    return Err(parse_err(lineno, "usage: conjugate bloch nx ny nz theta"));
                }
                let nx = parse_f64(&toks[2], lineno)?;
                let ny = parse_f64(&toks[3], lineno)?;
                let nz = parse_f64(&toks[4], lineno)?;
                let theta = parse_f64(&toks[5], lineno)?;
                conjugation = Some(
                    BlochRotation::new([nx, ny, nz], theta)
                        .map_err(|e| parse_err(lineno, e.to_string()))?,
                );
            }
            "input" => {
                if matches!(section, Section::Body) {
                    return Err(parse_err(lineno, "input block must precede the body"));
                }
                section = Section::Input;
            }
            "measure" => {
                if matches!(section, Section::Body) {
                    return Err(parse_err(lineno, "measure block must precede the body"));
                }
                section = Section::Measure;
            }
            "state" => {
                if !matches!(section, Section::Input) {
                    return Err(parse_err(lineno, "state line outside an input block"));
                }
                input_lines.push((lineno, toks));
            }
            "basis" => {
                if !matches!(section, Section::Measure) {
                    return Err(parse_err(lineno, "basis line outside a measure block"));
                }
                measure_lines.push((lineno, toks));
            }
            "---" => {
                section = Section::Body;
                segments.push(Vec::new());
            }
            _ => {
                section = Section::Body;
                segments
                    .last_mut()
                    .expect("at least one segment")
                    .push((lineno, toks));
            }
        }
    }
    let n = n.ok_or_else(|| parse_err(1, "missing qubits line"))?;
    // A trailing separator closes the final layer; interior empties are
    // explicit identity layers.
    if segments.len() > 1 && segments.last().map(Vec::is_empty) == Some(true) {
        segments.pop();
    }
    if segments.len() == 1 && segments[0].is_empty() {
        return Err(parse_err(1, "circuit body is empty (need at least one layer)"));
    }
    Ok(FileSkeleton {
        n,
        geometry,
        noise,
        conjugation,
        input_lines,
        measure_lines,
        layers: segments,
    })
}

fn parse_state_line(
    n: usize,
    toks: &[String],
    lineno: usize,
) -> Result<(usize, [f64; 3]), Error> {
    if toks.len() < 3 {
        return Err(parse_err(lineno, "usage: state q |0>||+>||A>|bloch bx by bz"));
    }
    let q = parse_usize(&toks[1], lineno)?;
    if q >= n {
        return Err(parse_err(lineno, format!("qubit {q} out of range (n={n})")));
    }
    let b = match toks[2].as_str() {
        "|0>" => BLOCH_ZERO,
        "|+>" => BLOCH_PLUS,
        "|A>" => BLOCH_MAGIC,
        "bloch" => {
            if toks.len() != 6 {
                return Err(parse_err(lineno, "usage: state q bloch bx by bz"));
            }
            [
                parse_f64(&toks[3], lineno)?,
                parse_f64(&toks[4], lineno)?,
                parse_f64(&toks[5], lineno)?,
            ]
        }
        other => {
            return Err(parse_err(lineno, format!("unknown input state {other:?}")));
        }
    };
    Ok((q, b))
}

fn parse_basis_line(
    n: usize,
    toks: &[String],
    lineno: usize,
) -> Result<(usize, [f64; 3]), Error> {
    if toks.len() < 3 {
        return Err(parse_err(lineno, "usage: basis q Z|X|Y|bloch nx ny nz"));
    }
    let q = parse_usize(&toks[1], lineno)?;
    if q >= n {
        return Err(parse_err(lineno, format!("qubit {q} out of range (n={n})")));
    }
    let a = match toks[2].as_str() {
        "Z" => [0.0, 0.0, 1.0],
        "X" => [1.0, 0.0, 0.0],
        "Y" => [0.0, 1.0, 0.0],
        "bloch" => {
            if toks.len() != 6 {
                return Err(parse_err(lineno, "usage: basis q bloch nx ny nz"));
            }
            [
                parse_f64(&toks[3], lineno)?,
                parse_f64(&toks[4], lineno)?,
                parse_f64(&toks[5], lineno)?,
            ]
        }
        other => {
            return Err(parse_err(lineno, format!("unknown measurement basis {other:?}")));
        }
    };
    Ok((q, a))
}

fn parse_clifford_gate(toks: &[String], lineno: usize) -> Result<CliffordGate, Error> {
    let one = |toks: &[String]| -> Result<usize, Error> {
        if toks.len() != 2 {
            return Err(parse_err(lineno, format!("{} takes one qubit", toks[0])));
        }
        parse_usize(&toks[1], lineno)
    };
    let two = |toks: &[String]| -> Result<(usize, usize), Error> {
        if toks.len() != 3 {
            return Err(parse_err(lineno, format!("{} takes two qubits", toks[0])));
        }
        Ok((parse_usize(&toks[1], lineno)?, parse_usize(&toks[2], lineno)?))
    };
    match toks[0].as_str() {
        "H" => Ok(CliffordGate::H(one(toks)?)),
        "S" => Ok(CliffordGate::S(one(toks)?)),
        "SDG" => Ok(CliffordGate::Sdg(one(toks)?)),
        "X" => Ok(CliffordGate::X(one(toks)?)),
        "Y" => Ok(CliffordGate::Y(one(toks)?)),
        "Z" => Ok(CliffordGate::Z(one(toks)?)),
        "CNOT" => {
            let (a, b) = two(toks)?;
            Ok(CliffordGate::Cnot(a, b))
        }
        "CZ" => {
            let (a, b) = two(toks)?;
            Ok(CliffordGate::Cz(a, b))
        }
        "SWAP" => {
            let (a, b) = two(toks)?;
            Ok(CliffordGate::Swap(a, b))
        }
        other => Err(parse_err(lineno, format!("unknown gate {other:?}"))),
    }
}

/// Parse the Clifford circuit text format.
pub fn parse_circuit(text: &str) -> Result<CliffordCircuit, Error> {
    let sk = parse_skeleton(text)?;
    let mut layers = Vec::with_capacity(sk.layers.len());
    for seg in &sk.layers {
        let mut gates = Vec::with_capacity(seg.len());
        for (lineno, toks) in seg {
            gates.push(parse_clifford_gate(toks, *lineno)?);
        }
        layers.push(gates);
    }
    let circuit = CliffordCircuit::new(sk.n, layers, sk.geometry)
        .map_err(|e| match e {
            Error::Invalid(msg) => Error::Parse { line: 1, msg },
            other => other,
        })?;
    let mut input = ProductState::all_zero(sk.n);
    for (lineno, toks) in &sk.input_lines {
        let (q, b) = parse_state_line(sk.n, toks, *lineno)?;
        input
            .set_bloch(q, b)
            .map_err(|e| parse_err(*lineno, e.to_string()))?;
    }
    let mut measurement = MeasurementBasis::all_z(sk.n);
    for (lineno, toks) in &sk.measure_lines {
        let (q, a) = parse_basis_line(sk.n, toks, *lineno)?;
        measurement
            .set_axis(q, a)
            .map_err(|e| parse_err(*lineno, e.to_string()))?;
    }
    if sk.conjugation.is_some()
        && (!sk.input_lines.is_empty() || !sk.measure_lines.is_empty())
    {
        return Err(parse_err(
            1,
            "conjugate line cannot be combined with input/measure blocks",
        ));
    }
    Ok(circuit
        .with_input(input)
        .expect("length checked")
        .with_measurement(measurement)
        .expect("length checked")
        .with_noise(sk.noise)
        .with_conjugation(sk.conjugation))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::PauliOp;
    use crate::smallmat::{self, C};
    use proptest::prelude::*;

    #[test]
    fn parse_minimal_circuit() {
        let c = parse_circuit("qubits 2\nCNOT 0 1\n---\n").unwrap();
        assert_eq!(c.n_qubits(), 2);
        assert_eq!(c.depth(), 1);
        assert_eq!(c.layers()[0], vec![CliffordGate::Cnot(0, 1)]);
    }

    #[test]
    fn parse_rejects_overlapping_gates_in_layer() {
        let err = parse_circuit("qubits 3\nCNOT 0 1\nH 1\n---\n").unwrap_err();
        assert!(err.to_string().contains("two gates"), "{err}");
    }

    #[test]
    fn parse_rejects_non_neighbors_under_lattice() {
        let err = parse_circuit("qubits 8\nlattice 1 8\nCNOT 0 5\n---\n").unwrap_err();
        assert!(err.to_string().contains("non-neighbors"), "{err}");
    }

    #[test]
    fn parse_accepts_neighbors_under_2d_lattice() {
        // 2x3 lattice, row-major: qubit 1 = (0,1), qubit 4 = (1,1).
        let c = parse_circuit("qubits 6\nlattice 2 2 3\nCZ 1 4\n---\n").unwrap();
        assert!(c.geometry().unwrap().are_neighbors(1, 4));
        assert_eq!(c.geometry().unwrap().coords(4), vec![1, 1]);
    }

    #[test]
    fn empty_segments_are_identity_layers() {
        let c = parse_circuit("qubits 1\n---\n---\n").unwrap();
        assert_eq!(c.depth(), 2);
        assert!(c.layers().iter().all(Vec::is_empty));
    }

    #[test]
    fn missing_body_is_an_error() {
        assert!(parse_circuit("qubits 2\n").is_err());
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let text = "# a comment\nqubits 2\n\nH 0   # trailing comment\n---\n";
        let c = parse_circuit(text).unwrap();
        assert_eq!(c.depth(), 1);
        assert_eq!(c.layers()[0], vec![CliffordGate::H(0)]);
    }

    #[test]
    fn input_and_measure_blocks() {
        let text = "qubits 3\ninput\nstate 0 |+>\nstate 2 |A>\nmeasure\nbasis 1 X\n---\n";
        let c = parse_circuit(text).unwrap();
        assert_eq!(c.input().bloch(0), BLOCH_PLUS);
        assert_eq!(c.input().bloch(1), BLOCH_ZERO);
        assert_eq!(c.input().bloch(2), BLOCH_MAGIC);
        assert_eq!(c.measurement().axis(1), [1.0, 0.0, 0.0]);
        assert_eq!(c.measurement().axis(0), [0.0, 0.0, 1.0]);
    }

    #[test]
    fn parse_error_carries_line_number() {
        let err = parse_circuit("qubits 2\nH 0\nFROB 1\n---\n").unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other}"),
        }
    }

    #[test]
    fn conjugate_forward_examples() {
        let c = parse_circuit("qubits 2\nCNOT 0 1\n---\n").unwrap();
        let x0 = PauliString::single(2, 0, PauliOp::X);
        assert_eq!(c.conjugate_forward(&x0, 1).to_string(), "+XX");
        let h = parse_circuit("qubits 1\nH 0\n---\n").unwrap();
        let x = PauliString::single(1, 0, PauliOp::X);
        assert_eq!(h.conjugate_forward(&x, 1).to_string(), "+Z");
        let s = parse_circuit("qubits 1\nS 0\n---\n").unwrap();
        assert_eq!(s.conjugate_forward(&x, 1).to_string(), "+Y");
        let y = PauliString::single(1, 0, PauliOp::Y);
        assert_eq!(s.conjugate_forward(&y, 1).to_string(), "-X");
    }

    #[test]
    fn conjugate_backward_examples() {
        let c = parse_circuit("qubits 2\nCNOT 0 1\n---\n").unwrap();
        let zt = PauliString::single(2, 1, PauliOp::Z);
        assert_eq!(c.conjugate_backward(&zt, 1).to_string(), "+ZZ");
        assert_eq!(c.conjugate_backward(&zt, 0), zt);
    }

    #[test]
    fn forward_lightcone_examples() {
        let c = parse_circuit("qubits 4\n---\n").unwrap();
        assert_eq!(c.forward_lightcone(2).iter_ones().collect::<Vec<_>>(), vec![2]);
        let c2 = parse_circuit("qubits 4\nCNOT 1 2\n---\n").unwrap();
        assert_eq!(c2.forward_lightcone(1).iter_ones().collect::<Vec<_>>(), vec![1, 2]);
        assert_eq!(c2.forward_lightcone(0).iter_ones().collect::<Vec<_>>(), vec![0]);
    }

    /// 1D brickwork of CNOTs: layer parity alternates pairings.
    fn brickwork_1d(n: usize, depth: usize) -> CliffordCircuit {
        let mut layers = Vec::new();
        for t in 0..depth {
            let mut layer = Vec::new();
            let start = t % 2;
            let mut q = start;
            while q + 1 < n {
                layer.push(CliffordGate::Cnot(q, q + 1));
                q += 2;
            }
            layers.push(layer);
        }
        CliffordCircuit::new(n, layers, Some(Geometry::new(vec![n]).unwrap())).unwrap()
    }

    #[test]
    fn lightcone_respects_manhattan_ball() {
        let d = 5;
        let c = brickwork_1d(16, d);
        for q in 0..16usize {
            let cone = c.forward_lightcone(q);
            for i in cone.iter_ones() {
                assert!(
                    q.abs_diff(i) <= d,
                    "lightcone of {q} reaches {i}, beyond distance {d}"
                );
            }
        }
    }

    #[test]
    fn weight_profile_examples() {
        let ident = parse_circuit("qubits 3\n---\n---\n").unwrap();
        let z1 = PauliString::single(3, 1, PauliOp::Z);
        assert_eq!(ident.weight_profile(&z1), vec![1, 1, 1]);
        let c = parse_circuit("qubits 2\nCNOT 0 1\n---\n").unwrap();
        let xc = PauliString::single(2, 0, PauliOp::X);
        assert_eq!(c.weight_profile(&xc), vec![1, 2]);
    }

    #[test]
    fn layer_composition_matches_dense_conjugation() {
        // Fixed depth-3, n=3 circuit checked against dense U_i … U_1 P U_1† … U_i†.
        let text = "qubits 3\nH 0\nS 1\nCNOT 1 2\n---\nCZ 0 1\nSDG 2\n---\nSWAP 0 2\n---\n";
        let c = parse_circuit(text).unwrap();
        let p: PauliString = "XYZ".parse().unwrap();

        let one = Complex64::new(1.0, 0.0);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let embed = |m: [C; 4], q: usize| -> Vec<C> {
            let mut acc = vec![one];
            let mut dim = 1;
            for i in 0..3 {
                let f: Vec<C> = if i == q {
                    m.to_vec()
                } else {
                    smallmat::MAT_I.to_vec()
                };
                acc = smallmat::kron(2, &f, dim, &acc);
                dim *= 2;
            }
            acc
        };
        let perm = |f: &dyn Fn(usize) -> (usize, C)| -> Vec<C> {
            let mut m = vec![Complex64::new(0.0, 0.0); 64];
            for b in 0..8 {
                let (o, ph) = f(b);
                m[o * 8 + b] = ph;
            }
            m
        };
        let gate_dense = |g: &CliffordGate| -> Vec<C> {
            match *g {
                CliffordGate::H(q) => embed(
                    [
                        Complex64::new(h, 0.0),
                        Complex64::new(h, 0.0),
                        Complex64::new(h, 0.0),
                        Complex64::new(-h, 0.0),
                    ],
                    q,
                ),
                CliffordGate::S(q) => embed(
                    [one, Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 1.0)],
                    q,
                ),
                CliffordGate::Sdg(q) => embed(
                    [one, Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, -1.0)],
                    q,
                ),
                CliffordGate::X(q) => embed(smallmat::MAT_X, q),
                CliffordGate::Y(q) => embed(smallmat::MAT_Y, q),
                CliffordGate::Z(q) => embed(smallmat::MAT_Z, q),
                CliffordGate::Cnot(c0, t) => perm(&|b: usize| {
                    let out = if (b >> c0) & 1 == 1 { b ^ (1 << t) } else { b };
                    (out, one)
                }),
                CliffordGate::Cz(a, bq) => perm(&|b: usize| {
                    let ph = if (b >> a) & 1 == 1 && (b >> bq) & 1 == 1 {
                        -one
                    } else {
                        one
                    };
                    (b, ph)
                }),
                CliffordGate::Swap(a, bq) => perm(&|b: usize| {
                    let (ba, bb) = ((b >> a) & 1, (b >> bq) & 1);
                    let mut o = b & !(1 << a) & !(1 << bq);
                    o |= bb << a;
                    o |= ba << bq;
                    (o, one)
                }),
            }
        };
        let dense_pauli = |p: &PauliString| -> Vec<C> {
            let mut acc = vec![one];
            let mut dim = 1;
            for q in 0..3 {
                let m = match p.op_at(q) {
                    PauliOp::I => smallmat::MAT_I,
                    PauliOp::X => smallmat::MAT_X,
                    PauliOp::Y => smallmat::MAT_Y,
                    PauliOp::Z => smallmat::MAT_Z,
                };
                acc = smallmat::kron(2, &m, dim, &acc);
                dim *= 2;
            }
            let ph = match p.phase() {
                0 => one,
                1 => Complex64::new(0.0, 1.0),
                2 => -one,
                _ => Complex64::new(0.0, -1.0),
            };
            smallmat::scale(ph, &acc)
        };

        let mut u = smallmat::ident(8);
        for upto in 0..=3usize {
            if upto > 0 {
                for g in &c.layers()[upto - 1] {
                    u = smallmat::matmul(8, &gate_dense(g), &u);
                }
            }
            let got = dense_pauli(&c.conjugate_forward(&p, upto));
            let want = smallmat::matmul(
                8,
                &u,
                &smallmat::matmul(8, &dense_pauli(&p), &smallmat::dagger(8, &u)),
            );
            assert!(
                smallmat::max_abs_diff(&got, &want) < 1e-12,
                "layer prefix {upto}"
            );
        }
    }

    #[test]
    fn render_parse_fixed_point() {
        let texts = [
            "qubits 2\nCNOT 0 1\n---\n",
            "qubits 8\nlattice 1 8\nnoise depolarizing 0.25\nH 3\n---\nCNOT 3 4\n---\n",
            "qubits 3\nnoise pauli 0.02 0.01 0.05\ninput\nstate 0 |A>\nmeasure\nbasis 2 Y\nCZ 0 1\n---\n---\n",
            "qubits 2\nconjugate bloch 0.0 1.0 0.0 1.25\nH 0\n---\n",
        ];
        for text in texts {
            let c1 = parse_circuit(text).unwrap();
            let rendered = c1.render();
            let c2 = parse_circuit(&rendered).unwrap();
            assert_eq!(c1.n_qubits(), c2.n_qubits());
            assert_eq!(c1.layers(), c2.layers());
            assert_eq!(c1.geometry(), c2.geometry());
            assert_eq!(c1.input(), c2.input());
            assert_eq!(c1.measurement(), c2.measurement());
            assert_eq!(c1.noise(), c2.noise());
            assert_eq!(c1.conjugation(), c2.conjugation());
            assert_eq!(rendered, c2.render(), "render is idempotent for {text:?}");
        }
    }

    #[test]
    fn ccc_canonicalization_identity_and_hadamard() {
        let c = parse_circuit("qubits 2\nCNOT 0 1\n---\n").unwrap();
        let (inner, input, basis) =
            canonicalize_conjugated_clifford(&BlochRotation::identity(), &c);
        assert_eq!(inner.layers(), c.layers());
        for q in 0..2 {
            assert_eq!(input.bloch(q), [0.0, 0.0, 1.0]);
            assert_eq!(basis.axis(q), [0.0, 0.0, 1.0]);
        }
        let (_, input_h, basis_h) =
            canonicalize_conjugated_clifford(&BlochRotation::hadamard(), &c);
        for q in 0..2 {
            let b = input_h.bloch(q);
            assert!((b[0] - 1.0).abs() < 1e-12 && b[1].abs() < 1e-12 && b[2].abs() < 1e-12);
            let a = basis_h.axis(q);
            assert!((a[0] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn bloch_rotation_produces_unitaries() {
        let r = BlochRotation::new([0.3, -1.2, 0.5], 2.1).unwrap();
        let u = r.unitary();
        let udg = smallmat::dagger(2, &u);
        let prod = smallmat::matmul(2, &u, &udg);
        assert!(smallmat::max_abs_diff(&prod, &smallmat::MAT_I) < 1e-12);
    }

    #[test]
    fn bloch_rotation_rejects_zero_axis_with_angle() {
        assert!(BlochRotation::new([0.0, 0.0, 0.0], 1.0).is_err());
        assert!(BlochRotation::new([0.0, 0.0, 0.0], 0.0).is_ok());
    }

    #[test]
    fn measurement_axis_must_be_unit() {
        let mut m = MeasurementBasis::all_z(2);
        assert!(m.set_axis(0, [0.5, 0.0, 0.0]).is_err());
        assert!(m.set_axis(0, [0.0, 1.0, 0.0]).is_ok());
    }

    #[test]
    fn input_bloch_may_be_mixed_but_not_outside_ball() {
        let mut s = ProductState::all_zero(1);
        assert!(s.set_bloch(0, [0.2, 0.1, 0.3]).is_ok());
        assert!(s.set_bloch(0, [0.9, 0.9, 0.9]).is_err());
    }

    fn arb_gate(n: usize) -> impl Strategy<Value = CliffordGate> {
        (0usize..9, 0..n, 0..n).prop_map(move |(k, a, b)| {
            let b = if b == a { (b + 1) % n } else { b };
            match k {
                0 => CliffordGate::H(a),
                1 => CliffordGate::S(a),
                2 => CliffordGate::Sdg(a),
                3 => CliffordGate::X(a),
                4 => CliffordGate::Y(a),
                5 => CliffordGate::Z(a),
                6 => CliffordGate::Cnot(a, b),
                7 => CliffordGate::Cz(a, b),
                _ => CliffordGate::Swap(a, b),
            }
        })
    }

    fn arb_circuit(n: usize, max_depth: usize) -> impl Strategy<Value = CliffordCircuit> {
        proptest::collection::vec(arb_gate(n), 1..=max_depth).prop_map(move |gates| {
            let layers: Vec<Vec<CliffordGate>> = gates.into_iter().map(|g| vec![g]).collect();
            CliffordCircuit::new(n, layers, None).unwrap()
        })
    }

    fn arb_pauli(n: usize) -> impl Strategy<Value = PauliString> {
        proptest::collection::vec(0usize..4, n).prop_map(|ls| {
            PauliString::from_ops(
                &ls.iter()
                    .map(|&k| [PauliOp::I, PauliOp::X, PauliOp::Y, PauliOp::Z][k])
                    .collect::<Vec<_>>(),
            )
        })
    }

    proptest! {
        #[test]
        fn prop_backward_inverts_forward(
            c in arb_circuit(4, 10),
            p in arb_pauli(4),
            frac in 0.0f64..=1.0
        ) {
            let t = (frac * c.depth() as f64).floor() as usize;
            let fwd = c.conjugate_forward(&p, t);
            prop_assert_eq!(c.conjugate_backward(&fwd, t), p);
        }

        #[test]
        fn prop_forward_preserves_hermiticity_and_commutation(
            c in arb_circuit(4, 10),
            p in arb_pauli(4),
            q in arb_pauli(4)
        ) {
            let d = c.depth();
            let fp = c.conjugate_forward(&p, d);
            let fq = c.conjugate_forward(&q, d);
            prop_assert!(fp.is_hermitian());
            prop_assert_eq!(p.commutes(&q), fp.commutes(&fq));
        }
    }
}
