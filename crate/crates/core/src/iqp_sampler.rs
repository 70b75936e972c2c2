//! Exact sampler for noisy diagonal-plus-CNOT circuits.
//!
//! Input is always `|+>^n` and readout is always the X basis, so the whole
//! run is governed by the group of X-type observables that survive the
//! noise. Z-type error generators pull back to time zero as plain Z
//! vectors (diagonal gates fix them; CNOT adds target into control), which
//! keeps the per-shot linear algebra over length-`n` bit vectors instead of
//! full symplectic pairs. X-type error factors do not pull back cheaply;
//! they are kept at their firing sites and applied mid-evolution as bit
//! flips on a sparse state vector.
//!
//! One shot:
//!
//! 1. draw which sites fired, and what each one did,
//! 2. collect Z generators (pulled back), X flip events (kept in place),
//!    and the deterministic Z offset,
//! 3. flag depolarized qubits, merge survivor lightcones into regions,
//! 4. per region, reduce the surviving X group to `[I | 0]` by column
//!    operations; replaying those operations as SWAP/CNOT basis moves turns
//!    a uniform-plus register into one random group state,
//! 5. evolve that sparse state through the region's gates and flip events,
//! 6. measure in the X basis one qubit at a time, exactly,
//! 7. fill every untouched qubit with a fair coin.

use num_complex::Complex64;

use crate::circuit::Geometry;
use crate::exec::run_indexed;
use crate::gf2::{BitVector, ColumnOp, Echelon, Gf2Matrix};
use crate::noise::{sample_error_configuration, ErrorConfiguration, NoiseModel, SiteEvent};
use crate::report::{ComponentStat, ShotRecord, ShotStats};
use crate::rng::{uniform_bit, uniform_f64};
use crate::clifford_sampler::SamplerConfig;
use crate::Error;
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

/// Largest number of qubits a single region may hold: keys live in `u128`.
pub const MAX_REGION_QUBITS: usize = 128;

const NORM_TOLERANCE: f64 = 1e-6;

// ---------------------------------------------------------------------------
// Circuit type.
// ---------------------------------------------------------------------------

/// One diagonal or CNOT gate. Phase angles are radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IqpGate {
    Phase { theta: f64, q: usize },
    CPhase { theta: f64, a: usize, b: usize },
    Ccz(usize, usize, usize),
    Cnot(usize, usize),
}

impl IqpGate {
    pub fn qubits(&self) -> impl Iterator<Item = usize> {
        let (a, b, c) = match *self {
            IqpGate::Phase { q, .. } => (q, None, None),
            IqpGate::CPhase { a, b, .. } => (a, Some(b), None),
            IqpGate::Ccz(a, b, c) => (a, Some(b), Some(c)),
            IqpGate::Cnot(a, b) => (a, Some(b), None),
        };
        std::iter::once(a).chain(b).chain(c)
    }

    /// The same gate with every operand renamed through `f`.
    #[must_use]
    pub fn map_qubits(&self, mut f: impl FnMut(usize) -> usize) -> IqpGate {
        match *self {
            IqpGate::Phase { theta, q } => IqpGate::Phase { theta, q: f(q) },
            IqpGate::CPhase { theta, a, b } => IqpGate::CPhase { theta, a: f(a), b: f(b) },
            IqpGate::Ccz(a, b, c) => IqpGate::Ccz(f(a), f(b), f(c)),
            IqpGate::Cnot(a, b) => IqpGate::Cnot(f(a), f(b)),
        }
    }

    fn render(&self) -> String {
        match *self {
            IqpGate::Phase { theta, q } => {
                format!("PHASE {} {q}", crate::circuit::render_f64(theta))
            }
            IqpGate::CPhase { theta, a, b } => {
                format!("CPHASE {} {a} {b}", crate::circuit::render_f64(theta))
            }
            IqpGate::Ccz(a, b, c) => format!("CCZ {a} {b} {c}"),
            IqpGate::Cnot(a, b) => format!("CNOT {a} {b}"),
        }
    }
}

/// Layered diagonal-plus-CNOT circuit over `|+>^n` with X readout.
#[derive(Debug, Clone)]
pub struct IqpCircuit {
    n: usize,
    layers: Vec<Vec<IqpGate>>,
    geometry: Option<Geometry>,
    noise: Option<NoiseModel>,
}

impl IqpCircuit {
    /// Validates qubit ranges, operand distinctness, within-layer
    /// disjointness, finite angles, and locality on a lattice (gate pairs
    /// must be neighbors; a CCZ may span Manhattan distance 2 between its
    /// outer operands).
    pub fn new(
        n: usize,
        layers: Vec<Vec<IqpGate>>,
        geometry: Option<Geometry>,
        noise: Option<NoiseModel>,
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
                let operands: Vec<usize> = gate.qubits().collect();
                for &q in &operands {
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
                for (i, &a) in operands.iter().enumerate() {
                    for &b in &operands[i + 1..] {
                        if a == b {
                            return Err(Error::invalid(format!(
                                "layer {}: gate with repeated qubit {a}",
                                li + 1
                            )));
                        }
                    }
                }
                if let IqpGate::Phase { theta, .. } | IqpGate::CPhase { theta, .. } = gate {
                    if !theta.is_finite() {
                        return Err(Error::invalid(format!(
                            "layer {}: non-finite phase angle",
                            li + 1
                        )));
                    }
                }
                if let Some(g) = &geometry {
                    let reach = if matches!(gate, IqpGate::Ccz(..)) { 2 } else { 1 };
                    for (i, &a) in operands.iter().enumerate() {
                        for &b in &operands[i + 1..] {
                            if g.manhattan_dist(a, b) > reach {
                                return Err(Error::invalid(format!(
                                    "layer {}: gate joins sites {a} and {b} beyond reach {reach}",
                                    li + 1
                                )));
                            }
                        }
                    }
                }
            }
        }
        Ok(IqpCircuit { n, layers, geometry, noise })
    }

    #[must_use]
    pub fn with_noise(mut self, noise: Option<NoiseModel>) -> Self {
        self.noise = noise;
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
    pub fn layers(&self) -> &[Vec<IqpGate>] {
        &self.layers
    }

    #[must_use]
    pub fn geometry(&self) -> Option<&Geometry> {
        self.geometry.as_ref()
    }

    #[must_use]
    pub fn noise(&self) -> Option<&NoiseModel> {
        self.noise.as_ref()
    }

    /// Qubits reachable from `q` sweeping forward; every multi-qubit gate
    /// (CNOT, CPHASE, CCZ) links all its operands.
    #[must_use]
    pub fn forward_lightcone(&self, q: usize) -> BitVector {
        assert!(q < self.n, "qubit index out of range");
        let mut cone = BitVector::zeros(self.n);
        cone.set(q, true);
        for layer in &self.layers {
            for gate in layer {
                let operands: Vec<usize> = gate.qubits().collect();
                if operands.len() > 1 && operands.iter().any(|&a| cone.get(a)) {
                    for &a in &operands {
                        cone.set(a, true);
                    }
                }
            }
        }
        cone
    }

    /// Pulls a Z-type vector backward through the first `from` layers.
    /// Diagonal gates fix Z exactly; a CNOT folds its target bit into its
    /// control.
    #[must_use]
    pub fn backward_z(&self, z: &BitVector, from: usize) -> BitVector {
        assert!(from <= self.depth(), "layer index out of range");
        assert_eq!(z.len(), self.n, "vector length mismatch");
        let mut v = z.clone();
        for layer in self.layers[..from].iter().rev() {
            for gate in layer {
                if let IqpGate::Cnot(c, t) = *gate {
                    if v.get(t) {
                        v.toggle(c);
                    }
                }
            }
        }
        v
    }

    /// Canonical text form; `parse_iqp_circuit(render(c))` reproduces `c`.
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

fn parse_iqp_gate(toks: &[String], lineno: usize) -> Result<IqpGate, Error> {
    let perr = |msg: String| Error::Parse { line: lineno, msg };
    let q = |tok: &String| crate::circuit::parse_usize(tok, lineno);
    match toks[0].as_str() {
        "PHASE" => {
            if toks.len() != 3 {
                return Err(perr("usage: PHASE theta q".into()));
            }
            Ok(IqpGate::Phase { theta: crate::circuit::parse_f64(&toks[1], lineno)?, q: q(&toks[2])? })
        }
        "CPHASE" => {
            if toks.len() != 4 {
                return Err(perr("usage: CPHASE theta a b".into()));
            }
            Ok(IqpGate::CPhase {
                theta: crate::circuit::parse_f64(&toks[1], lineno)?,
                a: q(&toks[2])?,
                b: q(&toks[3])?,
            })
        }
        "T" => {
            if toks.len() != 2 {
                return Err(perr("usage: T q".into()));
            }
            Ok(IqpGate::Phase { theta: std::f64::consts::FRAC_PI_4, q: q(&toks[1])? })
        }
        "CZ" => {
            if toks.len() != 3 {
                return Err(perr("usage: CZ a b".into()));
            }
            Ok(IqpGate::CPhase { theta: std::f64::consts::PI, a: q(&toks[1])?, b: q(&toks[2])? })
        }
        "CCZ" => {
            if toks.len() != 4 {
                return Err(perr("usage: CCZ a b c".into()));
            }
            Ok(IqpGate::Ccz(q(&toks[1])?, q(&toks[2])?, q(&toks[3])?))
        }
        "CNOT" => {
            if toks.len() != 3 {
                return Err(perr("usage: CNOT a b".into()));
            }
            Ok(IqpGate::Cnot(q(&toks[1])?, q(&toks[2])?))
        }
        other => Err(perr(format!("unknown gate {other:?}"))),
    }
}

/// Parse the diagonal-circuit text format. Same framing as the Clifford
/// format; the input state and measurement are fixed, so `input` /
/// `measure` blocks and `conjugate` lines are rejected.
pub fn parse_iqp_circuit(text: &str) -> Result<IqpCircuit, Error> {
    let sk = crate::circuit::parse_skeleton(text)?;
    if !sk.input_lines.is_empty() || !sk.measure_lines.is_empty() {
        return Err(Error::Parse {
            line: 1,
            msg: "diagonal circuits fix the input and measurement; remove the block".into(),
        });
    }
    if sk.conjugation.is_some() {
        return Err(Error::Parse {
            line: 1,
            msg: "diagonal circuits do not take a conjugate line".into(),
        });
    }
    let mut layers = Vec::with_capacity(sk.layers.len());
    for seg in &sk.layers {
        let mut gates = Vec::with_capacity(seg.len());
        for (lineno, toks) in seg {
            gates.push(parse_iqp_gate(toks, *lineno)?);
        }
        layers.push(gates);
    }
    IqpCircuit::new(sk.n, layers, sk.geometry, sk.noise).map_err(|e| match e {
        Error::Invalid(msg) => Error::Parse { line: 1, msg },
        other => other,
    })
}

// ---------------------------------------------------------------------------
// Error bookkeeping.
// ---------------------------------------------------------------------------

/// What a sampled configuration does to a diagonal circuit, reduced to
/// time-zero Z generators, in-place X flip events, and a deterministic Z
/// offset on the input.
#[derive(Debug, Clone)]
pub struct IqpErrorSet {
    /// Z-part vectors (length n) of the pulled-back projector generators.
    pub z_matrix: Gf2Matrix,
    /// `(layer, qubit)` sites whose event includes an X factor, applied at
    /// their own time step; sorted.
    pub x_events: Vec<(usize, usize)>,
    /// Accumulated deterministic Z offset, pulled back to time zero.
    pub zeta: BitVector,
}

/// Splits each fired event into its Z-generator / X-flip / Z-offset parts.
pub fn propagate_iqp_errors(c: &IqpCircuit, b: &ErrorConfiguration) -> IqpErrorSet {
    let n = c.n_qubits();
    let mut z_matrix = Gf2Matrix::new(n);
    let mut x_events = Vec::new();
    let mut zeta = BitVector::zeros(n);
    for site in b.sites() {
        let e = || BitVector::singleton(n, site.qubit);
        match site.event {
            SiteEvent::Depolarize => {
                // The depolarizing channel is handled by conversion to its
                // projector mixture before sampling; a raw event here would
                // need full symplectic propagation.
                unreachable!("depolarize events are converted before the diagonal path");
            }
            SiteEvent::ProjectZ => {
                z_matrix.push_row(c.backward_z(&e(), site.layer));
            }
            SiteEvent::XProjectZ => {
                z_matrix.push_row(c.backward_z(&e(), site.layer));
                x_events.push((site.layer, site.qubit));
            }
            SiteEvent::FlipX => {
                x_events.push((site.layer, site.qubit));
            }
            SiteEvent::DetZ => {
                zeta.xor_assign(&c.backward_z(&e(), site.layer));
            }
            SiteEvent::DetY => {
                zeta.xor_assign(&c.backward_z(&e(), site.layer));
                x_events.push((site.layer, site.qubit));
            }
        }
    }
    IqpErrorSet { z_matrix, x_events, zeta }
}

/// The noise model actually sampled on this path: depolarizing noise is
/// rewritten as the uniform Pauli channel so every event lands in the
/// projector mixture.
fn effective_model(model: &NoiseModel) -> NoiseModel {
    match model {
        NoiseModel::Depolarizing { .. } => model.as_pauli_channel(),
        NoiseModel::PauliChannel { .. } => *model,
    }
}

/// Qubit `i` is depolarized when `Z_i` pulls back into the span of the
/// fired projector generators.
pub fn iqp_depolarized_qubits(z_matrix: &Gf2Matrix) -> Vec<bool> {
    let n = z_matrix.n_cols();
    let ech = Echelon::from_rows(n, z_matrix.rows().iter().cloned());
    (0..n).map(|i| ech.contains(&BitVector::singleton(n, i))).collect()
}

// ---------------------------------------------------------------------------
// Sparse states over basis keys.
// ---------------------------------------------------------------------------

/// State vector over at most 128 qubits, stored as distinct basis keys with
/// amplitudes. Construction and CNOT evolution keep keys distinct, so no
/// merging happens outside measurement.
struct SparseState {
    entries: Vec<(u128, Complex64)>,
}

impl SparseState {
    fn apply_gate(&mut self, gate: &IqpGate) {
        match *gate {
            IqpGate::Phase { theta, q } => {
                let rot = Complex64::from_polar(1.0, theta);
                for (key, amp) in &mut self.entries {
                    if *key >> q & 1 == 1 {
                        *amp *= rot;
                    }
                }
            }
            IqpGate::CPhase { theta, a, b } => {
                let rot = Complex64::from_polar(1.0, theta);
                for (key, amp) in &mut self.entries {
                    if *key >> a & 1 == 1 && *key >> b & 1 == 1 {
                        *amp *= rot;
                    }
                }
            }
            IqpGate::Ccz(a, b, c) => {
                for (key, amp) in &mut self.entries {
                    if *key >> a & 1 == 1 && *key >> b & 1 == 1 && *key >> c & 1 == 1 {
                        *amp = -*amp;
                    }
                }
            }
            IqpGate::Cnot(c, t) => {
                for (key, _) in &mut self.entries {
                    if *key >> c & 1 == 1 {
                        *key ^= 1 << t;
                    }
                }
            }
        }
    }

    fn flip(&mut self, q: usize) {
        for (key, _) in &mut self.entries {
            *key ^= 1 << q;
        }
    }

    /// Measures qubit position `k` in the X basis using the uniform draw
    /// `u`; collapses in place (bit `k` of every key ends up clear).
    fn measure_x(&mut self, k: usize, u: f64) -> Result<bool, Error> {
        let mask = !(1u128 << k);
        self.entries.sort_unstable_by_key(|&(key, _)| key & mask);
        let mut p_even = 0.0f64;
        let mut p_odd = 0.0f64;
        let mut i = 0;
        while i < self.entries.len() {
            let (key, amp) = self.entries[i];
            let (a0, a1, step) = if i + 1 < self.entries.len()
                && self.entries[i + 1].0 & mask == key & mask
            {
                let (_, partner) = self.entries[i + 1];
                if key >> k & 1 == 0 {
                    (amp, partner, 2)
                } else {
                    (partner, amp, 2)
                }
            } else if key >> k & 1 == 0 {
                (amp, Complex64::ZERO, 1)
            } else {
                (Complex64::ZERO, amp, 1)
            };
            p_even += (a0 + a1).norm_sqr() / 2.0;
            p_odd += (a0 - a1).norm_sqr() / 2.0;
            i += step;
        }
        let total = p_even + p_odd;
        if !total.is_finite() || (total - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::Tolerance { context: "sparse state norm", value: total });
        }
        let outcome = u >= p_even / total;
        let p_raw = if outcome { p_odd } else { p_even };
        let scale = 1.0 / (2.0 * p_raw).sqrt();
        let mut collapsed = Vec::with_capacity(self.entries.len());
        let mut i = 0;
        while i < self.entries.len() {
            let (key, amp) = self.entries[i];
            let (a0, a1, step) = if i + 1 < self.entries.len()
                && self.entries[i + 1].0 & mask == key & mask
            {
                let (_, partner) = self.entries[i + 1];
                if key >> k & 1 == 0 {
                    (amp, partner, 2)
                } else {
                    (partner, amp, 2)
                }
            } else if key >> k & 1 == 0 {
                (amp, Complex64::ZERO, 1)
            } else {
                (Complex64::ZERO, amp, 1)
            };
            let new_amp = if outcome { (a0 - a1) * scale } else { (a0 + a1) * scale };
            if new_amp.norm_sqr() > 0.0 {
                collapsed.push((key & mask, new_amp));
            }
            i += step;
        }
        self.entries = collapsed;
        Ok(outcome)
    }

    /// `|<z_X|psi>|^2` for every X-basis outcome; dense, test-scale.
    fn x_basis_distribution(&self, m: usize) -> Vec<f64> {
        assert!(m <= 20, "dense distribution is test-scale only");
        let size = 1usize << m;
        let mut amps = vec![Complex64::ZERO; size];
        for &(key, amp) in &self.entries {
            amps[key as usize] += amp;
        }
        // In-place Walsh-Hadamard transform.
        let mut half = 1;
        while half < size {
            let mut start = 0;
            while start < size {
                for i in start..start + half {
                    let (a, b) = (amps[i], amps[i + half]);
                    amps[i] = a + b;
                    amps[i + half] = a - b;
                }
                start += 2 * half;
            }
            half *= 2;
        }
        let scale = 1.0 / size as f64;
        amps.iter().map(|a| a.norm_sqr() * scale).collect()
    }
}

// ---------------------------------------------------------------------------
// Per-region preparation.
// ---------------------------------------------------------------------------

/// Everything needed to run one region of one shot.
struct RegionPlan {
    qubits: Vec<usize>,
    /// Column operations reducing the local X-group matrix to `[I | 0]`.
    ops: Vec<ColumnOp>,
    rank: usize,
    /// Gates fully inside the region, local coordinates, by layer.
    schedule: Vec<Vec<IqpGate>>,
    /// X flips inside the region, local coordinates, indexed by time step
    /// `0..=depth`.
    flips: Vec<Vec<usize>>,
    /// Deterministic Z offset restricted to the region, local bit per
    /// position.
    zeta: u128,
}

struct IqpDecomposition {
    stats: ShotStats,
    regions: Vec<RegionPlan>,
    outside: Vec<usize>,
    aborted: bool,
}

fn decompose_iqp_shot(
    c: &IqpCircuit,
    errors: &IqpErrorSet,
    cones: &[BitVector],
    cutoff_log2: u32,
) -> Result<IqpDecomposition, Error> {
    let n = c.n_qubits();
    let flags = iqp_depolarized_qubits(&errors.z_matrix);
    let n_depolarized = flags.iter().filter(|&&f| f).count();
    let sources: Vec<usize> = (0..n).filter(|&q| !flags[q]).collect();
    let source_cones: Vec<BitVector> = sources.iter().map(|&q| cones[q].clone()).collect();
    let components =
        crate::clifford_sampler::merge_cones(n, &sources, &source_cones, c.geometry().is_none());
    let mut claimed = vec![false; n];
    for comp in &components {
        for &q in comp {
            claimed[q] = true;
        }
    }
    let outside: Vec<usize> = (0..n).filter(|&q| !claimed[q]).collect();

    let x_basis = errors.z_matrix.nullspace_basis();
    let z_ech = Echelon::from_rows(n, errors.z_matrix.rows().iter().cloned());
    let mut stats = ShotStats { depolarized: n_depolarized, components: Vec::new(), aborted: false };
    let mut regions = Vec::with_capacity(components.len());
    let mut aborted = false;
    let mut local_of = vec![usize::MAX; n];
    for comp in &components {
        let m = comp.len();
        if m > MAX_REGION_QUBITS {
            return Err(Error::CapExceeded {
                what: "region qubit count",
                limit: MAX_REGION_QUBITS,
                got: m,
            });
        }
        for (p, &q) in comp.iter().enumerate() {
            local_of[q] = p;
        }
        let mut mask = BitVector::zeros(n);
        for &q in comp {
            mask.set(q, true);
        }
        let mut local = Gf2Matrix::new(m);
        let mut local_ech = Echelon::new(m);
        for row in x_basis.rows() {
            let masked = row.masked(&mask);
            if masked.is_zero() {
                continue;
            }
            // A restricted X observable must still commute with every fired
            // projector generator; regions are lightcone-closed, so this
            // always holds — checked, not assumed.
            assert!(
                z_ech.rows().iter().all(|z| !masked.dot(z)),
                "restricted observable anticommutes with a fired projector"
            );
            let mut v = BitVector::zeros(m);
            let mut i = 0;
            while let Some(b) = masked.first_one_at_or_after(i) {
                v.set(local_of[b], true);
                i = b + 1;
            }
            if local_ech.insert(v.clone()) {
                local.push_row(v);
            }
        }
        let rank = local.n_rows();
        stats.components.push(ComponentStat { size: m, rank });
        if rank as u32 > cutoff_log2 {
            aborted = true;
        }
        let (reduced, ops) = local.column_reduce_with_ops();
        for (i, row) in reduced.rows().iter().enumerate() {
            debug_assert_eq!(row.first_one(), Some(i), "column reduction must land on [I | 0]");
            debug_assert_eq!(row.count_ones(), 1, "column reduction must land on [I | 0]");
        }
        let schedule: Vec<Vec<IqpGate>> = c
            .layers()
            .iter()
            .map(|layer| {
                layer
                    .iter()
                    .filter(|g| g.qubits().all(|q| local_of[q] != usize::MAX))
                    .map(|g| g.map_qubits(|q| local_of[q]))
                    .collect()
            })
            .collect();
        let mut flips = vec![Vec::new(); c.depth() + 1];
        for &(t, q) in &errors.x_events {
            if local_of[q] != usize::MAX {
                flips[t].push(local_of[q]);
            }
        }
        let mut zeta = 0u128;
        for (p, &q) in comp.iter().enumerate() {
            if errors.zeta.get(q) {
                zeta |= 1 << p;
            }
        }
        regions.push(RegionPlan { qubits: comp.clone(), ops, rank, schedule, flips, zeta });
        for &q in comp {
            local_of[q] = usize::MAX;
        }
    }
    stats.aborted = aborted;
    Ok(IqpDecomposition { stats, regions, outside, aborted })
}

/// Basis move recorded by the column reduction, replayed on a key. The
/// reduction maps group generators to single bits; states need the adjoint,
/// which replays the recorded operations in reverse.
fn apply_ops_reversed(ops: &[ColumnOp], mut key: u128) -> u128 {
    for op in ops.iter().rev() {
        match *op {
            ColumnOp::Swap(i, j) => {
                if (key >> i ^ key >> j) & 1 == 1 {
                    key ^= (1u128 << i) | (1u128 << j);
                }
            }
            ColumnOp::Add { target, source } => {
                if key >> source & 1 == 1 {
                    key ^= 1u128 << target;
                }
            }
        }
    }
    key
}

/// Builds the region's state for free-position bits `r`: a uniform
/// superposition over the group coset, phased by the deterministic Z
/// offset.
fn build_region_state(plan: &RegionPlan, r: u128) -> SparseState {
    let g = plan.rank;
    let amp = Complex64::new(1.0 / ((1u64 << g) as f64).sqrt(), 0.0);
    let mut entries = Vec::with_capacity(1usize << g);
    for i in 0..1u128 << g {
        let pre = i | (r << g);
        let key = apply_ops_reversed(&plan.ops, pre);
        let sign = if (plan.zeta & key).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        entries.push((key, amp * sign));
    }
    SparseState { entries }
}

/// Coset states for an explicit X-type generator set over `n` positions,
/// one per free-position assignment, built through the same
/// reduce-and-replay path the shot decomposition uses. Verification hook:
/// averaging these states' projectors must reproduce the group's Pauli
/// mixture `2^{-n} Σ_{v in <G>} X^v`.
pub(crate) fn group_coset_states(gens: &Gf2Matrix, n: usize) -> Vec<Vec<(u128, Complex64)>> {
    assert!(n <= MAX_REGION_QUBITS, "group support exceeds the region cap");
    assert_eq!(gens.n_cols(), n, "generator width mismatch");
    let mut ech = Echelon::new(n);
    let mut local = Gf2Matrix::new(n);
    for row in gens.rows() {
        if !row.is_zero() && ech.insert(row.clone()) {
            local.push_row(row.clone());
        }
    }
    let rank = local.n_rows();
    assert!(n - rank < 128, "too many free positions to enumerate");
    let (reduced, ops) = local.column_reduce_with_ops();
    for (i, row) in reduced.rows().iter().enumerate() {
        debug_assert_eq!(row.first_one(), Some(i), "column reduction must land on [I | 0]");
        debug_assert_eq!(row.count_ones(), 1, "column reduction must land on [I | 0]");
    }
    let plan = RegionPlan {
        qubits: (0..n).collect(),
        ops,
        rank,
        schedule: Vec::new(),
        flips: vec![Vec::new()],
        zeta: 0,
    };
    (0..1u128 << (n - rank)).map(|r| build_region_state(&plan, r).entries).collect()
}

/// Runs the region's evolution: flips at step 0, then alternately a gate
/// layer and that step's flips.
fn evolve_region(plan: &RegionPlan, state: &mut SparseState) {
    for &q in &plan.flips[0] {
        state.flip(q);
    }
    for (ell, layer) in plan.schedule.iter().enumerate() {
        for gate in layer {
            state.apply_gate(gate);
        }
        for &q in &plan.flips[ell + 1] {
            state.flip(q);
        }
    }
}

// ---------------------------------------------------------------------------
// Shot driver.
// ---------------------------------------------------------------------------

/// Runs one shot. Draw order: noise sites, then per region (ascending first
/// qubit) the free-position bits followed by the per-qubit outcomes, then
/// one coin per untouched qubit.
pub fn sample_iqp_output(
    c: &IqpCircuit,
    model: &NoiseModel,
    rng: &mut ChaCha8Rng,
    cutoff_log2: u32,
) -> Result<(Vec<bool>, ShotStats), Error> {
    let cones: Vec<BitVector> = (0..c.n_qubits()).map(|q| c.forward_lightcone(q)).collect();
    sample_iqp_output_with_cones(c, model, rng, cutoff_log2, &cones)
}

fn sample_iqp_output_with_cones(
    c: &IqpCircuit,
    model: &NoiseModel,
    rng: &mut ChaCha8Rng,
    cutoff_log2: u32,
    cones: &[BitVector],
) -> Result<(Vec<bool>, ShotStats), Error> {
    let n = c.n_qubits();
    let eff = effective_model(model);
    let b = sample_error_configuration(rng, n, c.depth(), &eff);
    let errors = propagate_iqp_errors(c, &b);
    let dec = decompose_iqp_shot(c, &errors, cones, cutoff_log2)?;
    let mut bits = vec![false; n];
    if dec.aborted {
        for bit in bits.iter_mut() {
            *bit = uniform_bit(rng);
        }
        return Ok((bits, dec.stats));
    }
    for plan in &dec.regions {
        let m = plan.qubits.len();
        let mut r = 0u128;
        for pos in 0..m - plan.rank {
            if uniform_bit(rng) {
                r |= 1 << pos;
            }
        }
        let mut state = build_region_state(plan, r);
        evolve_region(plan, &mut state);
        for (k, &q) in plan.qubits.iter().enumerate() {
            bits[q] = state.measure_x(k, uniform_f64(rng))?;
        }
    }
    for &q in &dec.outside {
        bits[q] = uniform_bit(rng);
    }
    Ok((bits, dec.stats))
}

/// Runs a full batch of shots with per-shot RNG streams, in shot-index
/// order regardless of scheduling.
pub fn run_iqp_shots(
    c: &IqpCircuit,
    model: &NoiseModel,
    cfg: &SamplerConfig,
) -> Result<Vec<ShotRecord>, Error> {
    if cfg.shots == 0 {
        return Err(Error::invalid("shot count must be at least 1"));
    }
    let cones: Vec<BitVector> = (0..c.n_qubits()).map(|q| c.forward_lightcone(q)).collect();
    let results: Vec<Result<ShotRecord, Error>> =
        run_indexed(cfg.exec, cfg.shots as usize, |shot| {
            let started = Instant::now();
            let mut rng = crate::rng::shot_rng(cfg.seed, shot as u64);
            let (bits, stats) =
                sample_iqp_output_with_cones(c, model, &mut rng, cfg.cutoff_log2, &cones)?;
            let wall = if cfg.record_timing {
                started.elapsed().as_micros() as u64
            } else {
                0
            };
            Ok(ShotRecord::new(cfg.seed, shot as u64, &stats, wall, bits))
        });
    results.into_iter().collect()
}

/// Exact output distribution under one fixed error configuration: per
/// region, the free positions are averaged exhaustively. Test-scale only.
pub fn iqp_config_distribution(
    c: &IqpCircuit,
    b: &ErrorConfiguration,
    cutoff_log2: u32,
) -> Result<Vec<f64>, Error> {
    let n = c.n_qubits();
    if n > 12 {
        return Err(Error::CapExceeded { what: "exact distribution size", limit: 12, got: n });
    }
    let cones: Vec<BitVector> = (0..n).map(|q| c.forward_lightcone(q)).collect();
    let errors = propagate_iqp_errors(c, b);
    let dec = decompose_iqp_shot(c, &errors, &cones, cutoff_log2)?;
    let size = 1usize << n;
    if dec.aborted {
        return Ok(vec![1.0 / size as f64; size]);
    }
    let mut parts: Vec<(Vec<usize>, Vec<f64>)> = Vec::new();
    for plan in &dec.regions {
        let m = plan.qubits.len();
        let free = m - plan.rank;
        let mut dist = vec![0.0f64; 1 << m];
        for r in 0..1u128 << free {
            let mut state = build_region_state(plan, r);
            evolve_region(plan, &mut state);
            for (z, p) in state.x_basis_distribution(m).into_iter().enumerate() {
                dist[z] += p;
            }
        }
        let scale = 1.0 / (1u64 << free) as f64;
        for p in &mut dist {
            *p *= scale;
        }
        parts.push((plan.qubits.clone(), dist));
    }
    let outside_scale = 1.0 / (1u64 << dec.outside.len()) as f64;
    let mut out = vec![0.0f64; size];
    for (z, slot) in out.iter_mut().enumerate() {
        let mut p = outside_scale;
        for (qubits, dist) in &parts {
            let mut local = 0usize;
            for (pos, &q) in qubits.iter().enumerate() {
                if z >> q & 1 == 1 {
                    local |= 1 << pos;
                }
            }
            p *= dist[local];
            if p == 0.0 {
                break;
            }
        }
        *slot = p;
    }
    Ok(out)
}
