//! Exact sampler for noisy Clifford circuits on product inputs.
//!
//! One shot works entirely at the circuit input, in the Heisenberg picture:
//!
//! 1. draw which noise sites fired,
//! 2. pull the fired errors backward to time zero,
//! 3. find which qubits the error group maximally mixes,
//! 4. split the remaining qubits into independent regions by merging the
//!    forward lightcones of the survivors,
//! 5. restrict the surviving-observable group to each region,
//! 6. walk each region's group once, caching each element's forward image
//!    and readout coefficients,
//! 7. draw the region's bits one at a time from exact conditional marginals,
//! 8. fill every untouched qubit with a fair coin.
//!
//! A region whose group is larger than `2^cutoff_log2` aborts the whole shot
//! to a uniform bitstring; the abort rate is the run's total-variation
//! budget and is reported, never hidden.

use crate::circuit::{CliffordCircuit, CliffordGate, MeasurementBasis, ProductState};
use crate::exec::{run_indexed, ExecMode};
use crate::gf2::{BitVector, Echelon, Gf2Matrix};
use crate::noise::{sample_error_configuration, ErrorConfiguration, NoiseModel, SiteEvent};
use crate::pauli::{PauliOp, PauliString};
use crate::report::{ComponentStat, ShotStats};
use crate::rng::{uniform_bit, uniform_f64};
use crate::Error;
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

pub use crate::report::ShotRecord;

/// Largest negative conditional probability tolerated before the shot is
/// declared internally inconsistent.
pub const PROB_TOLERANCE: f64 = 1e-9;

/// Run-level sampling parameters.
#[derive(Debug, Clone, Copy)]
pub struct SamplerConfig {
    pub shots: u64,
    pub seed: u64,
    pub cutoff_log2: u32,
    pub exec: ExecMode,
    /// When false, `wall_micros` is reported as 0 so output files stay
    /// byte-identical across machines and thread counts.
    pub record_timing: bool,
}

impl SamplerConfig {
    pub fn new(shots: u64, seed: u64) -> Self {
        SamplerConfig {
            shots,
            seed,
            cutoff_log2: 22,
            exec: ExecMode::Parallel,
            record_timing: false,
        }
    }
}

// ---------------------------------------------------------------------------
// Symplectic layouts.
//
// Public operations speak the `[X | Z]` row layout of `PropagatedErrorSet`.
// The per-shot pipeline interleaves the two halves (bit 2i = X_i, bit
// 2i+1 = Z_i) so that rows produced by local circuits stay banded and the
// incremental elimination touches only a few words per row.
// ---------------------------------------------------------------------------

fn interleave_pauli(p: &PauliString) -> BitVector {
    let n = p.n_qubits();
    let mut out = BitVector::zeros(2 * n);
    for i in p.x_bits().iter_ones() {
        out.set(2 * i, true);
    }
    for i in p.z_bits().iter_ones() {
        out.set(2 * i + 1, true);
    }
    out
}

/// Do two interleaved symplectic rows commute? The symplectic form pairs
/// each X bit with the partner's Z bit, i.e. a dot product against the
/// pair-swapped row.
fn interleaved_commutes(a: &BitVector, b: &BitVector) -> bool {
    const EVEN: u64 = 0x5555_5555_5555_5555;
    let mut acc = 0u64;
    for (wa, wb) in a.words().iter().zip(b.words()) {
        let swapped = ((wb & EVEN) << 1) | ((wb >> 1) & EVEN);
        acc ^= wa & swapped;
    }
    acc.count_ones() % 2 == 0
}

/// Always-on check that a truncated row commutes with the whole fired-error
/// span (via its elimination basis). Rows whose word band cannot overlap
/// `v` are skipped, so the check stays cheap on banded instances.
fn assert_commutes_banded(ech: &Echelon, v: &BitVector) {
    let Some(first) = v.first_one() else { return };
    let (wlo, whi) = (first / 64, v.last_word_nonzero());
    let pivots = ech.pivot_cols();
    let ends = ech.row_ends();
    let hi_idx = pivots.partition_point(|&p| p / 64 <= whi);
    for idx in 0..hi_idx {
        if ends[idx] < wlo {
            continue;
        }
        assert!(
            interleaved_commutes(v, &ech.rows()[idx]),
            "truncated generator fails to commute with the error set"
        );
    }
}

// ---------------------------------------------------------------------------
// Public symplectic operations ([X | Z] layout).
// ---------------------------------------------------------------------------

/// Basis of all phaseless Paulis commuting with every row of `tableau`
/// (rows in `[X | Z]` layout). Computed as the kernel of the half-swapped
/// tableau.
pub fn centralizer_basis(tableau: &Gf2Matrix) -> Gf2Matrix {
    let cols = tableau.n_cols();
    assert!(cols % 2 == 0, "symplectic rows need even length");
    let n = cols / 2;
    let mut swapped = Gf2Matrix::new(cols);
    for row in tableau.rows() {
        let mut s = BitVector::zeros(cols);
        let mut i = 0;
        while let Some(b) = row.first_one_at_or_after(i) {
            s.set(if b < n { b + n } else { b - n }, true);
            i = b + 1;
        }
        swapped.push_row(s);
    }
    swapped.nullspace_basis()
}

/// Qubits no centralizer-basis vector touches: their input factor is
/// maximally mixed. Equivalent to both `X_i` and `Z_i` lying in the row
/// space of the tableau (see `depolarized_qubits_by_membership`).
pub fn depolarized_qubits(centralizer: &Gf2Matrix) -> Vec<bool> {
    let n = centralizer.n_cols() / 2;
    let mut touched = vec![false; n];
    for row in centralizer.rows() {
        let mut i = 0;
        while let Some(b) = row.first_one_at_or_after(i) {
            touched[if b < n { b } else { b - n }] = true;
            i = b + 1;
        }
    }
    touched.iter().map(|&t| !t).collect()
}

/// The membership form of the depolarized test: `X_i` and `Z_i` both lie in
/// the span of the tableau rows.
pub fn depolarized_qubits_by_membership(tableau: &Gf2Matrix) -> Vec<bool> {
    let cols = tableau.n_cols();
    let n = cols / 2;
    let ech = Echelon::from_rows(cols, tableau.rows().iter().cloned());
    (0..n)
        .map(|i| {
            ech.contains(&BitVector::singleton(cols, i))
                && ech.contains(&BitVector::singleton(cols, n + i))
        })
        .collect()
}

/// Independent regions of surviving qubits plus everything their influence
/// reaches.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentPlan {
    pub depolarized: Vec<bool>,
    /// Sorted qubit lists, ordered by first qubit.
    pub components: Vec<Vec<usize>>,
    /// Qubits in no component; all of them are depolarized.
    pub outside: Vec<usize>,
}

/// Merges the forward lightcones of non-depolarized qubits into connected
/// regions. Without geometry the circuit is treated as all-to-all and the
/// union becomes a single region.
pub fn build_components(c: &CliffordCircuit, depolarized: &[bool]) -> ComponentPlan {
    assert_eq!(depolarized.len(), c.n_qubits());
    let sources: Vec<usize> = (0..c.n_qubits()).filter(|&q| !depolarized[q]).collect();
    let cones: Vec<BitVector> = sources.iter().map(|&q| c.forward_lightcone(q)).collect();
    let components = merge_cones(c.n_qubits(), &sources, &cones, c.geometry().is_none());
    let mut claimed = vec![false; c.n_qubits()];
    for comp in &components {
        for &q in comp {
            claimed[q] = true;
        }
    }
    let outside = (0..c.n_qubits()).filter(|&q| !claimed[q]).collect();
    ComponentPlan { depolarized: depolarized.to_vec(), components, outside }
}

/// Union-find merge of source cones: cones that share any qubit join the
/// same region. `single` collapses everything into one region regardless of
/// overlap (the all-to-all regime).
pub(crate) fn merge_cones(
    n: usize,
    sources: &[usize],
    cones: &[BitVector],
    single: bool,
) -> Vec<Vec<usize>> {
    if sources.is_empty() {
        return Vec::new();
    }
    if single {
        let mut all = BitVector::zeros(n);
        for cone in cones {
            all.or_assign(cone);
        }
        return vec![all.iter_ones().collect()];
    }
    // parent over source indices
    let mut parent: Vec<usize> = (0..sources.len()).collect();
    fn find(parent: &mut Vec<usize>, mut a: usize) -> usize {
        while parent[a] != a {
            parent[a] = parent[parent[a]];
            a = parent[a];
        }
        a
    }
    let mut owner: Vec<usize> = vec![usize::MAX; n];
    for (s, cone) in cones.iter().enumerate() {
        for q in cone.iter_ones() {
            if owner[q] == usize::MAX {
                owner[q] = s;
            } else {
                let (ra, rb) = (find(&mut parent, s), find(&mut parent, owner[q]));
                if ra != rb {
                    parent[ra] = rb;
                }
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, BitVector> = Default::default();
    for (s, cone) in cones.iter().enumerate() {
        let root = find(&mut parent, s);
        groups
            .entry(root)
            .or_insert_with(|| BitVector::zeros(n))
            .or_assign(cone);
    }
    let mut components: Vec<Vec<usize>> = groups
        .into_values()
        .map(|bits| bits.iter_ones().collect())
        .collect();
    components.sort_by_key(|c| c[0]);
    components
}

/// Restricts the centralizer basis to a region: coordinates outside the
/// region are zeroed and the surviving rows reduced to an independent set.
/// Every truncated element must still commute with the whole tableau — this
/// is a structural fact about lightcone-closed regions, asserted here rather
/// than assumed.
pub fn truncate_generators(
    centralizer: &Gf2Matrix,
    tableau: &Gf2Matrix,
    region: &[usize],
) -> Gf2Matrix {
    let cols = centralizer.n_cols();
    let n = cols / 2;
    let mut mask = BitVector::zeros(cols);
    for &q in region {
        mask.set(q, true);
        mask.set(n + q, true);
    }
    let mut ech = Echelon::new(cols);
    for row in centralizer.rows() {
        let masked = row.masked(&mask);
        if masked.is_zero() {
            continue;
        }
        ech.insert(masked);
    }
    let out = Gf2Matrix::from_rows(ech.rows().to_vec(), cols);
    for row in out.rows() {
        for t in tableau.rows() {
            assert!(
                !crate::pauli::symplectic_product(row, t),
                "truncated generator fails to commute with the error set"
            );
        }
    }
    out
}

/// Streams the span of the generator rows in Gray-code order, starting from
/// the zero vector; exactly `2^rank` elements when the rows are independent.
pub fn enumerate_group(generators: &Gf2Matrix) -> impl Iterator<Item = BitVector> + '_ {
    let rank = generators.n_rows();
    assert!(rank <= 28, "group too large to enumerate");
    let total: u64 = 1 << rank;
    let mut current = BitVector::zeros(generators.n_cols());
    (0..total).map(move |k| {
        if k > 0 {
            let idx = k.trailing_zeros() as usize;
            current.xor_assign(generators.row(idx));
        }
        current.clone()
    })
}

// ---------------------------------------------------------------------------
// Per-component preparation and the sampling-to-computing reduction.
// ---------------------------------------------------------------------------

/// One surviving group element, reduced to what the marginals need: a real
/// weight (input coefficient x image sign x readout axis factors) and the
/// output-support positions (local, ascending) where a set bit flips the
/// sign.
#[derive(Debug, Clone)]
struct GroupElement {
    weight: f64,
    support: Vec<u32>,
}

/// A region with its group walked and cached, ready for exact marginals.
#[derive(Debug, Clone)]
pub struct PreparedComponent {
    /// Global qubit indices, ascending.
    pub(crate) qubits: Vec<usize>,
    elements: Vec<GroupElement>,
}

impl PreparedComponent {
    pub fn qubits(&self) -> &[usize] {
        &self.qubits
    }

    pub fn n_elements(&self) -> usize {
        self.elements.len()
    }
}

fn pauli_from_local_interleaved(v: &BitVector, m: usize) -> PauliString {
    let mut x = BitVector::zeros(m);
    let mut z = BitVector::zeros(m);
    for b in v.iter_ones() {
        if b % 2 == 0 {
            x.set(b / 2, true);
        } else {
            z.set(b / 2, true);
        }
    }
    PauliString::from_xz(x, z, 0)
}

fn bloch_coefficient(bloch: &[f64; 3], op: PauliOp) -> f64 {
    match op {
        PauliOp::I => 1.0,
        PauliOp::X => bloch[0],
        PauliOp::Y => bloch[1],
        PauliOp::Z => bloch[2],
    }
}

/// Walks the group of a region and caches every element's contribution.
///
/// `local_rows` are the region's generators over local interleaved
/// coordinates; `schedule` is the circuit restricted to gates entirely
/// inside the region, with qubits renamed to local positions.
fn prepare_component_inner(
    qubits: Vec<usize>,
    local_rows: &[BitVector],
    schedule: &[Vec<CliffordGate>],
    input: &ProductState,
    basis: &MeasurementBasis,
) -> PreparedComponent {
    let m = qubits.len();
    let blochs: Vec<[f64; 3]> = qubits.iter().map(|&q| input.bloch(q)).collect();
    let axes: Vec<[f64; 3]> = qubits.iter().map(|&q| basis.axis(q)).collect();
    let mut elements = Vec::with_capacity(1usize << local_rows.len());
    let mut current = BitVector::zeros(2 * m);
    let total: u64 = 1 << local_rows.len();
    for k in 0..total {
        if k > 0 {
            current.xor_assign(&local_rows[k.trailing_zeros() as usize]);
        }
        let s = pauli_from_local_interleaved(&current, m);
        let mut weight = 1.0f64;
        for p in s.support().iter_ones() {
            weight *= bloch_coefficient(&blochs[p], s.op_at(p));
            if weight == 0.0 {
                break;
            }
        }
        if weight == 0.0 {
            continue;
        }
        let mut image = s;
        for layer in schedule {
            for gate in layer {
                gate.conjugate(&mut image);
            }
        }
        debug_assert!(image.is_hermitian(), "Clifford images of Hermitian Paulis stay Hermitian");
        weight *= f64::from(image.sign());
        let mut support = Vec::new();
        for p in image.support().iter_ones() {
            weight *= bloch_coefficient(&axes[p], image.op_at(p));
            support.push(p as u32);
        }
        if weight == 0.0 {
            continue;
        }
        elements.push(GroupElement { weight, support });
    }
    PreparedComponent { qubits, elements }
}

/// Public entry: prepare a region of `c` from its `[X | Z]` generator rows.
pub fn prepare_component(
    c: &CliffordCircuit,
    input: &ProductState,
    basis: &MeasurementBasis,
    generators: &Gf2Matrix,
    region: &[usize],
) -> PreparedComponent {
    let n = c.n_qubits();
    let mut local_of = vec![usize::MAX; n];
    for (p, &q) in region.iter().enumerate() {
        local_of[q] = p;
    }
    let local_rows: Vec<BitVector> = generators
        .rows()
        .iter()
        .map(|row| {
            let mut local = BitVector::zeros(2 * region.len());
            let mut i = 0;
            while let Some(b) = row.first_one_at_or_after(i) {
                let (q, is_z) = if b < n { (b, false) } else { (b - n, true) };
                let p = local_of[q];
                assert!(p != usize::MAX, "generator supported outside its region");
                local.set(2 * p + usize::from(is_z), true);
                i = b + 1;
            }
            local
        })
        .collect();
    let schedule = local_schedule(c, &local_of);
    prepare_component_inner(region.to_vec(), &local_rows, &schedule, input, basis)
}

/// Gates entirely inside the region, renamed to local positions. Gates that
/// only brush the region act trivially on every surviving image (their
/// region endpoint is not yet reachable from any survivor when they fire),
/// so dropping them is exact.
fn local_schedule(c: &CliffordCircuit, local_of: &[usize]) -> Vec<Vec<CliffordGate>> {
    let inside = |q: usize| local_of[q] != usize::MAX;
    c.layers()
        .iter()
        .map(|layer| {
            layer
                .iter()
                .filter(|g| g.qubits().all(inside))
                .map(|g| g.map_qubits(|q| local_of[q]))
                .collect()
        })
        .collect()
}

/// `p(assignment)` for any partial assignment of the region's qubits:
/// `2^-|A|` times the sum of cached weights of elements supported inside
/// the assigned set, each signed by the parity of the assigned bits it
/// touches.
pub fn marginal_probability(comp: &PreparedComponent, assigned: &[Option<bool>]) -> f64 {
    assert_eq!(assigned.len(), comp.qubits.len());
    let a: usize = assigned.iter().filter(|b| b.is_some()).count();
    let mut sum = 0.0;
    'el: for el in &comp.elements {
        let mut w = el.weight;
        for &p in &el.support {
            match assigned[p as usize] {
                None => continue 'el,
                Some(true) => w = -w,
                Some(false) => {}
            }
        }
        sum += w;
    }
    sum / (1u64 << a) as f64
}

/// Draws the region's bits in ascending qubit order from exact conditional
/// marginals. Spends one uniform draw per qubit.
pub fn sample_component(
    comp: &PreparedComponent,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<bool>, Error> {
    let m = comp.qubits.len();
    // Elements become usable once their last support position is assigned.
    let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); m];
    let mut done = 0.0f64;
    for (idx, el) in comp.elements.iter().enumerate() {
        match el.support.last() {
            None => done += el.weight,
            Some(&last) => buckets[last as usize].push(idx),
        }
    }
    let mut bits = vec![false; m];
    for k in 0..m {
        let mut pending = 0.0f64;
        let mut parts: Vec<f64> = Vec::with_capacity(buckets[k].len());
        for &idx in &buckets[k] {
            let el = &comp.elements[idx];
            let mut v = el.weight;
            for &p in &el.support[..el.support.len() - 1] {
                if bits[p as usize] {
                    v = -v;
                }
            }
            pending += v;
            parts.push(v);
        }
        if done <= 0.0 {
            return Err(Error::Tolerance { context: "conditional denominator", value: done });
        }
        let p0 = (done + pending) / (2.0 * done);
        if !(-PROB_TOLERANCE..=1.0 + PROB_TOLERANCE).contains(&p0) {
            return Err(Error::Tolerance { context: "conditional probability", value: p0 });
        }
        let z = uniform_f64(rng) >= p0.clamp(0.0, 1.0);
        bits[k] = z;
        let sign = if z { -1.0 } else { 1.0 };
        for v in parts {
            done += sign * v;
        }
    }
    Ok(bits)
}

/// Exact distribution of a prepared region over its `2^m` outcomes.
/// Test-scale only.
pub fn component_distribution(comp: &PreparedComponent) -> Result<Vec<f64>, Error> {
    let m = comp.qubits.len();
    if m > 22 {
        return Err(Error::CapExceeded { what: "component distribution size", limit: 22, got: m });
    }
    let size = 1usize << m;
    let mut out = vec![0.0f64; size];
    for el in &comp.elements {
        let mut mask = 0usize;
        for &p in &el.support {
            mask |= 1 << p;
        }
        for (z, slot) in out.iter_mut().enumerate() {
            let sign = if (z & mask).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            *slot += sign * el.weight;
        }
    }
    let scale = 1.0 / size as f64;
    for p in &mut out {
        *p *= scale;
        if *p < -PROB_TOLERANCE {
            return Err(Error::Tolerance { context: "component probability", value: *p });
        }
        *p = p.max(0.0);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// The per-shot pipeline (interleaved layout).
// ---------------------------------------------------------------------------

/// Immutable per-run tables shared by every shot: forward lightcones and a
/// per-layer qubit-to-gate index for localized backward conjugation.
pub(crate) struct CircuitIndex<'a> {
    c: &'a CliffordCircuit,
    cones: Vec<BitVector>,
    gate_of: Vec<Vec<u32>>, // [layer][qubit] -> gate index + 1, or 0
}

impl<'a> CircuitIndex<'a> {
    pub(crate) fn new(c: &'a CliffordCircuit) -> Self {
        let n = c.n_qubits();
        let cones = (0..n).map(|q| c.forward_lightcone(q)).collect();
        let gate_of = c
            .layers()
            .iter()
            .map(|layer| {
                let mut map = vec![0u32; n];
                for (gi, gate) in layer.iter().enumerate() {
                    for q in gate.qubits() {
                        map[q] = gi as u32 + 1;
                    }
                }
                map
            })
            .collect();
        CircuitIndex { c, cones, gate_of }
    }

    /// Backward image of a single-qubit error fired at noise layer `t`,
    /// conjugated through gate layers `t, t-1, …, 1`, visiting only gates
    /// that touch the evolving support.
    fn backward_image(&self, t: usize, qubit: usize, op: PauliOp) -> PauliString {
        let n = self.c.n_qubits();
        let mut p = PauliString::single(n, qubit, op);
        let (mut lo, mut hi) = (qubit, qubit);
        for layer in (0..t).rev() {
            let map = &self.gate_of[layer];
            let gates = &self.c.layers()[layer];
            let mut touched: Vec<u32> = Vec::new();
            let mut scan = |v: &BitVector| {
                let mut i = lo;
                while let Some(b) = v.first_one_at_or_after(i) {
                    if b > hi {
                        break;
                    }
                    if map[b] != 0 {
                        touched.push(map[b]);
                    }
                    i = b + 1;
                }
            };
            scan(p.x_bits());
            scan(p.z_bits());
            touched.sort_unstable();
            touched.dedup();
            for gi in touched {
                let gate = &gates[gi as usize - 1];
                gate.conjugate_inverse(&mut p);
                for q in gate.qubits() {
                    lo = lo.min(q);
                    hi = hi.max(q);
                }
            }
        }
        p
    }
}

/// Everything the shot decided before any output bit was drawn.
pub(crate) struct ShotDecomposition {
    pub(crate) stats: ShotStats,
    /// For each region (ordered by first qubit): qubits and local
    /// interleaved generator rows. Empty when aborted.
    pub(crate) regions: Vec<(Vec<usize>, Vec<BitVector>)>,
    pub(crate) outside: Vec<usize>,
    pub(crate) aborted: bool,
    /// Per-qubit flag: both local Paulis lie in the fired-error span.
    pub(crate) depolarized: Vec<bool>,
}

pub(crate) fn decompose_shot(
    index: &CircuitIndex<'_>,
    b: &ErrorConfiguration,
    cutoff_log2: u32,
) -> ShotDecomposition {
    let c = index.c;
    let n = c.n_qubits();
    // Backward-propagate the fired errors straight into the elimination.
    let mut ech = Echelon::new(2 * n);
    for site in b.sites() {
        let mut add = |op: PauliOp| {
            let p = index.backward_image(site.layer, site.qubit, op);
            ech.insert(interleave_pauli(&p));
        };
        match site.event {
            SiteEvent::Depolarize => {
                add(PauliOp::X);
                add(PauliOp::Z);
            }
            SiteEvent::ProjectZ | SiteEvent::XProjectZ => add(PauliOp::Z),
            SiteEvent::FlipX | SiteEvent::DetZ | SiteEvent::DetY => {}
        }
    }
    // Depolarized = both X_i and Z_i in the row space.
    let mut depolarized = vec![false; n];
    let mut n_depolarized = 0;
    for (q, flag) in depolarized.iter_mut().enumerate() {
        *flag = ech.contains(&BitVector::singleton(2 * n, 2 * q))
            && ech.contains(&BitVector::singleton(2 * n, 2 * q + 1));
        n_depolarized += usize::from(*flag);
    }
    let sources: Vec<usize> = (0..n).filter(|&q| !depolarized[q]).collect();
    let source_cones: Vec<BitVector> = sources.iter().map(|&q| index.cones[q].clone()).collect();
    let components = merge_cones(n, &sources, &source_cones, c.geometry().is_none());
    let mut claimed = vec![false; n];
    for comp in &components {
        for &q in comp {
            claimed[q] = true;
        }
    }
    let outside: Vec<usize> = (0..n).filter(|&q| !claimed[q]).collect();
    debug_assert!(outside.iter().all(|&q| depolarized[q]));

    // Surviving-observable basis; `ech` stays alive (now in reduced form) so
    // truncated rows can be re-checked against the fired-error span.
    let basis_rows: Vec<BitVector> = ech.nullspace_basis();
    let mut local_of = vec![usize::MAX; n];
    let mut regions = Vec::with_capacity(components.len());
    let mut stats = ShotStats { depolarized: n_depolarized, components: Vec::new(), aborted: false };
    let mut aborted = false;
    for comp in &components {
        for (p, &q) in comp.iter().enumerate() {
            local_of[q] = p;
        }
        let mut mask = BitVector::zeros(2 * n);
        for &q in comp {
            mask.set(2 * q, true);
            mask.set(2 * q + 1, true);
        }
        let mut local_ech = Echelon::new(2 * comp.len());
        for row in &basis_rows {
            let masked = row.masked(&mask);
            if masked.is_zero() {
                continue;
            }
            // Every truncated element must still commute with the fired
            // errors; a failure here is a pipeline bug, not bad input.
            assert_commutes_banded(&ech, &masked);
            let mut local = BitVector::zeros(2 * comp.len());
            let mut i = 0;
            while let Some(bit) = masked.first_one_at_or_after(i) {
                let q = bit / 2;
                local.set(2 * local_of[q] + bit % 2, true);
                i = bit + 1;
            }
            local_ech.insert(local);
        }
        let rank = local_ech.rank();
        stats.components.push(ComponentStat { size: comp.len(), rank });
        if rank as u32 > cutoff_log2 {
            aborted = true;
        }
        regions.push((comp.clone(), local_ech.rows().to_vec()));
        for &q in comp {
            local_of[q] = usize::MAX;
        }
    }
    stats.aborted = aborted;
    ShotDecomposition { stats, regions, outside, aborted, depolarized }
}

/// Runs one shot: draws an error configuration from `rng`, decomposes it,
/// and samples the output bits. See the module docs for the full step list
/// and the draw-order contract.
pub fn sample_output(
    c: &CliffordCircuit,
    input: &ProductState,
    basis: &MeasurementBasis,
    model: &NoiseModel,
    rng: &mut ChaCha8Rng,
    cutoff_log2: u32,
) -> Result<(Vec<bool>, ShotStats), Error> {
    let index = CircuitIndex::new(c);
    sample_output_indexed(&index, input, basis, model, rng, cutoff_log2)
}

fn check_model(model: &NoiseModel) -> Result<f64, Error> {
    match model {
        NoiseModel::Depolarizing { gamma } => Ok(*gamma),
        NoiseModel::PauliChannel { .. } => Err(Error::invalid(
            "general Pauli channels are only supported on the diagonal-circuit path; \
             use depolarizing noise here",
        )),
    }
}

fn sample_output_indexed(
    index: &CircuitIndex<'_>,
    input: &ProductState,
    basis: &MeasurementBasis,
    model: &NoiseModel,
    rng: &mut ChaCha8Rng,
    cutoff_log2: u32,
) -> Result<(Vec<bool>, ShotStats), Error> {
    check_model(model)?;
    let c = index.c;
    let n = c.n_qubits();
    if input.n_qubits() != n || basis.n_qubits() != n {
        return Err(Error::invalid("input state or basis length does not match circuit"));
    }
    let b = sample_error_configuration(rng, n, c.depth(), model);
    let dec = decompose_shot(index, &b, cutoff_log2);
    let mut bits = vec![false; n];
    if dec.aborted {
        for bit in bits.iter_mut() {
            *bit = uniform_bit(rng);
        }
        return Ok((bits, dec.stats));
    }
    for (qubits, local_rows) in &dec.regions {
        let mut local_of = vec![usize::MAX; n];
        for (p, &q) in qubits.iter().enumerate() {
            local_of[q] = p;
        }
        let schedule = local_schedule(c, &local_of);
        let comp = prepare_component_inner(qubits.clone(), local_rows, &schedule, input, basis);
        let local_bits = sample_component(&comp, rng)?;
        for (p, &q) in qubits.iter().enumerate() {
            bits[q] = local_bits[p];
        }
    }
    for &q in &dec.outside {
        bits[q] = uniform_bit(rng);
    }
    Ok((bits, dec.stats))
}

/// Component statistics of one sampled configuration, skipping enumeration
/// and output sampling entirely. Used by the percolation diagnostics.
pub(crate) fn component_stats_for_config(
    index: &CircuitIndex<'_>,
    b: &ErrorConfiguration,
    cutoff_log2: u32,
) -> ShotStats {
    decompose_shot(index, b, cutoff_log2).stats
}

/// Exact output distribution under one fixed error configuration, composed
/// from per-region distributions and fair coins outside. Test-scale only
/// (`n <= 20`).
pub fn full_distribution(
    c: &CliffordCircuit,
    input: &ProductState,
    basis: &MeasurementBasis,
    b: &ErrorConfiguration,
    cutoff_log2: u32,
) -> Result<Vec<f64>, Error> {
    let n = c.n_qubits();
    if n > 20 {
        return Err(Error::CapExceeded { what: "full distribution size", limit: 20, got: n });
    }
    let index = CircuitIndex::new(c);
    let dec = decompose_shot(&index, b, cutoff_log2);
    let size = 1usize << n;
    if dec.aborted {
        return Ok(vec![1.0 / size as f64; size]);
    }
    let mut parts: Vec<(Vec<usize>, Vec<f64>)> = Vec::new();
    for (qubits, local_rows) in &dec.regions {
        let mut local_of = vec![usize::MAX; n];
        for (p, &q) in qubits.iter().enumerate() {
            local_of[q] = p;
        }
        let schedule = local_schedule(c, &local_of);
        let comp = prepare_component_inner(qubits.clone(), local_rows, &schedule, input, basis);
        parts.push((qubits.clone(), component_distribution(&comp)?));
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

/// Runs a full batch of shots with per-shot RNG streams, in shot-index
/// order regardless of scheduling.
pub fn run_shots(
    c: &CliffordCircuit,
    model: &NoiseModel,
    cfg: &SamplerConfig,
) -> Result<Vec<ShotRecord>, Error> {
    check_model(model)?;
    if cfg.shots == 0 {
        return Err(Error::invalid("shot count must be at least 1"));
    }
    let index = CircuitIndex::new(c);
    let input = c.input().clone();
    let basis = c.measurement().clone();
    let results: Vec<Result<ShotRecord, Error>> =
        run_indexed(cfg.exec, cfg.shots as usize, |shot| {
            let started = Instant::now();
            let mut rng = crate::rng::shot_rng(cfg.seed, shot as u64);
            let (bits, stats) =
                sample_output_indexed(&index, &input, &basis, model, &mut rng, cfg.cutoff_log2)?;
            let wall = if cfg.record_timing {
                started.elapsed().as_micros() as u64
            } else {
                0
            };
            Ok(ShotRecord::new(cfg.seed, shot as u64, &stats, wall, bits))
        });
    results.into_iter().collect()
}
