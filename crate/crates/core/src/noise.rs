//! Single-qubit noise models, stochastic error configurations, and their
//! backward-propagated generator sets.
//!
//! A noise model attaches an independent single-qubit channel to every site
//! `(t, i)` with `t ∈ 0..=depth` (`t = 0` fires before the first gate layer)
//! and `i` a qubit index. One stochastic realization is an
//! [`ErrorConfiguration`]: the sparse set of sites where a non-identity event
//! fired. Propagating the fired events backward through the circuit prefix
//! yields the generator set the sampler works with.

use crate::circuit::CliffordCircuit;
use crate::gf2::Gf2Matrix;
use crate::pauli::PauliString;
use crate::rng::uniform_f64;
use crate::Error;
use rand_chacha::ChaCha8Rng;

/// Per-site noise channel applied at every `(t, i)` site.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseModel {
    /// Uniform depolarizing channel with strength `gamma`:
    /// `rho -> (1-gamma) rho + gamma I/2`.
    Depolarizing { gamma: f64 },
    /// General Pauli channel `rho -> pI rho + px X rho X + py Y rho Y + pz Z rho Z`.
    PauliChannel { px: f64, py: f64, pz: f64 },
}

impl NoiseModel {
    pub fn depolarizing(gamma: f64) -> Result<Self, Error> {
        if !(0.0..=1.0).contains(&gamma) || !gamma.is_finite() {
            return Err(Error::invalid(format!(
                "depolarizing strength must lie in [0, 1], got {gamma}"
            )));
        }
        Ok(NoiseModel::Depolarizing { gamma })
    }

    pub fn pauli(px: f64, py: f64, pz: f64) -> Result<Self, Error> {
        for (name, p) in [("px", px), ("py", py), ("pz", pz)] {
            if !(0.0..=1.0).contains(&p) || !p.is_finite() {
                return Err(Error::invalid(format!(
                    "pauli probability {name} must lie in [0, 1], got {p}"
                )));
            }
        }
        let sum = px + py + pz;
        if sum > 1.0 + 1e-12 {
            return Err(Error::invalid(format!(
                "pauli probabilities sum to {sum}, exceeding 1"
            )));
        }
        Ok(NoiseModel::PauliChannel { px, py, pz })
    }

    /// Parses the tokens following the `noise` keyword of a circuit file.
    pub(crate) fn parse_line(toks: &[String], line: usize) -> Result<Self, Error> {
        let parse = |tok: &String| -> Result<f64, Error> {
            crate::circuit::parse_f64(tok, line)
        };
        match toks {
            [kind, g] if kind == "depolarizing" => NoiseModel::depolarizing(parse(g)?)
                .map_err(|e| Error::Parse { line, msg: e.to_string() }),
            [kind, px, py, pz] if kind == "pauli" => {
                NoiseModel::pauli(parse(px)?, parse(py)?, parse(pz)?)
                    .map_err(|e| Error::Parse { line, msg: e.to_string() })
            }
            _ => Err(Error::Parse {
                line,
                msg: "expected `noise depolarizing G` or `noise pauli PX PY PZ`".into(),
            }),
        }
    }

    /// Parses the CLI flag syntax `depolarizing:G` or `pauli:PX,PY,PZ`.
    pub fn parse_flag(s: &str) -> Result<Self, Error> {
        let (kind, rest) = s
            .split_once(':')
            .ok_or_else(|| Error::invalid(format!("noise flag `{s}` missing `:`")))?;
        let num = |t: &str| -> Result<f64, Error> {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::invalid(format!("bad number `{t}` in noise flag")))
        };
        match kind {
            "depolarizing" => NoiseModel::depolarizing(num(rest)?),
            "pauli" => {
                let parts: Vec<&str> = rest.split(',').collect();
                if parts.len() != 3 {
                    return Err(Error::invalid(format!(
                        "pauli noise flag needs three probabilities, got `{rest}`"
                    )));
                }
                NoiseModel::pauli(num(parts[0])?, num(parts[1])?, num(parts[2])?)
            }
            _ => Err(Error::invalid(format!("unknown noise kind `{kind}`"))),
        }
    }

    /// Renders the circuit-file line for this model.
    pub fn render(&self) -> String {
        match *self {
            NoiseModel::Depolarizing { gamma } => {
                format!("noise depolarizing {}", crate::circuit::render_f64(gamma))
            }
            NoiseModel::PauliChannel { px, py, pz } => format!(
                "noise pauli {} {} {}",
                crate::circuit::render_f64(px),
                crate::circuit::render_f64(py),
                crate::circuit::render_f64(pz)
            ),
        }
    }

    /// `(pI, px, py, pz)` of the equivalent Pauli channel.
    pub fn as_pauli_probs(&self) -> (f64, f64, f64, f64) {
        match *self {
            NoiseModel::Depolarizing { gamma } => {
                let q = gamma / 4.0;
                (1.0 - 3.0 * q, q, q, q)
            }
            NoiseModel::PauliChannel { px, py, pz } => (1.0 - px - py - pz, px, py, pz),
        }
    }

    /// The same channel re-expressed as a `PauliChannel` model.
    pub fn as_pauli_channel(&self) -> NoiseModel {
        let (_, px, py, pz) = self.as_pauli_probs();
        NoiseModel::PauliChannel { px, py, pz }
    }

    /// Pauli-transfer-matrix diagonal `(1, cx, cy, cz)`: the factor each Bloch
    /// component picks up under one application of the channel.
    pub fn ptm_diagonal(&self) -> [f64; 4] {
        let (_, px, py, pz) = self.as_pauli_probs();
        [
            1.0,
            1.0 - 2.0 * (py + pz),
            1.0 - 2.0 * (px + pz),
            1.0 - 2.0 * (px + py),
        ]
    }

    /// Decomposition into the event mixture used by the diagonal-circuit
    /// sampling path. See [`decompose_pauli_channel`].
    pub fn mixture(&self) -> ChannelMixture {
        let (_, px, py, pz) = self.as_pauli_probs();
        decompose_pauli_channel(px, py, pz)
            .expect("validated model probabilities always decompose")
    }
}

/// One concrete event a site can fire. `Depolarize` is the maximal-mixing
/// event of the depolarizing model; the remaining five arise from the greedy
/// decomposition of a Pauli channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum SiteEvent {
    /// Replace the qubit by the maximally mixed state.
    Depolarize,
    /// `rho -> (rho + Z rho Z) / 2`.
    ProjectZ,
    /// `rho -> (X rho X + Y rho Y) / 2`, i.e. an X flip after `ProjectZ`.
    XProjectZ,
    /// Deterministic X error.
    FlipX,
    /// Deterministic Z error.
    DetZ,
    /// Deterministic Y error.
    DetY,
}

impl SiteEvent {
    /// Bloch-vector scaling `(1, cx, cy, cz)` of the event channel.
    pub fn ptm_diagonal(&self) -> [f64; 4] {
        match self {
            SiteEvent::Depolarize => [1.0, 0.0, 0.0, 0.0],
            SiteEvent::ProjectZ => [1.0, 0.0, 0.0, 1.0],
            SiteEvent::XProjectZ => [1.0, 0.0, 0.0, -1.0],
            SiteEvent::FlipX => [1.0, 1.0, -1.0, -1.0],
            SiteEvent::DetZ => [1.0, -1.0, -1.0, 1.0],
            SiteEvent::DetY => [1.0, -1.0, 1.0, -1.0],
        }
    }
}

/// Probabilities of the six events a Pauli channel splits into. Entries sum
/// to one; the complementary identity weight is explicit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelMixture {
    pub identity: f64,
    pub project_z: f64,
    pub x_project_z: f64,
    pub flip_x: f64,
    pub det_z: f64,
    pub det_y: f64,
}

impl ChannelMixture {
    /// Event probabilities in the canonical order used for CDF sampling.
    /// The identity weight is not listed; it is the complement.
    pub fn entries(&self) -> [(SiteEvent, f64); 5] {
        [
            (SiteEvent::ProjectZ, self.project_z),
            (SiteEvent::XProjectZ, self.x_project_z),
            (SiteEvent::FlipX, self.flip_x),
            (SiteEvent::DetZ, self.det_z),
            (SiteEvent::DetY, self.det_y),
        ]
    }

    /// Maps a uniform draw to an event by walking the CDF with the identity
    /// bucket first; `None` means no event fired.
    pub fn sample(&self, u: f64) -> Option<SiteEvent> {
        let mut acc = self.identity;
        if u < acc {
            return None;
        }
        for (event, p) in self.entries() {
            acc += p;
            if u < acc {
                return Some(event);
            }
        }
        // Floating-point slack at the top of the CDF: attribute it to the
        // last nonzero bucket so probabilities stay normalized.
        self.entries()
            .into_iter()
            .rev()
            .find(|&(_, p)| p > 0.0)
            .map(|(e, _)| e)
    }

    /// Total probability of firing an event that projects onto the Z axis.
    pub fn projector_rate(&self) -> f64 {
        self.project_z + self.x_project_z
    }

    pub fn total(&self) -> f64 {
        self.identity + self.project_z + self.x_project_z + self.flip_x + self.det_z + self.det_y
    }
}

/// Splits a Pauli channel `(px, py, pz)` into the six-event mixture,
/// greedily extracting the two projector events first:
/// the Z projector pairs identity with Z weight, and the flipped projector
/// pairs X with Y weight. Whatever remains stays as deterministic errors.
pub fn decompose_pauli_channel(px: f64, py: f64, pz: f64) -> Result<ChannelMixture, Error> {
    // Validate via the model constructor so both paths agree on what is legal.
    let _ = NoiseModel::pauli(px, py, pz)?;
    let p_i = (1.0 - px - py - pz).max(0.0);
    let q_z = p_i.min(pz);
    let q_x = px.min(py);
    let m = ChannelMixture {
        identity: p_i - q_z,
        project_z: 2.0 * q_z,
        x_project_z: 2.0 * q_x,
        flip_x: px - q_x,
        det_z: pz - q_z,
        det_y: py - q_x,
    };
    debug_assert!((m.total() - 1.0).abs() < 1e-12);
    Ok(m)
}

/// A fired event at noise layer `layer` (0 = before the first gate layer) on
/// qubit `qubit`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SiteError {
    pub layer: usize,
    pub qubit: usize,
    pub event: SiteEvent,
}

/// One stochastic realization of the noise: the sparse, sorted set of sites
/// that fired. Sites absent from the set acted as the identity.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ErrorConfiguration {
    sites: Vec<SiteError>,
}

impl ErrorConfiguration {
    /// Builds a configuration from fired sites, sorting by `(layer, qubit)`
    /// and rejecting duplicates or out-of-range coordinates.
    pub fn new(mut sites: Vec<SiteError>, n: usize, depth: usize) -> Result<Self, Error> {
        for s in &sites {
            if s.qubit >= n {
                return Err(Error::invalid(format!(
                    "error site qubit {} out of range for {n} qubits",
                    s.qubit
                )));
            }
            if s.layer > depth {
                return Err(Error::invalid(format!(
                    "error site layer {} exceeds depth {depth}",
                    s.layer
                )));
            }
        }
        sites.sort_by_key(|s| (s.layer, s.qubit));
        if sites.windows(2).any(|w| (w[0].layer, w[0].qubit) == (w[1].layer, w[1].qubit)) {
            return Err(Error::invalid("duplicate error site"));
        }
        Ok(ErrorConfiguration { sites })
    }

    pub fn empty() -> Self {
        ErrorConfiguration::default()
    }

    pub fn sites(&self) -> &[SiteError] {
        &self.sites
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    /// The event fired at `(layer, qubit)`, if any.
    pub fn event_at(&self, layer: usize, qubit: usize) -> Option<SiteEvent> {
        self.sites
            .binary_search_by_key(&(layer, qubit), |s| (s.layer, s.qubit))
            .ok()
            .map(|i| self.sites[i].event)
    }
}

/// Draws one error configuration. Sites are visited in layer-major, then
/// qubit-ascending order with exactly one uniform draw each, so the stream
/// position after sampling is `(depth + 1) * n` draws regardless of outcome.
pub fn sample_error_configuration(
    rng: &mut ChaCha8Rng,
    n: usize,
    depth: usize,
    model: &NoiseModel,
) -> ErrorConfiguration {
    let mut sites = Vec::new();
    match *model {
        NoiseModel::Depolarizing { gamma } => {
            for layer in 0..=depth {
                for qubit in 0..n {
                    if uniform_f64(rng) < gamma {
                        sites.push(SiteError { layer, qubit, event: SiteEvent::Depolarize });
                    }
                }
            }
        }
        NoiseModel::PauliChannel { .. } => {
            let mixture = model.mixture();
            for layer in 0..=depth {
                for qubit in 0..n {
                    if let Some(event) = mixture.sample(uniform_f64(rng)) {
                        sites.push(SiteError { layer, qubit, event });
                    }
                }
            }
        }
    }
    // Construction order is already sorted and duplicate-free.
    ErrorConfiguration { sites }
}

/// Backward-propagated images of the fired errors: phaseless Hermitian
/// generators at the circuit input, plus their symplectic rows `[X | Z]`.
#[derive(Debug, Clone)]
pub struct PropagatedErrorSet {
    pub generators: Vec<PauliString>,
    pub matrix: Gf2Matrix,
}

/// Conjugates each fired site's generating errors backward through the
/// circuit prefix before its layer. A `Depolarize` site contributes the
/// images of both `X_i` and `Z_i` (in that order); the projector events
/// contribute the image of `Z_i`; deterministic errors contribute nothing
/// (they never constrain which observables survive).
pub fn propagate_errors(c: &CliffordCircuit, b: &ErrorConfiguration) -> PropagatedErrorSet {
    let n = c.n_qubits();
    let mut generators = Vec::new();
    let mut push = |p: PauliString| generators.push(p.without_phase());
    for site in b.sites() {
        let image = |op: crate::pauli::PauliOp| {
            c.conjugate_backward(&PauliString::single(n, site.qubit, op), site.layer)
        };
        match site.event {
            SiteEvent::Depolarize => {
                push(image(crate::pauli::PauliOp::X));
                push(image(crate::pauli::PauliOp::Z));
            }
            SiteEvent::ProjectZ | SiteEvent::XProjectZ => {
                push(image(crate::pauli::PauliOp::Z));
            }
            SiteEvent::FlipX | SiteEvent::DetZ | SiteEvent::DetY => {}
        }
    }
    let mut matrix = Gf2Matrix::new(2 * n);
    for g in &generators {
        matrix.push_row(g.symplectic_vector());
    }
    PropagatedErrorSet { generators, matrix }
}

/// Probability that a given observable survives every site of a depolarizing
/// model: `(1-gamma)` per qubit of support of each forward image, across all
/// `depth + 1` noise layers.
pub fn survival_probability(c: &CliffordCircuit, s: &PauliString, gamma: f64) -> f64 {
    let total: usize = c.weight_profile(s).iter().sum();
    (1.0 - gamma).powi(total as i32)
}
