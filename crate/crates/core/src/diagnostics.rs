//! Percolation analytics for the component structure the sampler induces:
//! coarse-grained sublattice graphs, Monte Carlo component-size statistics,
//! and evaluators for the closed-form depth thresholds and tail bounds the
//! statistics are compared against.

use std::collections::BTreeMap;

use crate::circuit::{CliffordCircuit, Geometry};
use crate::clifford_sampler::{decompose_shot, CircuitIndex};
use crate::exec::{run_indexed, ExecMode};
use crate::noise::{sample_error_configuration, NoiseModel};
use crate::rng::shot_rng;
use crate::Error;

// ---------------------------------------------------------------------------
// Sublattice coarse-graining.
// ---------------------------------------------------------------------------

/// The lattice cut into axis-aligned blocks of side `2d`, with king-move
/// adjacency (all Chebyshev-distance-1 neighbors, diagonals included).
/// Blocks on the boundary may be smaller when `2d` does not divide an
/// extent.
#[derive(Debug, Clone)]
pub struct SublatticeGraph {
    side: usize,
    block_extents: Vec<usize>,
    site_extents: Vec<usize>,
}

/// Cuts `geometry` into blocks of side `2d`. The block side is tied to the
/// circuit depth: gates reach at most `d` sites, so two qubits whose
/// forward lightcones intersect sit at most `2d` apart on every axis —
/// inside the same or adjacent blocks.
pub fn sublattice_graph(geometry: Option<&Geometry>, d: usize) -> Result<SublatticeGraph, Error> {
    let Some(g) = geometry else {
        return Err(Error::invalid("sublattice analysis needs a lattice geometry"));
    };
    if d == 0 {
        return Err(Error::invalid("sublattice side 2d needs depth d >= 1"));
    }
    let side = 2 * d;
    let block_extents = g.extents().iter().map(|&e| e.div_ceil(side)).collect();
    Ok(SublatticeGraph { side, block_extents, site_extents: g.extents().to_vec() })
}

impl SublatticeGraph {
    #[must_use]
    pub fn dim(&self) -> usize {
        self.block_extents.len()
    }

    #[must_use]
    pub fn side(&self) -> usize {
        self.side
    }

    #[must_use]
    pub fn n_blocks(&self) -> usize {
        self.block_extents.iter().product()
    }

    #[must_use]
    pub fn block_extents(&self) -> &[usize] {
        &self.block_extents
    }

    /// Block coordinates of a block index (row-major, axis 0 fastest).
    #[must_use]
    pub fn block_coords(&self, block: usize) -> Vec<usize> {
        assert!(block < self.n_blocks(), "block index out of range");
        let mut rem = block;
        self.block_extents
            .iter()
            .map(|&e| {
                let c = rem % e;
                rem /= e;
                c
            })
            .collect()
    }

    /// The block containing lattice site `q`.
    #[must_use]
    pub fn block_of(&self, q: usize) -> usize {
        let mut rem = q;
        let mut block = 0;
        let mut stride = 1;
        for (&site_e, &block_e) in self.site_extents.iter().zip(&self.block_extents) {
            let coord = rem % site_e;
            rem /= site_e;
            block += (coord / self.side) * stride;
            stride *= block_e;
        }
        block
    }

    /// Same or Chebyshev-distance-1 blocks.
    #[must_use]
    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        let (ca, cb) = (self.block_coords(a), self.block_coords(b));
        ca.iter().zip(&cb).all(|(&x, &y)| x.abs_diff(y) <= 1)
    }

    /// Neighbors of a block, the block itself excluded. At most `3^D - 1`.
    #[must_use]
    pub fn neighbors(&self, block: usize) -> Vec<usize> {
        let coords = self.block_coords(block);
        let mut out = Vec::new();
        let mut offsets = vec![-1i64; coords.len()];
        loop {
            if offsets.iter().any(|&o| o != 0) {
                let mut ok = true;
                let mut idx = 0usize;
                let mut stride = 1usize;
                for (k, (&c, &e)) in coords.iter().zip(&self.block_extents).enumerate() {
                    let v = c as i64 + offsets[k];
                    if v < 0 || v >= e as i64 {
                        ok = false;
                        break;
                    }
                    idx += v as usize * stride;
                    stride *= e;
                }
                if ok {
                    out.push(idx);
                }
            }
            // Odometer over {-1, 0, 1}^D.
            let mut k = 0;
            loop {
                if k == offsets.len() {
                    out.sort_unstable();
                    return out;
                }
                offsets[k] += 1;
                if offsets[k] <= 1 {
                    break;
                }
                offsets[k] = -1;
                k += 1;
            }
        }
    }

    /// Whether a set of blocks is connected under the adjacency.
    #[must_use]
    pub fn blocks_connected(&self, blocks: &[usize]) -> bool {
        if blocks.len() <= 1 {
            return true;
        }
        let mut todo = vec![blocks[0]];
        let mut seen = vec![false; self.n_blocks()];
        let mut member = vec![false; self.n_blocks()];
        for &b in blocks {
            member[b] = true;
        }
        seen[blocks[0]] = true;
        while let Some(b) = todo.pop() {
            for nb in self.neighbors(b) {
                if member[nb] && !seen[nb] {
                    seen[nb] = true;
                    todo.push(nb);
                }
            }
        }
        blocks.iter().all(|&b| seen[b])
    }
}

// ---------------------------------------------------------------------------
// Component-size Monte Carlo.
// ---------------------------------------------------------------------------

/// One surviving component of one trial.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrialComponent {
    pub trial: u64,
    pub component: usize,
    pub size: usize,
    /// Number of distinct sublattice blocks holding the component's
    /// non-depolarized qubits.
    pub span: usize,
}

/// Empirical component-size data over independent noise realizations.
#[derive(Debug, Clone)]
pub struct ComponentSizeStats {
    pub n_qubits: usize,
    pub noise_layers: usize,
    pub depth: usize,
    pub trials: u64,
    /// One row per component per trial.
    pub rows: Vec<TrialComponent>,
    /// Per-trial largest component size, 0 when everything died.
    pub max_sizes: Vec<usize>,
    /// Count of components by exact size, across all trials.
    pub size_histogram: BTreeMap<usize, u64>,
}

impl ComponentSizeStats {
    /// Fraction of trials whose largest component reaches `x`.
    #[must_use]
    pub fn exceedance(&self, x: usize) -> f64 {
        if self.trials == 0 {
            return 0.0;
        }
        let hits = self.max_sizes.iter().filter(|&&m| m >= x).count();
        hits as f64 / self.trials as f64
    }

    /// Mean number of surviving components per trial.
    #[must_use]
    pub fn mean_components(&self) -> f64 {
        if self.trials == 0 {
            return 0.0;
        }
        self.rows.len() as f64 / self.trials as f64
    }

    /// Per-component CSV: `trial,component,size,span`.
    #[must_use]
    pub fn rows_csv(&self) -> String {
        let mut out = String::from("trial,component,size,span\n");
        for r in &self.rows {
            out.push_str(&format!("{},{},{},{}\n", r.trial, r.component, r.size, r.span));
        }
        out
    }

    /// Exceedance-curve CSV: `x,empirical,bound`, probing every size up to
    /// the observed maximum (plus one step beyond), with the tail bound
    /// evaluated for block side `2d`, dimension `dim`.
    #[must_use]
    pub fn exceedance_csv(&self, d: usize, dim: usize) -> String {
        let mut out = String::from("x,empirical,bound\n");
        let top = self.max_sizes.iter().copied().max().unwrap_or(0) + 1;
        for x in 1..=top {
            let bound =
                component_tail_bound(self.n_qubits, self.noise_layers, x as f64, d, dim);
            out.push_str(&format!(
                "{x},{},{}\n",
                fmt_float(self.exceedance(x)),
                fmt_float(bound)
            ));
        }
        out
    }
}

fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Runs `trials` independent noise realizations of `c` and records every
/// surviving component's size and sublattice span. Trials use per-index RNG
/// streams, so the result is independent of scheduling.
pub fn component_size_stats(
    c: &CliffordCircuit,
    model: &NoiseModel,
    trials: u64,
    seed: u64,
) -> Result<ComponentSizeStats, Error> {
    let graph = sublattice_graph(c.geometry(), c.depth())?;
    let index = CircuitIndex::new(c);
    let per_trial: Vec<Vec<(usize, usize)>> =
        run_indexed(ExecMode::Parallel, trials as usize, |t| {
            let mut rng = shot_rng(seed, t as u64);
            let b = sample_error_configuration(&mut rng, c.n_qubits(), c.depth(), model);
            let dec = decompose_shot(&index, &b, u32::MAX);
            dec.regions
                .iter()
                .map(|(qubits, _)| {
                    let mut blocks: Vec<usize> = qubits
                        .iter()
                        .filter(|&&q| !dec.depolarized[q])
                        .map(|&q| graph.block_of(q))
                        .collect();
                    blocks.sort_unstable();
                    blocks.dedup();
                    (qubits.len(), blocks.len())
                })
                .collect()
        });
    let mut rows = Vec::new();
    let mut max_sizes = Vec::with_capacity(trials as usize);
    let mut size_histogram = BTreeMap::new();
    for (t, comps) in per_trial.into_iter().enumerate() {
        let mut max = 0;
        for (id, (size, span)) in comps.into_iter().enumerate() {
            max = max.max(size);
            *size_histogram.entry(size).or_insert(0u64) += 1;
            rows.push(TrialComponent { trial: t as u64, component: id, size, span });
        }
        max_sizes.push(max);
    }
    Ok(ComponentSizeStats {
        n_qubits: c.n_qubits(),
        noise_layers: c.depth() + 1,
        depth: c.depth(),
        trials,
        rows,
        max_sizes,
        size_histogram,
    })
}

// ---------------------------------------------------------------------------
// Closed-form bounds.
// ---------------------------------------------------------------------------

/// Tail bound `min(1, n · L · e^{-x / (2d)^dim})` on the probability that
/// any component reaches size `x`, with `L` the caller's noise-layer count.
#[must_use]
pub fn component_tail_bound(n: usize, layers: usize, x: f64, d: usize, dim: usize) -> f64 {
    let cell = (2 * d) as f64;
    let bound = (n * layers) as f64 * (-x / cell.powi(dim as i32)).exp();
    bound.min(1.0)
}

/// Bound `L · e^{3 (1-γ)^L · size}` on the expected number of surviving
/// observables over a region of the given size, with `L` noise layers.
#[must_use]
pub fn expected_group_size_bound(d_layers: usize, gamma: f64, size: usize) -> f64 {
    d_layers as f64 * (3.0 * (1.0 - gamma).powi(d_layers as i32) * size as f64).exp()
}

/// The explicit depth thresholds: two closed-form conditions for the local
/// (geometry-respecting) regime and the instantiated threshold for the
/// all-to-all regime.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DepthThresholds {
    /// `ceil(γ^{-1} · 4·3^D · (3^D ln 2 + 2))`.
    pub local_primary: u64,
    /// Smallest integer d with `3 (24 D / γ)^D e^{-γ d / 4} ≤ 1`.
    pub local_secondary: u64,
    /// Both local conditions: `max` of the two.
    pub local: u64,
    /// Smallest d ≥ 1 with `3 (1-γ)^d · n ≤ ln n`.
    pub non_local: u64,
}

/// Evaluates the closed-form depth thresholds for noise rate `gamma`,
/// lattice dimension `dim`, and width `n`. Accepts `gamma = 1` as the
/// limiting case `(1-γ) = 0`.
pub fn depth_thresholds(gamma: f64, dim: usize, n: usize) -> Result<DepthThresholds, Error> {
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::invalid(format!(
            "depth thresholds need a noise rate in (0, 1], got {gamma}"
        )));
    }
    if dim == 0 {
        return Err(Error::invalid("lattice dimension must be at least 1"));
    }
    let pow3 = 3f64.powi(dim as i32);
    let local_primary = ((4.0 * pow3) * (pow3 * std::f64::consts::LN_2 + 2.0) / gamma).ceil();
    let local_secondary =
        ((4.0 / gamma) * (3.0 * (24.0 * dim as f64 / gamma).powi(dim as i32)).ln()).ceil();
    let local_secondary = local_secondary.max(1.0);
    let non_local = non_local_threshold(gamma, n)?;
    let local_primary = local_primary as u64;
    let local_secondary = local_secondary as u64;
    Ok(DepthThresholds {
        local_primary,
        local_secondary,
        local: local_primary.max(local_secondary),
        non_local,
    })
}

fn non_local_threshold(gamma: f64, n: usize) -> Result<u64, Error> {
    if n == 0 {
        return Err(Error::invalid("qubit count must be at least 1"));
    }
    let target = (n as f64).ln();
    if gamma >= 1.0 {
        return Ok(1); // (1-γ)^d = 0 and 0 ≤ ln n for every n ≥ 1
    }
    if n == 1 {
        return Err(Error::invalid(
            "the all-to-all threshold needs n ≥ 2 (ln 1 = 0 is unreachable)",
        ));
    }
    // 3 (1-γ)^d n ≤ ln n  ⟺  d ≥ ln(3n / ln n) / ln(1/(1-γ)).
    let guess = ((3.0 * n as f64 / target).ln() / (1.0 / (1.0 - gamma)).ln()).ceil();
    let mut d = (guess.max(1.0)) as u64;
    let satisfied = |d: u64| 3.0 * (1.0 - gamma).powi(d as i32) * n as f64 <= target;
    while d > 1 && satisfied(d - 1) {
        d -= 1;
    }
    while !satisfied(d) {
        d += 1;
    }
    Ok(d)
}
