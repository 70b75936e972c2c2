//! The built-in verification suite: ten numbered end-to-end checks pairing
//! the samplers against the dense oracles and the closed-form bounds. The
//! CLI `verify` subcommand and the acceptance test both drive
//! [`run_all_criteria`], so there is exactly one definition of "passing".

use std::time::Instant;

use crate::circuit::{canonicalize_conjugated_clifford, MeasurementBasis};
use crate::clifford_sampler::{
    decompose_shot, full_distribution, run_shots, CircuitIndex, SamplerConfig,
};
use crate::diagnostics::{component_size_stats, component_tail_bound, expected_group_size_bound};
use crate::exec::{run_indexed, ExecMode};
use crate::gf2::BitVector;
use crate::iqp_sampler::{group_coset_states, iqp_config_distribution, run_iqp_shots};
use crate::noise::{sample_error_configuration, ErrorConfiguration, NoiseModel};
use crate::oracle::{
    anticoncentration_bound, collision_probability, enumerate_s_w, exact_ccc_distribution,
    exact_iqp_distribution, exact_noisy_distribution, DensityMatrix,
};
use crate::report::write_report_csv;
use crate::rng::{shot_rng, uniform_f64};
use crate::smallmat::{C, ZERO};
use crate::synth::{
    brickwork_1d, random_bloch_rotation, random_clifford_circuit, random_iqp_circuit,
    random_measurement_basis, random_pauli_string, random_product_state, random_subset,
    random_x_group,
};
use crate::Error;
use rand_chacha::ChaCha8Rng;

/// Which workload size the suite runs at. `Full` is the release gate;
/// `Quick` shrinks every Monte Carlo count for fast iteration and CLI
/// round-trip tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Profile {
    Full,
    Quick,
}

/// Outcome of one numbered criterion.
#[derive(Debug, Clone)]
pub struct CriterionResult {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    /// The quantity the criterion compares (deviation, z-score, ratio,
    /// seconds — see `details`).
    pub measured: f64,
    /// The threshold `measured` is held against.
    pub bound: f64,
    pub seconds: f64,
    pub details: String,
}

/// Monte Carlo workload sizes for one profile.
struct Scale {
    c1_circuits: usize,
    c1_configs: usize,
    c2_configs: usize,
    c3_fixed_circuits: usize,
    c3_fixed_configs: usize,
    c3_configs: usize,
    c3_groups: usize,
    c4_pairs: usize,
    c4_configs: usize,
    c5_circuits: usize,
    c5_regions_each: usize,
    c6_configs: usize,
    c6_depths: &'static [usize],
    c7_trials: u64,
    c7_sizes: &'static [usize],
    c8_circuits: usize,
    c9_circuits: usize,
    c9_configs: usize,
    c10_perf_n: usize,
    c10_perf_depth: usize,
    c10_perf_shots: u64,
    c10_det_n: usize,
    c10_det_depth: usize,
    c10_det_shots: u64,
}

impl Scale {
    fn for_profile(profile: Profile) -> Self {
        match profile {
            Profile::Full => Scale {
                c1_circuits: 50,
                c1_configs: 20,
                c2_configs: 10_000,
                c3_fixed_circuits: 20,
                c3_fixed_configs: 10,
                c3_configs: 10_000,
                c3_groups: 100,
                c4_pairs: 100,
                c4_configs: 100_000,
                c5_circuits: 6,
                c5_regions_each: 5,
                c6_configs: 1_000,
                c6_depths: &[8, 16],
                c7_trials: 2_000,
                c7_sizes: &[128, 256, 512],
                c8_circuits: 20,
                c9_circuits: 20,
                c9_configs: 3,
                c10_perf_n: 4096,
                c10_perf_depth: 16,
                c10_perf_shots: 100,
                c10_det_n: 256,
                c10_det_depth: 8,
                c10_det_shots: 40,
            },
            Profile::Quick => Scale {
                c1_circuits: 8,
                c1_configs: 5,
                c2_configs: 1_500,
                c3_fixed_circuits: 5,
                c3_fixed_configs: 4,
                c3_configs: 1_500,
                c3_groups: 20,
                c4_pairs: 12,
                c4_configs: 20_000,
                c5_circuits: 2,
                c5_regions_each: 5,
                c6_configs: 200,
                c6_depths: &[8],
                c7_trials: 300,
                c7_sizes: &[64, 128],
                c8_circuits: 6,
                c9_circuits: 6,
                c9_configs: 2,
                c10_perf_n: 512,
                c10_perf_depth: 8,
                c10_perf_shots: 30,
                c10_det_n: 96,
                c10_det_depth: 4,
                c10_det_shots: 20,
            },
        }
    }
}

/// Per-criterion seed derivation, so criteria draw from disjoint streams.
fn sub_seed(seed: u64, id: usize) -> u64 {
    seed.wrapping_add((id as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

fn pick_range(rng: &mut ChaCha8Rng, lo: usize, hi_inclusive: usize) -> usize {
    let span = hi_inclusive - lo + 1;
    lo + ((uniform_f64(rng) * span as f64) as usize).min(span - 1)
}

fn max_abs_dev(p: &[f64], q: &[f64]) -> f64 {
    p.iter().zip(q).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

/// Runs all ten criteria at the given profile. Returns `Err` only on
/// internal failures (caps, tolerance violations); a criterion that merely
/// misses its bound comes back with `passed: false`.
pub fn run_all_criteria(profile: Profile, seed: u64) -> Result<Vec<CriterionResult>, Error> {
    run_all_criteria_with(profile, seed, false)
}

/// Like [`run_all_criteria`], with an optional deliberate perturbation of
/// criterion 1 so harness plumbing (nonzero exits, failure reporting) can be
/// exercised end to end.
pub fn run_all_criteria_with(
    profile: Profile,
    seed: u64,
    inject_fault: bool,
) -> Result<Vec<CriterionResult>, Error> {
    let s = Scale::for_profile(profile);
    let runners: Vec<(usize, &'static str, CriterionFn)> = vec![
        (1, "clifford fixed-config exactness", Box::new(move |sc, sd| c1_fixed_config(sc, sd, inject_fault))),
        (2, "clifford channel-level exactness", Box::new(c2_channel_level)),
        (3, "diagonal-path exactness and group mixture", Box::new(c3_diagonal_path)),
        (4, "survival-probability law", Box::new(c4_survival_law)),
        (5, "weight-census counting bound", Box::new(c5_census_bound)),
        (6, "expected group size bound", Box::new(c6_group_size)),
        (7, "component-size percolation", Box::new(c7_percolation)),
        (8, "anticoncentration bound", Box::new(c8_anticoncentration)),
        (9, "conjugated-circuit reduction", Box::new(c9_conjugated)),
        (10, "determinism and throughput", Box::new(c10_determinism_perf)),
    ];
    let mut out = Vec::with_capacity(runners.len());
    for (id, name, run) in runners {
        let started = Instant::now();
        let (passed, measured, bound, details) = run(&s, sub_seed(seed, id))?;
        out.push(CriterionResult {
            id,
            name,
            passed,
            measured,
            bound,
            seconds: started.elapsed().as_secs_f64(),
            details,
        });
    }
    Ok(out)
}

type CriterionOutcome = Result<(bool, f64, f64, String), Error>;
type CriterionFn = Box<dyn Fn(&Scale, u64) -> CriterionOutcome>;

/// Machine-readable suite report. Fields are semicolon-free except
/// `details`, which never contains commas.
#[must_use]
pub fn render_verify_csv(results: &[CriterionResult]) -> String {
    let mut out = String::from("id,name,passed,measured,bound,seconds,details\n");
    for r in results {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.id,
            r.name,
            r.passed,
            crate::report::csv_f64(r.measured),
            crate::report::csv_f64(r.bound),
            crate::report::csv_f64(r.seconds),
            r.details,
        ));
    }
    out
}

// ---------------------------------------------------------------------------
// Criterion 1: per-configuration distributions match the dense oracle.
// ---------------------------------------------------------------------------

fn c1_fixed_config(s: &Scale, seed: u64, inject_fault: bool) -> CriterionOutcome {
    let model = NoiseModel::depolarizing(0.3)?;
    let mut rng = shot_rng(seed, 0);
    let mut worst = 0.0f64;
    for _ in 0..s.c1_circuits {
        let n = pick_range(&mut rng, 2, 4);
        let d = pick_range(&mut rng, 1, 4);
        let c = random_clifford_circuit(&mut rng, n, d)?
            .with_input(random_product_state(&mut rng, n))?
            .with_measurement(random_measurement_basis(&mut rng, n))?;
        let rho = DensityMatrix::from_product(c.input())?;
        for _ in 0..s.c1_configs {
            let b = sample_error_configuration(&mut rng, n, d, &model);
            let got = full_distribution(&c, c.input(), c.measurement(), &b, 64)?;
            let want = exact_noisy_distribution(&c, &rho, c.measurement(), &model, Some(&b))?;
            worst = worst.max(max_abs_dev(&got, &want));
        }
    }
    let mut details = format!(
        "worst per-outcome deviation over {} circuits x {} configs",
        s.c1_circuits, s.c1_configs
    );
    if inject_fault {
        worst += 2e-9;
        details.push_str("; deliberate 2e-9 perturbation injected");
    }
    Ok((worst < 1e-9, worst, 1e-9, details))
}

// ---------------------------------------------------------------------------
// Criterion 2: configuration averages reproduce the CPTP channel.
// ---------------------------------------------------------------------------

/// Averages `dists[k]` over k and z-scores the result against `exact`,
/// flooring the standard error to dodge zero-variance outcomes.
fn max_z_score(dists: &[Vec<f64>], exact: &[f64]) -> f64 {
    let count = dists.len() as f64;
    let mut worst = 0.0f64;
    for (x, &e) in exact.iter().enumerate() {
        let sum: f64 = dists.iter().map(|d| d[x]).sum();
        let mean = sum / count;
        let var: f64 = dists.iter().map(|d| (d[x] - mean).powi(2)).sum::<f64>() / (count - 1.0);
        let sigma = (var / count).sqrt().max(1e-12);
        worst = worst.max((mean - e).abs() / sigma);
    }
    worst
}

fn c2_channel_level(s: &Scale, seed: u64) -> CriterionOutcome {
    let mut worst = 0.0f64;
    for (gi, gamma) in [0.1, 0.3, 0.7].into_iter().enumerate() {
        let model = NoiseModel::depolarizing(gamma)?;
        let mut rng = shot_rng(seed, gi as u64);
        let n = pick_range(&mut rng, 3, 4);
        let d = pick_range(&mut rng, 3, 4);
        let c = random_clifford_circuit(&mut rng, n, d)?
            .with_input(random_product_state(&mut rng, n))?
            .with_measurement(random_measurement_basis(&mut rng, n))?;
        let rho = DensityMatrix::from_product(c.input())?;
        let exact = exact_noisy_distribution(&c, &rho, c.measurement(), &model, None)?;
        let dists: Result<Vec<Vec<f64>>, Error> =
            run_indexed(ExecMode::Parallel, s.c2_configs, |k| {
                let mut rng = shot_rng(seed, 1000 + (gi * s.c2_configs + k) as u64);
                let b = sample_error_configuration(&mut rng, n, d, &model);
                full_distribution(&c, c.input(), c.measurement(), &b, 64)
            })
            .into_iter()
            .collect();
        worst = worst.max(max_z_score(&dists?, &exact));
    }
    let details = format!(
        "max per-outcome z-score of the {}-config average vs the channel oracle at rates 0.1/0.3/0.7",
        s.c2_configs
    );
    Ok((worst <= 3.0, worst, 3.0, details))
}

// ---------------------------------------------------------------------------
// Criterion 3: the diagonal path repeats 1-2, plus the group-mixture
// identity behind its input conversion.
// ---------------------------------------------------------------------------

fn c3_diagonal_path(s: &Scale, seed: u64) -> CriterionOutcome {
    // Part 1: fixed configurations, depolarizing and dephasing alternating.
    let mut rng = shot_rng(seed, 0);
    let mut worst_fixed = 0.0f64;
    for i in 0..s.c3_fixed_circuits {
        let n = pick_range(&mut rng, 3, 6);
        let d = pick_range(&mut rng, 1, 4);
        let c = random_iqp_circuit(&mut rng, n, d, i % 2 == 0)?;
        let model = if i % 2 == 0 {
            NoiseModel::depolarizing(0.3)?
        } else {
            NoiseModel::pauli(0.0, 0.0, 0.2)?
        };
        let eff = model.as_pauli_channel();
        for _ in 0..s.c3_fixed_configs {
            let b = sample_error_configuration(&mut rng, n, d, &eff);
            let got = iqp_config_distribution(&c, &b, 64)?;
            let want = exact_iqp_distribution(&c, &model, Some(&b))?;
            worst_fixed = worst_fixed.max(max_abs_dev(&got, &want));
        }
    }

    // Part 2: channel-level averages for both noise kinds.
    let mut worst_z = 0.0f64;
    for (mi, model) in
        [NoiseModel::depolarizing(0.25)?, NoiseModel::pauli(0.0, 0.0, 0.2)?].into_iter().enumerate()
    {
        let mut rng = shot_rng(seed, 10 + mi as u64);
        let n = pick_range(&mut rng, 4, 6);
        let d = pick_range(&mut rng, 2, 4);
        let c = random_iqp_circuit(&mut rng, n, d, mi == 0)?;
        let eff = model.as_pauli_channel();
        let exact = exact_iqp_distribution(&c, &model, None)?;
        let dists: Result<Vec<Vec<f64>>, Error> =
            run_indexed(ExecMode::Parallel, s.c3_configs, |k| {
                let mut rng = shot_rng(seed, 5000 + (mi * s.c3_configs + k) as u64);
                let b = sample_error_configuration(&mut rng, n, d, &eff);
                iqp_config_distribution(&c, &b, 64)
            })
            .into_iter()
            .collect();
        worst_z = worst_z.max(max_z_score(&dists?, &exact));
    }

    // Part 3: coset states average to the group's Pauli mixture.
    let mut rng = shot_rng(seed, 20);
    let mut worst_entry = 0.0f64;
    for _ in 0..s.c3_groups {
        let n = pick_range(&mut rng, 1, 6);
        let gens = random_x_group(&mut rng, n, n);
        let dim = 1usize << n;
        let states = group_coset_states(&gens, n);
        let weight = 1.0 / states.len() as f64;
        let mut avg = vec![ZERO; dim * dim];
        for st in &states {
            for &(ka, aa) in st {
                for &(kb, ab) in st {
                    avg[ka as usize * dim + kb as usize] += aa * ab.conj() * weight;
                }
            }
        }
        let scale = 1.0 / dim as f64;
        let mut want = vec![ZERO; dim * dim];
        for v in crate::clifford_sampler::enumerate_group(&gens) {
            let mut vm = 0usize;
            for b in v.iter_ones() {
                vm |= 1 << b;
            }
            for a in 0..dim {
                want[(a ^ vm) * dim + a] += C::new(scale, 0.0);
            }
        }
        let dev = avg
            .iter()
            .zip(&want)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max);
        worst_entry = worst_entry.max(dev);
    }

    let passed = worst_fixed < 1e-9 && worst_z <= 3.0 && worst_entry < 1e-12;
    let details = format!(
        "fixed-config dev {:.3e} (<1e-9); channel z {:.3} (<=3); group-mixture entry dev {:.3e} (<1e-12) over {} groups",
        worst_fixed, worst_z, worst_entry, s.c3_groups
    );
    // Headline number: the fixed-config deviation, the strictest of the three.
    Ok((passed, worst_fixed, 1e-9, details))
}

// ---------------------------------------------------------------------------
// Criterion 4: the closed-form survival probability matches frequency.
// ---------------------------------------------------------------------------

fn c4_survival_law(s: &Scale, seed: u64) -> CriterionOutcome {
    let gammas = [0.05, 0.1, 0.2];
    let zs: Result<Vec<f64>, Error> = run_indexed(ExecMode::Parallel, s.c4_pairs, |pair| {
        let mut rng = shot_rng(seed, pair as u64);
        let n = pick_range(&mut rng, 3, 6);
        let d = pick_range(&mut rng, 1, 4);
        let c = random_clifford_circuit(&mut rng, n, d)?;
        let s_obs = loop {
            let cand = random_pauli_string(&mut rng, n);
            if !cand.is_identity_up_to_phase() {
                break cand;
            }
        };
        let gamma = gammas[pair % gammas.len()];
        let model = NoiseModel::depolarizing(gamma)?;
        let p = crate::noise::survival_probability(&c, &s_obs, gamma);
        let supports: Vec<BitVector> =
            (0..=d).map(|t| c.conjugate_forward(&s_obs, t).support()).collect();
        let mut hits = 0u64;
        for _ in 0..s.c4_configs {
            let b = sample_error_configuration(&mut rng, n, d, &model);
            if b.sites().iter().all(|site| !supports[site.layer].get(site.qubit)) {
                hits += 1;
            }
        }
        let f = hits as f64 / s.c4_configs as f64;
        let sigma = (p * (1.0 - p) / s.c4_configs as f64).sqrt().max(1e-12);
        Ok((f - p).abs() / sigma)
    })
    .into_iter()
    .collect();
    let worst = zs?.into_iter().fold(0.0, f64::max);
    let details = format!(
        "max z-score of empirical survival frequency vs (1-rate)^total-weight over {} pairs x {} configs",
        s.c4_pairs, s.c4_configs
    );
    Ok((worst <= 3.0, worst, 3.0, details))
}

// ---------------------------------------------------------------------------
// Criterion 5: the weight-census size never beats its counting bound.
// ---------------------------------------------------------------------------

fn binom(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc = 1u64;
    for i in 0..k {
        acc = acc * (n - i) as u64 / (i + 1) as u64;
    }
    acc
}

fn c5_census_bound(s: &Scale, seed: u64) -> CriterionOutcome {
    let mut rng = shot_rng(seed, 0);
    let mut worst_ratio = 0.0f64;
    let mut regions = 0usize;
    for _ in 0..s.c5_circuits {
        let n = pick_range(&mut rng, 3, 5);
        let d = pick_range(&mut rng, 1, 4);
        let c = random_clifford_circuit(&mut rng, n, d)?;
        let layers = (d + 1) as u64;
        for _ in 0..s.c5_regions_each {
            let size = pick_range(&mut rng, 1, n);
            let region = random_subset(&mut rng, n, size);
            regions += 1;
            for w in 0..=size {
                let census = enumerate_s_w(&c, &region, w)?;
                let bound = (layers * binom(size, w) * 3u64.pow(w as u32)) as f64;
                if bound > 0.0 {
                    worst_ratio = worst_ratio.max(census.count as f64 / bound);
                }
            }
        }
    }
    let details = format!(
        "max census-to-bound ratio over {regions} regions, every weight; 1.0 means the bound is tight"
    );
    Ok((worst_ratio <= 1.0, worst_ratio, 1.0, details))
}

// ---------------------------------------------------------------------------
// Criterion 6: mean component group size stays under its bound.
// ---------------------------------------------------------------------------

fn c6_group_size(s: &Scale, seed: u64) -> CriterionOutcome {
    let gamma = 0.4;
    let model = NoiseModel::depolarizing(gamma)?;
    let mut worst_z = f64::NEG_INFINITY;
    let mut detail_parts = Vec::new();
    for (di, &d) in s.c6_depths.iter().enumerate() {
        let mut rng = shot_rng(seed, di as u64);
        let c = brickwork_1d(&mut rng, 64, d)?;
        let index = CircuitIndex::new(&c);
        let layers = d + 1;
        let per_config: Vec<Vec<(f64, f64)>> =
            run_indexed(ExecMode::Parallel, s.c6_configs, |k| {
                let mut rng = shot_rng(seed, 100 + (di * s.c6_configs + k) as u64);
                let b = sample_error_configuration(&mut rng, 64, d, &model);
                let dec = decompose_shot(&index, &b, u32::MAX);
                dec.stats
                    .components
                    .iter()
                    .map(|cs| {
                        (2f64.powi(cs.rank as i32), expected_group_size_bound(layers, gamma, cs.size))
                    })
                    .collect()
            });
        let pairs: Vec<(f64, f64)> = per_config.into_iter().flatten().collect();
        let count = pairs.len() as f64;
        if pairs.is_empty() {
            detail_parts.push(format!("depth {d}: no surviving components"));
            continue;
        }
        let mean_x: f64 = pairs.iter().map(|p| p.0).sum::<f64>() / count;
        let mean_b: f64 = pairs.iter().map(|p| p.1).sum::<f64>() / count;
        let var: f64 =
            pairs.iter().map(|p| (p.0 - mean_x).powi(2)).sum::<f64>() / (count - 1.0).max(1.0);
        let sigma = (var / count).sqrt().max(1e-12);
        let z = (mean_x - mean_b) / sigma;
        worst_z = worst_z.max(z);
        detail_parts.push(format!(
            "depth {d}: mean group size {mean_x:.3} vs bound {mean_b:.3} ({} components)",
            pairs.len()
        ));
    }
    let details = detail_parts.join("; ");
    Ok((worst_z <= 3.0, worst_z, 3.0, details))
}

// ---------------------------------------------------------------------------
// Criterion 7: component sizes stay sublinear and under the tail bound.
// ---------------------------------------------------------------------------

fn c7_percolation(s: &Scale, seed: u64) -> CriterionOutcome {
    let d = 12usize;
    let model = NoiseModel::depolarizing(0.5)?;
    let mut means = Vec::new();
    let mut sigmas = Vec::new();
    let mut worst_excess = f64::NEG_INFINITY;
    let mut detail_parts = Vec::new();
    for (si, &n) in s.c7_sizes.iter().enumerate() {
        let mut rng = shot_rng(seed, si as u64);
        let c = brickwork_1d(&mut rng, n, d)?;
        let stats = component_size_stats(&c, &model, s.c7_trials, sub_seed(seed, 70 + si))?;
        let count = s.c7_trials as f64;
        let mean: f64 = stats.max_sizes.iter().map(|&m| m as f64).sum::<f64>() / count;
        let var: f64 = stats
            .max_sizes
            .iter()
            .map(|&m| (m as f64 - mean).powi(2))
            .sum::<f64>()
            / (count - 1.0);
        means.push(mean);
        sigmas.push((var / count).sqrt());
        // Tail: empirical exceedance never beats the bound by more than 3
        // standard errors at any probed size.
        let top = stats.max_sizes.iter().copied().max().unwrap_or(0);
        for x in 1..=top {
            let emp = stats.exceedance(x);
            let bound = component_tail_bound(n, d + 1, x as f64, d, 1);
            let sigma = (emp * (1.0 - emp) / count).sqrt();
            worst_excess = worst_excess.max(emp - bound - 3.0 * sigma);
        }
        detail_parts.push(format!("n={n}: mean max {mean:.2}"));
    }
    // Sublinearity, allowing 3-sigma Monte Carlo slack: each doubling grows
    // the mean max by less than 2^0.9, and the whole sweep by less than
    // 2.64 (~4^0.7).
    for i in 1..means.len() {
        let factor = 2f64.powf(0.9);
        let slack = 3.0 * (sigmas[i].powi(2) + (factor * sigmas[i - 1]).powi(2)).sqrt();
        worst_excess = worst_excess.max(means[i] - factor * means[i - 1] - slack);
    }
    if means.len() >= 2 {
        let overall = 2.64;
        let last = means.len() - 1;
        let slack = 3.0 * (sigmas[last].powi(2) + (overall * sigmas[0]).powi(2)).sqrt();
        worst_excess = worst_excess.max(means[last] - overall * means[0] - slack);
    }
    let details = format!(
        "{}; worst bound excess after 3-sigma slack (<=0 passes)",
        detail_parts.join("; ")
    );
    Ok((worst_excess <= 1e-9, worst_excess, 0.0, details))
}

// ---------------------------------------------------------------------------
// Criterion 8: exact collision probability respects the closed-form bound.
// ---------------------------------------------------------------------------

fn c8_anticoncentration(s: &Scale, seed: u64) -> CriterionOutcome {
    let n = 3;
    let d = 10;
    let layers = d + 1;
    let basis = MeasurementBasis::all_z(n);
    let mut rng = shot_rng(seed, 0);
    let mut worst_ratio = 0.0f64;
    let bound = anticoncentration_bound(n, layers, 0.2);
    let model = NoiseModel::depolarizing(0.2)?;
    let mut first_circuit = None;
    for i in 0..s.c8_circuits {
        let c = random_clifford_circuit(&mut rng, n, d)?;
        let cp = collision_probability(&c, &model, &basis)?;
        worst_ratio = worst_ratio.max(cp / bound);
        if i == 0 {
            first_circuit = Some(c);
        }
    }
    // Full depolarization flattens everything: the collision probability
    // must hit 2^{-n} on the nose.
    let c = first_circuit.expect("at least one circuit");
    let cp1 = collision_probability(&c, &NoiseModel::depolarizing(1.0)?, &basis)?;
    let uniform_dev = (cp1 - 0.125f64).abs();
    let passed = worst_ratio <= 1.0 && uniform_dev < 1e-12;
    let details = format!(
        "max collision/bound ratio over {} circuits; full-noise uniform deviation {:.2e}",
        s.c8_circuits, uniform_dev
    );
    Ok((passed, worst_ratio, 1.0, details))
}

// ---------------------------------------------------------------------------
// Criterion 9: the basis-change rewrite of conjugated runs is exact.
// ---------------------------------------------------------------------------

fn c9_conjugated(s: &Scale, seed: u64) -> CriterionOutcome {
    let model = NoiseModel::depolarizing(0.3)?;
    let mut rng = shot_rng(seed, 0);
    let mut worst = 0.0f64;
    for _ in 0..s.c9_circuits {
        let n = pick_range(&mut rng, 2, 4);
        let d = pick_range(&mut rng, 1, 4);
        let u = random_bloch_rotation(&mut rng);
        let c = random_clifford_circuit(&mut rng, n, d)?;
        let (inner, input, basis) = canonicalize_conjugated_clifford(&u, &c);
        for k in 0..s.c9_configs {
            let b = if k == 0 {
                ErrorConfiguration::empty()
            } else {
                sample_error_configuration(&mut rng, n, d, &model)
            };
            let got = full_distribution(&inner, &input, &basis, &b, 64)?;
            let want = exact_ccc_distribution(&u, &c, &model, Some(&b))?;
            worst = worst.max(max_abs_dev(&got, &want));
        }
    }
    let details = format!(
        "worst per-outcome deviation between the rewritten pipeline and the direct conjugated oracle over {} circuits",
        s.c9_circuits
    );
    Ok((worst < 1e-9, worst, 1e-9, details))
}

// ---------------------------------------------------------------------------
// Criterion 10: byte-identical reports across scheduling, and raw speed.
// ---------------------------------------------------------------------------

fn c10_determinism_perf(s: &Scale, seed: u64) -> CriterionOutcome {
    let model = NoiseModel::depolarizing(0.5)?;
    // Determinism across scheduling, both pipelines.
    let mut rng = shot_rng(seed, 0);
    let det = brickwork_1d(&mut rng, s.c10_det_n, s.c10_det_depth)?;
    let mut seq_cfg = SamplerConfig::new(s.c10_det_shots, seed);
    seq_cfg.exec = ExecMode::Sequential;
    let par_cfg = SamplerConfig::new(s.c10_det_shots, seed);
    let mut seq_csv = Vec::new();
    write_report_csv(&mut seq_csv, &run_shots(&det, &model, &seq_cfg)?)?;
    let mut par_csv = Vec::new();
    write_report_csv(&mut par_csv, &run_shots(&det, &model, &par_cfg)?)?;
    let clifford_identical = seq_csv == par_csv;

    let iqp = random_iqp_circuit(&mut rng, s.c10_det_n / 2, s.c10_det_depth, true)?;
    let iqp_model = NoiseModel::depolarizing(0.3)?;
    let mut seq_csv = Vec::new();
    write_report_csv(&mut seq_csv, &run_iqp_shots(&iqp, &iqp_model, &seq_cfg)?)?;
    let mut par_csv = Vec::new();
    write_report_csv(&mut par_csv, &run_iqp_shots(&iqp, &iqp_model, &par_cfg)?)?;
    let iqp_identical = seq_csv == par_csv;

    // Throughput smoke at scale, no aborts allowed.
    let big = brickwork_1d(&mut rng, s.c10_perf_n, s.c10_perf_depth)?;
    let big_cfg = SamplerConfig::new(s.c10_perf_shots, seed.wrapping_add(1));
    let started = Instant::now();
    let records = run_shots(&big, &model, &big_cfg)?;
    let elapsed = started.elapsed().as_secs_f64();
    let aborts = records.iter().filter(|r| r.aborted).count();

    let passed = clifford_identical && iqp_identical && elapsed < 60.0 && aborts == 0;
    let details = format!(
        "scheduling-identical reports: {} (clifford) {} (diagonal); {} shots at n={} in {:.1}s with {} aborts",
        clifford_identical, iqp_identical, s.c10_perf_shots, s.c10_perf_n, elapsed, aborts
    );
    Ok((passed, elapsed, 60.0, details))
}
