//! Beta-binomial data generation and the Monte Carlo evaluation protocol:
//! coverage probability, expected width, and interval-location diagnostics
//! per method per scenario.
//!
//! All randomness is keyed: every replication seeds its own stream from
//! `(scenario seed, replication index)`, so results are bit-identical for
//! any worker count and any sharding of the replication range.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{
    ClusterRecord, DataError, GroupData, Method, MethodMetrics, ScenarioMetrics, ScenarioSpec,
    TwoGroupStudy,
};
use crate::methods::{compute_all_with, MethodOptions};

/// Recommended coverage-probability band for a usable method.
pub const CP_RANGE: (f64, f64) = (0.94, 0.96);
/// Recommended band for distal-over-total noncoverage (interval location).
pub const LOCATION_RANGE: (f64, f64) = (0.375, 0.625);

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    /// The rejected-to-target ratio exceeded the stall cap; the parameters
    /// are pathological for at least one method.
    #[error("scenario stalled: {rejected} rejected samples while collecting {collected} of {target} good replications")]
    Stalled {
        rejected: u64,
        collected: u64,
        target: u64,
    },
    #[error(transparent)]
    Data(#[from] DataError),
}

/// Harness options beyond the per-method formula switches.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimOptions {
    pub methods: MethodOptions,
    /// A scenario stalls once rejected samples exceed this multiple of the
    /// replication target.
    pub stall_factor: f64,
    /// Count nonexistence against the failing method only, instead of
    /// discarding the whole replication. Sensitivity-analysis mode; off by
    /// default.
    pub per_method_accounting: bool,
}

impl SimOptions {
    pub fn new(alpha: f64) -> Self {
        Self {
            methods: MethodOptions::new(alpha),
            stall_factor: 100.0,
            per_method_accounting: false,
        }
    }
}

impl Default for SimOptions {
    fn default() -> Self {
        Self::new(0.05)
    }
}

fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a 256-bit ChaCha seed from a master seed and salt words.
///
/// Every word passes through the full 64-bit finalizer before the next is
/// absorbed; an affine chain would let nearby master seeds reproduce each
/// other's replication sets in permuted order.
pub fn derive_seed(master: u64, salt: &[u64]) -> [u8; 32] {
    let mut state = mix64(master);
    for &word in salt {
        state = mix64(state ^ word);
    }
    let mut out = [0u8; 32];
    for (i, chunk) in out.chunks_exact_mut(8).enumerate() {
        chunk.copy_from_slice(&mix64(state ^ (i as u64 + 1)).to_le_bytes());
    }
    out
}

/// Derives one deterministic `u64` cell seed from a master seed and the
/// cell's grid coordinates.
pub fn derive_cell_seed(master: u64, spec: &ScenarioSpec) -> u64 {
    let words = [
        u64::from(spec.clusters_per_group),
        u64::from(spec.cluster_size),
        spec.gamma1.to_bits(),
        spec.eta.to_bits(),
        spec.theta1.to_bits(),
        spec.theta2.to_bits(),
        spec.alpha.to_bits(),
    ];
    let bytes = derive_seed(master, &words);
    u64::from_le_bytes(bytes[..8].try_into().unwrap())
}

/// Samples one group of clusters with the given sizes from the
/// beta-binomial model: cluster-level success probabilities are Beta with
/// mean `gamma` and correlation `theta`; `theta = 0` degenerates to plain
/// binomial sampling.
pub fn beta_binomial_clusters<R: Rng + ?Sized>(
    sizes: &[u32],
    gamma: f64,
    theta: f64,
    rng: &mut R,
) -> GroupData {
    debug_assert!(gamma > 0.0 && gamma < 1.0);
    debug_assert!((0.0..1.0).contains(&theta));
    let beta = if theta > 0.0 {
        let a = gamma * (1.0 - theta) / theta;
        let b = (1.0 - gamma) * (1.0 - theta) / theta;
        Some(Beta::new(a, b).expect("valid beta parameters"))
    } else {
        None
    };
    let clusters = sizes
        .iter()
        .map(|&size| {
            let p = match &beta {
                Some(d) => d.sample(rng),
                None => gamma,
            };
            // Beta samples can hit the boundary in floating point.
            let successes = if p <= 0.0 {
                0
            } else if p >= 1.0 {
                size
            } else {
                Binomial::new(u64::from(size), p).unwrap().sample(rng) as u32
            };
            ClusterRecord { size, successes }
        })
        .collect();
    GroupData::new(clusters).expect("at least two clusters")
}

/// [`beta_binomial_clusters`] for equally sized clusters.
pub fn beta_binomial_group<R: Rng + ?Sized>(
    clusters: u32,
    size: u32,
    gamma: f64,
    theta: f64,
    rng: &mut R,
) -> GroupData {
    beta_binomial_clusters(&vec![size; clusters as usize], gamma, theta, rng)
}

/// Which side of the interval the true ratio fell on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CoverageSide {
    Covered,
    /// True ratio above the upper limit.
    Distal,
    /// True ratio below the lower limit.
    Mesial,
}

/// Per-method observation from one replication.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MethodObservation {
    pub side: CoverageSide,
    pub width: f64,
}

impl MethodObservation {
    pub fn covered(&self) -> bool {
        self.side == CoverageSide::Covered
    }
}

/// All 17 method observations for one simulated study; `None` marks a
/// nonexistent interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationOutcome {
    pub observations: [Option<MethodObservation>; Method::COUNT],
}

impl ReplicationOutcome {
    pub fn all_exist(&self) -> bool {
        self.observations.iter().all(Option::is_some)
    }
}

/// Evaluates all 17 methods on one study against the true ratio.
pub fn evaluate_replication(
    study: &TwoGroupStudy,
    eta_true: f64,
    opts: &MethodOptions,
) -> ReplicationOutcome {
    let results = compute_all_with(study, opts);
    let mut observations = [None; Method::COUNT];
    for (slot, result) in observations.iter_mut().zip(&results) {
        *slot = result.limits().map(|(l, u)| {
            let side = if eta_true > u {
                CoverageSide::Distal
            } else if eta_true < l {
                CoverageSide::Mesial
            } else {
                CoverageSide::Covered
            };
            MethodObservation {
                side,
                width: u - l,
            }
        });
    }
    ReplicationOutcome { observations }
}

#[derive(Clone)]
struct Accumulator {
    covered: [u64; Method::COUNT],
    distal: [u64; Method::COUNT],
    mesial: [u64; Method::COUNT],
    width_sum: [f64; Method::COUNT],
    nonexistent: [u64; Method::COUNT],
    good: u64,
    rejected: u64,
}

impl Accumulator {
    fn new() -> Self {
        Self {
            covered: [0; Method::COUNT],
            distal: [0; Method::COUNT],
            mesial: [0; Method::COUNT],
            width_sum: [0.0; Method::COUNT],
            nonexistent: [0; Method::COUNT],
            good: 0,
            rejected: 0,
        }
    }

    fn add(&mut self, outcome: &ReplicationOutcome) {
        for (i, obs) in outcome.observations.iter().enumerate() {
            match obs {
                Some(o) => {
                    match o.side {
                        CoverageSide::Covered => self.covered[i] += 1,
                        CoverageSide::Distal => self.distal[i] += 1,
                        CoverageSide::Mesial => self.mesial[i] += 1,
                    }
                    self.width_sum[i] += o.width;
                }
                None => self.nonexistent[i] += 1,
            }
        }
    }

    fn metrics(&self, spec: ScenarioSpec, total_generated: u64) -> ScenarioMetrics {
        let per_method = Method::ALL
            .into_iter()
            .enumerate()
            .map(|(i, method)| {
                let denom = (self.covered[i] + self.distal[i] + self.mesial[i]) as f64;
                let cp = self.covered[i] as f64 / denom;
                let disncp = self.distal[i] as f64 / denom;
                let mesncp = self.mesial[i] as f64 / denom;
                let noncovered = self.distal[i] + self.mesial[i];
                MethodMetrics {
                    method,
                    cp,
                    ew: self.width_sum[i] / denom,
                    disncp,
                    mesncp,
                    dnptnp: (noncovered > 0)
                        .then(|| self.distal[i] as f64 / noncovered as f64),
                    nonexistent: self.nonexistent[i],
                }
            })
            .collect();
        ScenarioMetrics {
            spec,
            rejected_samples: self.rejected,
            total_generated,
            per_method,
        }
    }
}

/// Core rejection-sampling loop shared by the grid and the appropriateness
/// check. Replication `t` of a cell is a pure function of `(seed, t)`;
/// candidates are evaluated in parallel batches and consumed in index
/// order, which makes the outcome independent of the worker count.
fn collect_replications(
    seed: u64,
    sizes: (&[u32], &[u32]),
    gammas: (f64, f64),
    thetas: (f64, f64),
    eta_true: f64,
    target: u64,
    opts: &SimOptions,
) -> Result<(Accumulator, u64), SimError> {
    const BATCH: u64 = 256;
    let stall_cap = (opts.stall_factor * target as f64).ceil() as u64;
    let mut acc = Accumulator::new();
    let mut next_index = 0u64;
    let mut consumed = 0u64;
    loop {
        let outcomes: Vec<ReplicationOutcome> = (next_index..next_index + BATCH)
            .into_par_iter()
            .map(|t| {
                let mut rng = ChaCha8Rng::from_seed(derive_seed(seed, &[t]));
                let treatment =
                    beta_binomial_clusters(sizes.0, gammas.0, thetas.0, &mut rng);
                let control = beta_binomial_clusters(sizes.1, gammas.1, thetas.1, &mut rng);
                let study = TwoGroupStudy::new(treatment, control);
                evaluate_replication(&study, eta_true, &opts.methods)
            })
            .collect();
        next_index += BATCH;

        for outcome in &outcomes {
            consumed += 1;
            if opts.per_method_accounting {
                // Every replication counts; failures are charged to the
                // failing method alone.
                acc.add(outcome);
                acc.good += 1;
            } else if outcome.all_exist() {
                acc.add(outcome);
                acc.good += 1;
            } else {
                acc.rejected += 1;
                if acc.rejected > stall_cap {
                    return Err(SimError::Stalled {
                        rejected: acc.rejected,
                        collected: acc.good,
                        target,
                    });
                }
            }
            if acc.good == target {
                return Ok((acc, consumed));
            }
        }
    }
}

/// Runs one scenario cell with default options.
pub fn run_scenario(spec: &ScenarioSpec) -> Result<ScenarioMetrics, SimError> {
    run_scenario_with(spec, &SimOptions::new(spec.alpha))
}

/// Runs one scenario cell: paired beta-binomial groups are generated until
/// the target number of good replications (all 17 intervals exist) has been
/// collected, then coverage, width, and location metrics are computed over
/// the good ones.
pub fn run_scenario_with(
    spec: &ScenarioSpec,
    opts: &SimOptions,
) -> Result<ScenarioMetrics, SimError> {
    spec.validate()?;
    let sizes = vec![spec.cluster_size; spec.clusters_per_group as usize];
    let (acc, total) = collect_replications(
        spec.seed,
        (&sizes, &sizes),
        (spec.gamma1, spec.gamma2()),
        (spec.theta1, spec.theta2),
        spec.eta,
        u64::from(spec.replications),
        opts,
    )?;
    Ok(acc.metrics(*spec, total))
}

/// Per-method medians across the completed cells of a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodMedians {
    pub method: Method,
    pub cp: f64,
    pub ew: f64,
    /// Median of the defined per-cell location ratios; `None` if no cell
    /// had any noncoverage.
    pub dnptnp: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSummary {
    pub per_method: Vec<MethodMedians>,
}

fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    Some(if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    })
}

/// Medians of CP, EW, and DNPTNP per method over completed cells.
pub fn grid_medians(cells: &[ScenarioMetrics]) -> GridSummary {
    let per_method = Method::ALL
        .into_iter()
        .map(|method| {
            let mut cp: Vec<f64> = Vec::with_capacity(cells.len());
            let mut ew: Vec<f64> = Vec::with_capacity(cells.len());
            let mut loc: Vec<f64> = Vec::new();
            for cell in cells {
                let m = cell.method(method);
                cp.push(m.cp);
                ew.push(m.ew);
                if let Some(d) = m.dnptnp {
                    loc.push(d);
                }
            }
            MethodMedians {
                method,
                cp: median(&mut cp).unwrap_or(f64::NAN),
                ew: median(&mut ew).unwrap_or(f64::NAN),
                dnptnp: median(&mut loc),
            }
        })
        .collect();
    GridSummary { per_method }
}

/// Runs every cell of a grid in parallel. Stalled cells are reported in
/// place without aborting the rest; medians are computed over the
/// completed cells.
pub fn run_grid(
    specs: &[ScenarioSpec],
    opts: &SimOptions,
) -> (Vec<Result<ScenarioMetrics, SimError>>, GridSummary) {
    let cells: Vec<Result<ScenarioMetrics, SimError>> = specs
        .par_iter()
        .map(|spec| run_scenario_with(spec, opts))
        .collect();
    let completed: Vec<ScenarioMetrics> = cells.iter().flatten().cloned().collect();
    let summary = grid_medians(&completed);
    (cells, summary)
}

/// Parameters of one arm for an appropriateness check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupParams {
    pub gamma: f64,
    pub icc: f64,
    pub clusters: u32,
    /// Mean cluster size; fractional means are realized as a deterministic
    /// mix of the two adjacent integer sizes.
    pub mean_size: f64,
}

/// Fitted parameters from a real study, simulated to judge whether each
/// method's coverage and location behavior qualifies it for use there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AppropriatenessSpec {
    pub treatment: GroupParams,
    pub control: GroupParams,
    pub alpha: f64,
    pub replications: u32,
    pub seed: u64,
}

impl AppropriatenessSpec {
    pub fn eta(&self) -> f64 {
        self.treatment.gamma / self.control.gamma
    }

    pub fn validate(&self) -> Result<(), DataError> {
        let err = |msg: String| Err(DataError::InvalidScenario(msg));
        for (label, g) in [("treatment", self.treatment), ("control", self.control)] {
            if !(g.gamma > 0.0 && g.gamma < 1.0) {
                return err(format!("{label} gamma {} outside (0, 1)", g.gamma));
            }
            if !(0.0..1.0).contains(&g.icc) {
                return err(format!("{label} icc {} outside [0, 1)", g.icc));
            }
            if g.clusters < 2 {
                return err(format!("{label} needs at least 2 clusters"));
            }
            if g.mean_size.is_nan() || g.mean_size < 1.0 {
                return err(format!("{label} mean cluster size {} below 1", g.mean_size));
            }
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return err(format!("alpha {} outside (0, 1)", self.alpha));
        }
        if self.replications == 0 {
            return err("replications must be positive".into());
        }
        Ok(())
    }
}

/// Realizes a fractional mean cluster size as a deterministic mix of the
/// two adjacent integers whose average matches the target to within
/// half a unit of rounding.
pub fn size_mix(mean_size: f64, clusters: u32) -> Vec<u32> {
    let floor = mean_size.floor() as u32;
    let frac = mean_size - f64::from(floor);
    let larger = (frac * f64::from(clusters)).round() as u32;
    let larger = larger.min(clusters);
    let mut sizes = vec![floor + 1; larger as usize];
    sizes.extend(vec![floor.max(1); (clusters - larger) as usize]);
    sizes
}

/// One row of an appropriateness report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AppropriatenessRow {
    pub method: Method,
    pub cp: f64,
    pub ew: f64,
    pub dnptnp: Option<f64>,
    /// Coverage within the recommended band.
    pub cp_ok: bool,
    /// Location ratio within the recommended band (vacuously true when
    /// undefined).
    pub location_ok: bool,
    /// Expected width more than twice the next-largest method's.
    pub width_anomaly: bool,
}

/// Simulates studies at the fitted parameters and reports per-method
/// qualification against the recommended coverage and location bands.
pub fn appropriateness_check(
    spec: &AppropriatenessSpec,
    opts: &SimOptions,
) -> Result<Vec<AppropriatenessRow>, SimError> {
    spec.validate()?;
    let sizes1 = size_mix(spec.treatment.mean_size, spec.treatment.clusters);
    let sizes2 = size_mix(spec.control.mean_size, spec.control.clusters);
    let (acc, total) = collect_replications(
        spec.seed,
        (&sizes1, &sizes2),
        (spec.treatment.gamma, spec.control.gamma),
        (spec.treatment.icc, spec.control.icc),
        spec.eta(),
        u64::from(spec.replications),
        opts,
    )?;
    let scenario = ScenarioSpec {
        clusters_per_group: spec.treatment.clusters,
        cluster_size: spec.treatment.mean_size.round().max(1.0) as u32,
        gamma1: spec.treatment.gamma,
        eta: spec.eta(),
        theta1: spec.treatment.icc,
        theta2: spec.control.icc,
        alpha: spec.alpha,
        replications: spec.replications,
        seed: spec.seed,
    };
    let metrics = acc.metrics(scenario, total);

    let mut widths: Vec<f64> = metrics.per_method.iter().map(|m| m.ew).collect();
    widths.sort_by(f64::total_cmp);
    let second_largest = widths[widths.len() - 2];

    Ok(metrics
        .per_method
        .iter()
        .map(|m| AppropriatenessRow {
            method: m.method,
            cp: m.cp,
            ew: m.ew,
            dnptnp: m.dnptnp,
            cp_ok: (CP_RANGE.0..=CP_RANGE.1).contains(&m.cp),
            location_ok: m
                .dnptnp
                .is_none_or(|d| (LOCATION_RANGE.0..=LOCATION_RANGE.1).contains(&d)),
            width_anomaly: m.ew > 2.0 * second_largest && m.ew == widths[widths.len() - 1],
        })
        .collect())
}
