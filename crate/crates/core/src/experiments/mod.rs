//! Disorder-ensemble sweeps over quench pairs.
//!
//! For every chain length and disorder sample the Hamiltonian is diagonalized
//! once; each `H₀` eigenstate `|E⁰_k>` is then paired with its copy flipped on
//! the subsystem site and both are quenched to `H`. Per-sample averages over
//! `k` (and the maximum of the distinguishability margin) are aggregated into
//! ensemble mean and standard deviation per chain length.

mod output;
mod verify;

pub use output::{metadata_json, write_aggregate_csv, write_outputs, write_records_csv, AGGREGATE_COLUMNS, RECORD_COLUMNS};
pub use verify::{run_verification_suite, CheckResult, Fault, VerificationReport, VerifySettings};

use rand::seq::index::sample as sample_indices;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{
    computational_basis, effective_dimension, effective_entanglement, equilibration_coefficient,
    geometric_entanglement, optimal_distinguisher, sigma_z_alignment, trace_distance, GeometricEntanglement,
    QuenchRecord,
};
use crate::error::{Error, Result};
use crate::hilbert::{Bipartition, DensityOperator, PureState};
use crate::model::{build_hamiltonian, sample_spec, SpinChainSpec, MAX_DENSE_SITES};
use crate::rng::{derive_seed, substream, Stream};
use crate::spectral::{basis_overlaps, dephase_reduced, diagonalize, reduced_eigenstate_cache, ReducedEigenstateCache, SpectralData};

/// Ratio `σ₁/σ₀` of the reference protocol.
pub const REFERENCE_SIGMA1_RATIO: f64 = 0.4;
/// Disorder realizations per chain length in the reference protocol.
pub const REFERENCE_SAMPLES: usize = 100;
pub const DEFAULT_MAX_SITES: usize = 12;
pub const DEFAULT_SUBSAMPLE_THRESHOLD: usize = 10;
pub const DEFAULT_SUBSAMPLE_SIZE: usize = 512;
/// Threshold on the σ^Z-alignment fraction counted as "σ^Z is the best distinguisher".
pub const ALIGNMENT_THRESHOLD: f64 = 0.9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub n_values: Vec<usize>,
    pub samples_per_n: usize,
    pub sigma0: f64,
    pub sigma1_ratio: f64,
    pub subsystem_site: usize,
    pub master_seed: u64,
    /// Hard cap on chain length.
    pub max_sites: usize,
    /// Chains longer than this iterate a random subset of initial states.
    pub subsample_threshold: usize,
    pub subsample_size: usize,
    /// Worker threads; 0 picks the machine default. Not serialized: outputs
    /// do not depend on it.
    #[serde(skip)]
    pub workers: usize,
}

impl Default for ExperimentPlan {
    fn default() -> Self {
        Self {
            n_values: (3..=10).collect(),
            samples_per_n: REFERENCE_SAMPLES,
            sigma0: 1.0,
            sigma1_ratio: REFERENCE_SIGMA1_RATIO,
            subsystem_site: 1,
            master_seed: 2011,
            max_sites: DEFAULT_MAX_SITES,
            subsample_threshold: DEFAULT_SUBSAMPLE_THRESHOLD,
            subsample_size: DEFAULT_SUBSAMPLE_SIZE,
            workers: 0,
        }
    }
}

impl ExperimentPlan {
    pub fn sigma1(&self) -> f64 {
        self.sigma1_ratio * self.sigma0
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_values.is_empty() {
            return Err(Error::invalid("plan needs at least one chain length"));
        }
        if self.samples_per_n == 0 {
            return Err(Error::invalid("samples_per_n must be at least 1"));
        }
        if !(self.sigma0 > 0.0 && self.sigma0.is_finite()) || !(self.sigma1_ratio >= 0.0 && self.sigma1_ratio.is_finite()) {
            return Err(Error::invalid("sigma0 must be positive and sigma1_ratio nonnegative"));
        }
        if self.max_sites > MAX_DENSE_SITES {
            return Err(Error::ResourceCap(format!(
                "max_sites={} exceeds the dense limit of {MAX_DENSE_SITES} sites",
                self.max_sites
            )));
        }
        for &n in &self.n_values {
            if n < 2 {
                return Err(Error::invalid(format!("chain length {n} < 2")));
            }
            if n > self.max_sites {
                let d = 1u64 << n;
                let gib = (d * d * 16) as f64 / (1u64 << 30) as f64;
                return Err(Error::ResourceCap(format!(
                    "n={n} exceeds the cap of {} sites: a dense {d}x{d} complex Hamiltonian alone takes {gib:.2} GiB \
                     and its diagonalization scales as d^3; lower n or raise max_n explicitly",
                    self.max_sites
                )));
            }
            if self.subsystem_site == 0 || self.subsystem_site > n {
                return Err(Error::invalid(format!("subsystem site {} not on a chain of {n}", self.subsystem_site)));
            }
        }
        if self.subsample_size == 0 {
            return Err(Error::invalid("subsample_size must be at least 1"));
        }
        Ok(())
    }

    /// Seed of disorder sample `index` at chain length `n`.
    pub fn sample_seed(&self, n: usize, index: usize) -> u64 {
        derive_seed(self.master_seed, &[n as u64, index as u64])
    }

    /// Initial-state indices visited for one sample.
    pub fn initial_states(&self, n: usize, seed: u64) -> Vec<usize> {
        let d = 1usize << n;
        if n <= self.subsample_threshold || self.subsample_size >= d {
            return (0..d).collect();
        }
        let mut rng = substream(seed, Stream::Subsample);
        let mut picked = sample_indices(&mut rng, d, self.subsample_size).into_vec();
        picked.sort_unstable();
        picked
    }
}

/// One diagonalized disorder realization with everything the quench pairs share.
#[derive(Debug)]
pub struct QuenchSample {
    pub spec: SpinChainSpec,
    pub sample_index: usize,
    pub spectral: SpectralData,
    pub partition: Bipartition,
    pub cache: ReducedEigenstateCache,
    /// Geometric entanglement of every eigenstate w.r.t. the computational basis of `S`.
    pub geometric: GeometricEntanglement,
}

impl QuenchSample {
    pub fn prepare(spec: SpinChainSpec, sample_index: usize, subsystem_site: usize) -> Result<Self> {
        let ham = build_hamiltonian(&spec)?;
        let spectral = diagonalize(&ham.full)?;
        let partition = Bipartition::single_site(spec.n, subsystem_site)?;
        let cache = reduced_eigenstate_cache(&spectral, &partition)?;
        let geometric = geometric_entanglement(&cache, &computational_basis(partition.d_s()))?;
        Ok(Self { spec, sample_index, spectral, partition, cache, geometric })
    }

    pub fn subsystem_site(&self) -> usize {
        self.partition.subsystem_sites()[0]
    }
}

/// A record together with the two reduced time-averaged states.
#[derive(Debug, Clone)]
pub struct QuenchOutcome {
    pub record: QuenchRecord,
    pub omega_s1: DensityOperator,
    pub omega_s2: DensityOperator,
}

struct InitialState {
    d_eff: f64,
    c_eq: f64,
    r: f64,
    subsystem: DensityOperator,
    omega_s: DensityOperator,
}

fn quench_basis_state(sample: &QuenchSample, index: usize) -> Result<InitialState> {
    let sd = &sample.spectral;
    let part = &sample.partition;
    let c = basis_overlaps(sd, index)?;
    let (s, _) = part.split(index);
    let subsystem = PureState::basis(part.d_s(), s)?.projector();
    let d_eff = effective_dimension(&c, sd.blocks());
    Ok(InitialState {
        d_eff,
        c_eq: equilibration_coefficient(&c, sd.blocks(), part.d_s()),
        r: effective_entanglement(sd, &sample.cache, &c, &subsystem)?,
        omega_s: dephase_reduced(sd, &sample.cache, &c)?,
        subsystem,
    })
}

/// Quench `|E⁰_k>` and its subsystem-flipped partner to the full Hamiltonian.
///
/// Fails if the resulting record violates the nonthermalization inequality
/// `D(ω^{S1}, ω^{S2}) ≥ D_init − R₁ − R₂` by more than 1e-10.
pub fn run_quench_pair(sample: &QuenchSample, k: usize) -> Result<QuenchOutcome> {
    let n = sample.spec.n;
    if k >= sample.spec.dim() {
        return Err(Error::invalid(format!("initial state {k} outside 0..{}", sample.spec.dim())));
    }
    let flipped = sample.partition.indexing().flip(k, sample.subsystem_site());
    let first = quench_basis_state(sample, k)?;
    let second = quench_basis_state(sample, flipped)?;
    let d_init = trace_distance(&first.subsystem, &second.subsystem)?;
    let d_omega = trace_distance(&first.omega_s, &second.omega_s)?;
    let record = QuenchRecord {
        n,
        sample_index: sample.sample_index,
        seed: sample.spec.seed,
        k,
        k_config_bits: crate::model::ProductEigenstate { configuration: k, energy0: 0.0 }.bits(n),
        d_eff_1: first.d_eff,
        d_eff_2: second.d_eff,
        c_eq_1: first.c_eq,
        c_eq_2: second.c_eq,
        r_1: first.r,
        r_2: second.r,
        delta_sample: sample.geometric.max,
        d_init,
        d_omega,
        margin: d_omega - first.c_eq - second.c_eq,
        thm1_lb: d_init - first.r - second.r,
        degenerate_flag: !sample.spectral.is_nondegenerate(),
    };
    record.check_invariants()?;
    Ok(QuenchOutcome { record, omega_s1: first.omega_s, omega_s2: second.omega_s })
}

/// Eigenstate averages of one disorder sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSummary {
    pub n: usize,
    pub sample_index: usize,
    pub seed: u64,
    pub states: usize,
    pub mean_delta_k: f64,
    pub mean_d_omega: f64,
    pub mean_d_eff: f64,
    pub mean_c_eq: f64,
    pub max_margin: f64,
    pub argmax_k: usize,
    pub argmax_d_eff: f64,
    pub argmax_c_eq: f64,
    pub degenerate: bool,
    pub gap_degenerate: bool,
    /// σ^Z-alignment fraction of `ω^{S1} − ω^{S2}` per record (`None` when equal).
    pub alignments: Vec<Option<f64>>,
}

/// Alignment of the optimal distinguisher with the σ^Z algebra, after
/// checking that the optimal measurement attains the trace distance.
pub fn distinguisher_alignment(outcome: &QuenchOutcome) -> Result<Option<f64>> {
    let best = optimal_distinguisher(&outcome.omega_s1, &outcome.omega_s2)?;
    if (best.value - outcome.record.d_omega).abs() > 1e-10 {
        return Err(Error::Numeric(format!(
            "optimal distinguisher attains {} but D_omega is {}",
            best.value, outcome.record.d_omega
        )));
    }
    Ok(sigma_z_alignment(&(outcome.omega_s1.matrix() - outcome.omega_s2.matrix())))
}

fn summarize(sample: &QuenchSample, outcomes: &[QuenchOutcome]) -> Result<SampleSummary> {
    let m = outcomes.len() as f64;
    let mean = |f: fn(&QuenchRecord) -> f64| outcomes.iter().map(|o| f(&o.record)).sum::<f64>() / m;
    let best = outcomes
        .iter()
        .fold(None::<&QuenchOutcome>, |acc, o| match acc {
            Some(a) if a.record.margin >= o.record.margin => Some(a),
            _ => Some(o),
        })
        .ok_or_else(|| Error::invalid("sample without initial states"))?;
    Ok(SampleSummary {
        n: sample.spec.n,
        sample_index: sample.sample_index,
        seed: sample.spec.seed,
        states: outcomes.len(),
        mean_delta_k: sample.geometric.mean(),
        mean_d_omega: mean(|r| r.d_omega),
        mean_d_eff: mean(|r| r.d_eff_1),
        mean_c_eq: mean(|r| r.c_eq_1),
        max_margin: best.record.margin,
        argmax_k: best.record.k,
        argmax_d_eff: best.record.d_eff_1,
        argmax_c_eq: best.record.c_eq_1,
        degenerate: !sample.spectral.is_nondegenerate(),
        gap_degenerate: sample.spectral.gap_degenerate(),
        alignments: outcomes.iter().map(distinguisher_alignment).collect::<Result<_>>()?,
    })
}

/// Runs every quench pair of one disorder sample.
pub fn run_sample(plan: &ExperimentPlan, n: usize, sample_index: usize) -> Result<(SampleSummary, Vec<QuenchRecord>)> {
    let seed = plan.sample_seed(n, sample_index);
    let spec = sample_spec(n, plan.sigma0, plan.sigma1(), seed)?;
    let sample = QuenchSample::prepare(spec, sample_index, plan.subsystem_site)?;
    let outcomes = plan
        .initial_states(n, seed)
        .into_par_iter()
        .map(|k| run_quench_pair(&sample, k))
        .collect::<Result<Vec<_>>>()?;
    let summary = summarize(&sample, &outcomes)?;
    Ok((summary, outcomes.into_iter().map(|o| o.record).collect()))
}

/// Mean and sample standard deviation (zero for a single value).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    pub std: f64,
}

impl Stat {
    pub fn of(xs: &[f64]) -> Self {
        let m = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / m;
        let std = if xs.len() > 1 {
            (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0)).sqrt()
        } else {
            0.0
        };
        Self { mean, std }
    }
}

/// Ensemble statistics for one chain length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PanelRow {
    pub n: usize,
    pub samples: usize,
    pub subsample_size: usize,
    pub delta_k: Stat,
    pub d_omega: Stat,
    pub d_eff: Stat,
    pub c_eq: Stat,
    pub max_margin: Stat,
    pub argmax_d_eff: Stat,
    pub argmax_c_eq: Stat,
    pub degenerate_samples: usize,
    pub gap_degenerate_samples: usize,
}

/// Distribution of σ^Z-alignment fractions at one chain length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignmentStats {
    pub n: usize,
    pub instances: usize,
    pub median: f64,
    pub min: f64,
    pub fraction_above_threshold: f64,
    pub threshold: f64,
    pub confirmed: bool,
}

impl AlignmentStats {
    pub fn from_fractions(n: usize, fractions: &[Option<f64>]) -> Self {
        let mut xs: Vec<f64> = fractions.iter().flatten().copied().collect();
        xs.sort_by(f64::total_cmp);
        let median = match xs.len() {
            0 => f64::NAN,
            m if m % 2 == 1 => xs[m / 2],
            m => 0.5 * (xs[m / 2 - 1] + xs[m / 2]),
        };
        let above = xs.iter().filter(|&&x| x > ALIGNMENT_THRESHOLD).count();
        Self {
            n,
            instances: xs.len(),
            median,
            min: xs.first().copied().unwrap_or(f64::NAN),
            fraction_above_threshold: above as f64 / xs.len().max(1) as f64,
            threshold: ALIGNMENT_THRESHOLD,
            confirmed: median > ALIGNMENT_THRESHOLD,
        }
    }
}

/// Per-n alignment statistics of the best distinguisher over a set of outcomes.
pub fn best_distinguisher_report(outcomes: &[QuenchOutcome]) -> Result<Vec<AlignmentStats>> {
    let mut ns: Vec<usize> = outcomes.iter().map(|o| o.record.n).collect();
    ns.sort_unstable();
    ns.dedup();
    ns.into_iter()
        .map(|n| {
            let fr = outcomes
                .iter()
                .filter(|o| o.record.n == n)
                .map(distinguisher_alignment)
                .collect::<Result<Vec<_>>>()?;
            Ok(AlignmentStats::from_fractions(n, &fr))
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct SweepOutput {
    pub plan: ExperimentPlan,
    pub records: Vec<QuenchRecord>,
    pub samples: Vec<SampleSummary>,
    pub panels: Vec<PanelRow>,
    pub alignment: Vec<AlignmentStats>,
}

impl SweepOutput {
    pub fn panel(&self, n: usize) -> Option<&PanelRow> {
        self.panels.iter().find(|p| p.n == n)
    }
}

fn aggregate(n: usize, summaries: &[&SampleSummary]) -> PanelRow {
    let col = |f: fn(&SampleSummary) -> f64| Stat::of(&summaries.iter().map(|s| f(s)).collect::<Vec<_>>());
    PanelRow {
        n,
        samples: summaries.len(),
        subsample_size: summaries.first().map_or(0, |s| s.states),
        delta_k: col(|s| s.mean_delta_k),
        d_omega: col(|s| s.mean_d_omega),
        d_eff: col(|s| s.mean_d_eff),
        c_eq: col(|s| s.mean_c_eq),
        max_margin: col(|s| s.max_margin),
        argmax_d_eff: col(|s| s.argmax_d_eff),
        argmax_c_eq: col(|s| s.argmax_c_eq),
        degenerate_samples: summaries.iter().filter(|s| s.degenerate).count(),
        gap_degenerate_samples: summaries.iter().filter(|s| s.gap_degenerate).count(),
    }
}

/// Full sweep. Output is independent of the number of workers: tasks are
/// keyed by `(n, sample)` and collected in key order.
pub fn run_sweep(plan: &ExperimentPlan) -> Result<SweepOutput> {
    plan.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(plan.workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    let mut ns = plan.n_values.clone();
    ns.sort_unstable();
    ns.dedup();
    let tasks: Vec<(usize, usize)> = ns
        .iter()
        .flat_map(|&n| (0..plan.samples_per_n).map(move |i| (n, i)))
        .collect();
    let results = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(n, i)| run_sample(plan, n, i))
            .collect::<Result<Vec<_>>>()
    })?;
    let mut records = Vec::new();
    let mut samples = Vec::new();
    for (summary, recs) in results {
        records.extend(recs);
        samples.push(summary);
    }
    let panels = ns
        .iter()
        .map(|&n| aggregate(n, &samples.iter().filter(|s| s.n == n).collect::<Vec<_>>()))
        .collect();
    let alignment = ns
        .iter()
        .map(|&n| {
            let fr: Vec<Option<f64>> = samples
                .iter()
                .filter(|s| s.n == n)
                .flat_map(|s| s.alignments.iter().copied())
                .collect();
            AlignmentStats::from_fractions(n, &fr)
        })
        .collect();
    Ok(SweepOutput { plan: plan.clone(), records, samples, panels, alignment })
}
