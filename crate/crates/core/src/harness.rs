//! Replicated experiments, summary statistics and the two preset sweeps
//! (normalized SA runtime over a p-grid, and the three-algorithm
//! comparison).

use rayon::prelude::*;
use serde::Serialize;

use crate::algorithms::{run_to_target, AlgorithmKind, ControllerParams};
use crate::bitstring::nearest_int;
use crate::error::{Error, Result};
use crate::landscape::{splitmix64, DistortedOneMax, TargetSpec};

/// Budget used by the p-sweep unless overridden.
pub const FIGURE1_BUDGET: u64 = 10_000_000;
/// Budget used by the algorithm comparison unless overridden.
pub const FIGURE2_BUDGET: u64 = 1_000_000;
pub const DEFAULT_REPLICATIONS: u64 = 50;
pub const DEFAULT_N_LIST: [usize; 3] = [100, 200, 400];
pub const DEFAULT_GRID_POINTS: usize = 12;
pub const DEFAULT_GRID_TOP: f64 = 0.05;
pub const CONTROLLER_F: f64 = 1.5;
pub const CONTROLLER_S: f64 = 1.0;

const LANDSCAPE_SALT: u64 = 0x6c61_6e64_7363_6170;

/// Noise key of the landscape instance used by the trial with this seed.
pub fn noise_key_for_seed(seed: u64) -> u64 {
    splitmix64(seed ^ LANDSCAPE_SALT)
}

/// One fully resolved experiment: every formula already evaluated.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub experiment_id: String,
    pub algorithm: AlgorithmKind,
    pub n: usize,
    pub p: f64,
    pub d: f64,
    pub k_star: f64,
    pub budget: u64,
    pub replications: u64,
    pub base_seed: u64,
    pub parallelism: usize,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.experiment_id.is_empty()
            || self
                .experiment_id
                .contains(|c: char| c == ',' || c == '"' || c.is_control())
        {
            return Err(Error::config(
                "experiment_id",
                "must be non-empty and free of commas, quotes and control characters",
            ));
        }
        self.algorithm.validate()?;
        self.landscape(self.base_seed)?;
        TargetSpec::new(self.k_star, self.n)?;
        if self.budget < 1 {
            return Err(Error::config("budget", "must be >= 1"));
        }
        if self.replications < 1 {
            return Err(Error::config("replications", "must be >= 1"));
        }
        if self.parallelism < 1 {
            return Err(Error::config("parallelism", "must be >= 1"));
        }
        Ok(())
    }

    pub fn seed(&self, replication: u64) -> u64 {
        self.base_seed.wrapping_add(replication)
    }

    /// Landscape instance for the trial with this seed.
    pub fn landscape(&self, seed: u64) -> Result<DistortedOneMax> {
        DistortedOneMax::new(self.n, self.p, self.d, noise_key_for_seed(seed))
    }

    pub fn target(&self) -> Result<TargetSpec> {
        TargetSpec::new(self.k_star, self.n)
    }
}

/// Outcome of one replication.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub replication: u64,
    pub seed: u64,
    pub evaluations: u64,
    pub hit_target: bool,
    pub censored: bool,
    pub final_fitness: f64,
}

fn run_trial(config: &ExperimentConfig, replication: u64) -> Result<RunRecord> {
    let seed = config.seed(replication);
    let landscape = config.landscape(seed)?;
    let result = run_to_target(config.algorithm, &landscape, config.target()?, config.budget, seed)?;
    Ok(RunRecord {
        replication,
        seed,
        evaluations: result.evaluations,
        hit_target: result.hit_target,
        censored: result.censored,
        final_fitness: result.final_fitness.value(),
    })
}

/// Runs all replications of all configs on one pool of `parallelism`
/// workers. Output order follows input order and replication index.
pub fn run_experiments(configs: &[ExperimentConfig], parallelism: usize) -> Result<Vec<Vec<RunRecord>>> {
    for c in configs {
        c.validate()?;
    }
    if parallelism < 1 {
        return Err(Error::config("parallelism", "must be >= 1"));
    }
    let jobs: Vec<(usize, u64)> = configs
        .iter()
        .enumerate()
        .flat_map(|(ci, c)| (0..c.replications).map(move |r| (ci, r)))
        .collect();

    let flat: Vec<RunRecord> = if parallelism == 1 {
        jobs.iter()
            .map(|&(ci, r)| run_trial(&configs[ci], r))
            .collect::<Result<_>>()?
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(parallelism)
            .build()
            .map_err(|e| Error::InvalidState(format!("thread pool: {e}")))?;
        pool.install(|| {
            jobs.par_iter()
                .map(|&(ci, r)| run_trial(&configs[ci], r))
                .collect::<Result<_>>()
        })?
    };

    let mut rest = flat.into_iter();
    Ok(configs
        .iter()
        .map(|c| rest.by_ref().take(c.replications as usize).collect())
        .collect())
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<RunRecord>> {
    Ok(run_experiments(std::slice::from_ref(config), config.parallelism)?
        .pop()
        .expect("one config in, one record list out"))
}

/// `T · p / (n ln n)`.
pub fn normalized_runtime(evaluations: f64, n: usize, p: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::arg("n must be >= 2"));
    }
    if !(p > 0.0) {
        return Err(Error::arg("p must be > 0"));
    }
    let n = n as f64;
    Ok(evaluations * p / (n * n.ln()))
}

/// `n ln n / p`, the reference curve of the algorithm comparison.
pub fn reference_runtime(n: usize, p: f64) -> f64 {
    let n = n as f64;
    n * n.ln() / p
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryStats {
    pub count: u64,
    pub censored_count: u64,
    pub mean: f64,
    /// Midpoint median; censored runs enter at their recorded count.
    pub median: f64,
    /// Sample standard deviation (`n - 1` denominator), 0 for one record.
    pub stddev: f64,
    pub normalized_mean: Option<f64>,
    pub normalized_median: Option<f64>,
    /// More than half of the runs were censored.
    pub median_unreliable: bool,
}

/// Aggregates evaluation counts. Normalized values are filled in when
/// `n >= 2` and `p > 0`.
pub fn summarize(records: &[RunRecord], n: usize, p: f64) -> Result<SummaryStats> {
    let values: Vec<f64> = records.iter().map(|r| r.evaluations as f64).collect();
    let censored_count = records.iter().filter(|r| r.censored).count() as u64;
    summarize_values(&values, censored_count, n, p)
}

pub(crate) fn summarize_values(values: &[f64], censored_count: u64, n: usize, p: f64) -> Result<SummaryStats> {
    if values.is_empty() {
        return Err(Error::arg("cannot summarize an empty record list"));
    }
    let count = values.len();
    let mean = values.iter().sum::<f64>() / count as f64;
    let stddev = if count > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1) as f64).sqrt()
    } else {
        0.0
    };
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let median = if count % 2 == 1 {
        sorted[count / 2]
    } else {
        (sorted[count / 2 - 1] + sorted[count / 2]) / 2.0
    };
    Ok(SummaryStats {
        count: count as u64,
        censored_count,
        mean,
        median,
        stddev,
        normalized_mean: normalized_runtime(mean, n, p).ok(),
        normalized_median: normalized_runtime(median, n, p).ok(),
        median_unreliable: 2 * censored_count > count as u64,
    })
}

/// Static λ = ⌊1.5 ln n⌉ and p = (e/(e-1))^(-λ).
pub fn figure2_params(n: usize) -> Result<(u64, f64)> {
    if n < 2 {
        return Err(Error::arg("n must be >= 2"));
    }
    let lambda = nearest_int(1.5 * (n as f64).ln());
    Ok((lambda, figure2_p(lambda)))
}

pub(crate) fn figure2_p(lambda: u64) -> f64 {
    let e = std::f64::consts::E;
    (e / (e - 1.0)).powf(-(lambda as f64))
}

/// `DEFAULT_GRID_POINTS` log-spaced values from `4/(n ln n)` to 0.05.
pub fn default_p_grid(n: usize) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::arg("n must be >= 2"));
    }
    let lo = 4.0 / (n as f64 * (n as f64).ln());
    if lo >= DEFAULT_GRID_TOP {
        return Err(Error::arg(format!(
            "n = {n} too small for the default grid (4/(n ln n) = {lo} >= {DEFAULT_GRID_TOP})"
        )));
    }
    let (a, b) = (lo.ln(), DEFAULT_GRID_TOP.ln());
    let steps = (DEFAULT_GRID_POINTS - 1) as f64;
    Ok((0..DEFAULT_GRID_POINTS)
        .map(|i| {
            if i == DEFAULT_GRID_POINTS - 1 {
                DEFAULT_GRID_TOP
            } else {
                (a + (b - a) * i as f64 / steps).exp()
            }
        })
        .collect())
}

/// Parameters shared by every point of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepOptions {
    pub replications: u64,
    /// `None` selects the preset budget.
    pub budget: Option<u64>,
    pub base_seed: u64,
    pub parallelism: usize,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            replications: DEFAULT_REPLICATIONS,
            budget: None,
            base_seed: 1,
            parallelism: 1,
        }
    }
}

fn sa_controller(n: usize) -> Result<ControllerParams> {
    let nf = n as f64;
    ControllerParams::new(CONTROLLER_F, CONTROLLER_S, (nf * nf.ln()).max(1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Figure1Row {
    pub n: usize,
    pub p: f64,
    pub config: ExperimentConfig,
    pub records: Vec<RunRecord>,
    pub stats: SummaryStats,
}

/// SA-(1,λ)-EA with resets over a p-grid per n, with `d = ln n`,
/// `k* = n^0.4`, `F = 1.5`, `s = 1`, `λ_max = n ln n`.
///
/// `p_grid = None` uses [`default_p_grid`] for each n.
pub fn figure1_sweep(n_list: &[usize], p_grid: Option<&[f64]>, options: &SweepOptions) -> Result<Vec<Figure1Row>> {
    if n_list.is_empty() {
        return Err(Error::arg("n list is empty"));
    }
    let mut configs = Vec::new();
    for &n in n_list {
        let grid = match p_grid {
            Some(g) => g.to_vec(),
            None => default_p_grid(n)?,
        };
        if grid.is_empty() {
            return Err(Error::arg("p grid is empty"));
        }
        for (j, &p) in grid.iter().enumerate() {
            if !(p > 0.0 && p <= 1.0) {
                return Err(Error::config("p", format!("grid values must lie in (0, 1], got {p}")));
            }
            let nf = n as f64;
            configs.push(ExperimentConfig {
                experiment_id: format!("fig1_n{n}_p{j:02}"),
                algorithm: AlgorithmKind::SaCommaReset(sa_controller(n)?),
                n,
                p,
                d: nf.ln(),
                k_star: nf.powf(0.4),
                budget: options.budget.unwrap_or(FIGURE1_BUDGET),
                replications: options.replications,
                base_seed: options.base_seed,
                parallelism: options.parallelism,
            });
        }
    }
    let results = run_experiments(&configs, options.parallelism)?;
    configs
        .into_iter()
        .zip(results)
        .map(|(config, records)| {
            let stats = summarize(&records, config.n, config.p)?;
            Ok(Figure1Row {
                n: config.n,
                p: config.p,
                config,
                records,
                stats,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Figure2Row {
    pub n: usize,
    pub algorithm: &'static str,
    pub lambda: u64,
    pub p: f64,
    pub config: ExperimentConfig,
    pub records: Vec<RunRecord>,
    pub stats: SummaryStats,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Figure2Table {
    pub rows: Vec<Figure2Row>,
    /// `(n, n ln n / p)` per problem size.
    pub references: Vec<(usize, f64)>,
}

impl Figure2Table {
    pub fn row(&self, n: usize, algorithm: &str) -> Option<&Figure2Row> {
        self.rows.iter().find(|r| r.n == n && r.algorithm == algorithm)
    }
}

/// Static (1,λ)-EA, static (1+λ)-EA and SA-(1,λ)-EA with resets per n,
/// with λ and p from [`figure2_params`].
pub fn figure2_sweep(n_list: &[usize], options: &SweepOptions) -> Result<Figure2Table> {
    if n_list.is_empty() {
        return Err(Error::arg("n list is empty"));
    }
    let mut configs = Vec::new();
    let mut meta = Vec::new();
    let mut references = Vec::new();
    for &n in n_list {
        let (lambda, p) = figure2_params(n)?;
        references.push((n, reference_runtime(n, p)));
        let nf = n as f64;
        for algorithm in [
            AlgorithmKind::StaticComma { lambda },
            AlgorithmKind::StaticPlus { lambda },
            AlgorithmKind::SaCommaReset(sa_controller(n)?),
        ] {
            configs.push(ExperimentConfig {
                experiment_id: format!("fig2_n{n}_{}", algorithm.name()),
                algorithm,
                n,
                p,
                d: nf.ln(),
                k_star: nf.powf(0.4),
                budget: options.budget.unwrap_or(FIGURE2_BUDGET),
                replications: options.replications,
                base_seed: options.base_seed,
                parallelism: options.parallelism,
            });
            meta.push((n, algorithm.name(), lambda, p));
        }
    }
    let results = run_experiments(&configs, options.parallelism)?;
    let rows = configs
        .into_iter()
        .zip(results)
        .zip(meta)
        .map(|((config, records), (n, algorithm, lambda, p))| {
            let stats = summarize(&records, n, p)?;
            Ok(Figure2Row {
                n,
                algorithm,
                lambda,
                p,
                config,
                records,
                stats,
            })
        })
        .collect::<Result<_>>()?;
    Ok(Figure2Table { rows, references })
}
