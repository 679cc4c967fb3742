//! Seeded ensemble experiments: the fraction of random networks that are
//! sparse-controllable, with Wilson score intervals.
//!
//! Trial `i` of an experiment with master seed `σ` draws everything from
//! `ChaCha8Rng::seed_from_u64(σ)` switched to stream `i`. Streams are
//! independent, so results do not depend on which thread ran which trial or
//! in what order.

use std::fmt;
use std::io::Write;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::BoundModel;
use crate::control::{is_sparse_controllable, ConditionBStrategy, LinearSystem};
use crate::error::{CoreError, Result};
use crate::graphs::{
    configuration_model, row_normalize, sample_er_directed, sample_er_undirected,
    sample_power_law_degrees, sample_weight_vector, BinaryAdjacency, RowNormalizedSystem, WeightDist,
};
use crate::linalg::{self, RankPolicy};
use crate::sparsity::SupportFamily;

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;
/// Comment line heading every CSV file written by this crate.
pub const CSV_VERSION_LINE: &str = "# sparse-ctrl-lab v1";
pub const SWEEP_CSV_HEADER: &str =
    "model,n,p_or_alpha,family,s,m,trials,seed,controllable_count,p_hat,ci_low,ci_high";
/// Fresh degree sequences tried when the configuration model keeps failing.
pub const DEGREE_RESAMPLES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case")]
pub enum GraphModel {
    ErUndirected { p: f64 },
    ErDirected { p: f64 },
    /// Configuration model on a power-law degree sequence over
    /// `k_min..=k_max`; `k_max = None` means `n − 1`.
    PowerLaw { alpha: f64, k_min: usize, k_max: Option<usize> },
}

impl GraphModel {
    pub fn power_law(alpha: f64) -> Self {
        GraphModel::PowerLaw {
            alpha,
            k_min: 1,
            k_max: None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            GraphModel::ErUndirected { .. } => "er-undirected",
            GraphModel::ErDirected { .. } => "er-directed",
            GraphModel::PowerLaw { .. } => "power-law",
        }
    }

    /// `p` for the ER models, `α` for power law.
    pub fn parameter(&self) -> f64 {
        match *self {
            GraphModel::ErUndirected { p } | GraphModel::ErDirected { p } => p,
            GraphModel::PowerLaw { alpha, .. } => alpha,
        }
    }

    /// Builds a model from its CLI name and main parameter.
    pub fn from_name(name: &str, value: f64) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "er-undirected" | "undirected" => Ok(GraphModel::ErUndirected { p: value }),
            "er-directed" | "directed" => Ok(GraphModel::ErDirected { p: value }),
            "power-law" | "powerlaw" => Ok(GraphModel::power_law(value)),
            other => Err(CoreError::param(format!("unknown graph model {other:?}"))),
        }
    }

    /// Draws one binary adjacency matrix.
    pub fn sample_adjacency<R: rand::Rng + ?Sized>(
        &self,
        n: usize,
        max_retries: usize,
        rng: &mut R,
    ) -> Result<BinaryAdjacency> {
        match *self {
            GraphModel::ErUndirected { p } => sample_er_undirected(n, p, rng),
            GraphModel::ErDirected { p } => sample_er_directed(n, p, rng),
            GraphModel::PowerLaw { alpha, k_min, k_max } => {
                let k_max = k_max.unwrap_or(n.saturating_sub(1));
                let mut last = None;
                for _ in 0..DEGREE_RESAMPLES {
                    let degrees = sample_power_law_degrees(n, alpha, k_min, k_max, rng)?;
                    match configuration_model(&degrees, rng, max_retries) {
                        Ok(a) => return Ok(a),
                        Err(e @ CoreError::MatchingFailed { .. }) => last = Some(e),
                        Err(e) => return Err(e),
                    }
                }
                Err(last.expect("at least one resample"))
            }
        }
    }
}

impl fmt::Display for GraphModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.name(), self.parameter())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub model: GraphModel,
    pub n: usize,
    pub family: SupportFamily,
    pub trials: usize,
    pub master_seed: u64,
    pub weight_dist: WeightDist,
    pub policy: RankPolicy,
    pub strategy: ConditionBStrategy,
    /// Test the binary adjacency instead of the row-normalized matrix.
    pub use_raw_adjacency: bool,
    /// Restarts allowed per configuration-model matching.
    pub max_retries: usize,
}

impl ExperimentConfig {
    /// 1000 trials, uniform weights, default rank policy and strategy.
    pub fn new(model: GraphModel, family: SupportFamily, master_seed: u64) -> Self {
        ExperimentConfig {
            model,
            n: family.n(),
            family,
            trials: 1000,
            master_seed,
            weight_dist: WeightDist::Uniform,
            policy: RankPolicy::default(),
            strategy: ConditionBStrategy::Auto,
            use_raw_adjacency: false,
            max_retries: 100,
        }
    }

    pub fn with_trials(mut self, trials: usize) -> Self {
        self.trials = trials;
        self
    }

    /// The identifying CSV columns of this experiment.
    pub fn key(&self) -> String {
        SweepRow::from_config(self).key()
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(CoreError::param("trials must be at least 1"));
        }
        if self.family.n() != self.n {
            return Err(CoreError::param(format!(
                "family is over {} nodes but n = {}",
                self.family.n(),
                self.n
            )));
        }
        Ok(())
    }
}

/// The random generator for trial `trial_index`.
pub fn trial_rng(master_seed: u64, trial_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(trial_index);
    rng
}

/// Graph and weights of one trial, normalized.
pub fn sample_trial_system(config: &ExperimentConfig, trial_index: usize) -> Result<RowNormalizedSystem> {
    let mut rng = trial_rng(config.master_seed, trial_index as u64);
    let adj = config.model.sample_adjacency(config.n, config.max_retries, &mut rng)?;
    let w = sample_weight_vector(config.n, config.weight_dist, &mut rng);
    row_normalize(&adj, &w)
}

/// Whether the network drawn for `trial_index` is sparse-controllable with
/// `Ψ = I`.
pub fn run_trial(config: &ExperimentConfig, trial_index: usize) -> Result<bool> {
    if trial_index >= config.trials {
        return Err(CoreError::param(format!(
            "trial index {trial_index} out of range for {} trials",
            config.trials
        )));
    }
    let sys = sample_trial_system(config, trial_index)?;
    let phi = if config.use_raw_adjacency {
        sys.adjacency.to_matrix()
    } else {
        sys.a_bar
    };
    let system = LinearSystem::with_identity_input(phi)?;
    let verdict = is_sparse_controllable(&system, &config.family, &config.policy, config.strategy)?;
    Ok(verdict.controllable)
}

/// One line of a sweep. Failed points keep their coordinates and carry the
/// error message instead of an estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub model: String,
    pub n: usize,
    pub p_or_alpha: f64,
    pub family: String,
    pub s: usize,
    pub m: Option<usize>,
    pub trials: usize,
    pub seed: u64,
    pub controllable_count: usize,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
}

impl SweepRow {
    fn from_config(config: &ExperimentConfig) -> Self {
        SweepRow {
            model: config.model.name().to_string(),
            n: config.n,
            p_or_alpha: config.model.parameter(),
            family: config.family.kind_name().to_string(),
            s: config.family.s(),
            m: config.family.m(),
            trials: config.trials,
            seed: config.master_seed,
            controllable_count: 0,
            p_hat: f64::NAN,
            ci_low: f64::NAN,
            ci_high: f64::NAN,
            error: None,
        }
    }

    fn fill(&mut self, count: usize) {
        let (lo, hi) = wilson_interval(count, self.trials);
        self.controllable_count = count;
        self.p_hat = count as f64 / self.trials as f64;
        self.ci_low = lo;
        self.ci_high = hi;
    }

    /// A row for a grid point whose estimation failed.
    pub fn failed(config: &ExperimentConfig, message: impl Into<String>) -> Self {
        let mut row = SweepRow::from_config(config);
        row.error = Some(message.into());
        row
    }

    pub fn is_failed(&self) -> bool {
        self.error.is_some()
    }

    /// Standard error `sqrt(p̂(1 − p̂)/trials)`.
    pub fn std_err(&self) -> f64 {
        (self.p_hat * (1.0 - self.p_hat) / self.trials as f64).sqrt()
    }

    /// The columns identifying the experiment, used to match rows on resume.
    /// Equal to [`ExperimentConfig::key`] of the config that produced the row.
    pub fn key(&self) -> String {
        let m = self.m.map(|m| m.to_string()).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{}",
            self.model, self.n, self.p_or_alpha, self.family, self.s, m, self.trials, self.seed
        )
    }

    /// CSV line without newline. Estimate columns are empty for failed rows.
    pub fn to_csv(&self) -> String {
        if self.is_failed() {
            format!("{},,,,", self.key())
        } else {
            format!(
                "{},{},{},{},{}",
                self.key(),
                self.controllable_count,
                self.p_hat,
                self.ci_low,
                self.ci_high
            )
        }
    }

    /// Parses a line produced by [`SweepRow::to_csv`] for a completed row.
    pub fn from_csv(line: &str) -> Result<Self> {
        let f: Vec<&str> = line.trim().split(',').collect();
        if f.len() != 12 {
            return Err(CoreError::param(format!("expected 12 columns, got {}", f.len())));
        }
        let bad = |what: &str| CoreError::param(format!("bad {what} in sweep row {line:?}"));
        let num = |i: usize, what: &str| f[i].parse::<f64>().map_err(|_| bad(what));
        Ok(SweepRow {
            model: f[0].to_string(),
            n: f[1].parse().map_err(|_| bad("n"))?,
            p_or_alpha: num(2, "p_or_alpha")?,
            family: f[3].to_string(),
            s: f[4].parse().map_err(|_| bad("s"))?,
            m: if f[5].is_empty() {
                None
            } else {
                Some(f[5].parse().map_err(|_| bad("m"))?)
            },
            trials: f[6].parse().map_err(|_| bad("trials"))?,
            seed: f[7].parse().map_err(|_| bad("seed"))?,
            controllable_count: f[8].parse().map_err(|_| bad("controllable_count"))?,
            p_hat: num(9, "p_hat")?,
            ci_low: num(10, "ci_low")?,
            ci_high: num(11, "ci_high")?,
            error: None,
        })
    }
}

/// Runs every trial in parallel and counts controllable outcomes.
pub fn estimate_probability(config: &ExperimentConfig) -> Result<SweepRow> {
    config.validate()?;
    let outcomes: Vec<Result<bool>> = (0..config.trials)
        .into_par_iter()
        .map(|i| run_trial(config, i))
        .collect();
    let mut count = 0;
    for o in outcomes {
        if o? {
            count += 1;
        }
    }
    let mut row = SweepRow::from_config(config);
    row.fill(count);
    Ok(row)
}

/// One row per grid point, in order. A point whose estimation fails is kept
/// with its error message and the sweep moves on.
pub fn sweep(grid: &[ExperimentConfig]) -> Result<Vec<SweepRow>> {
    if grid.is_empty() {
        return Err(CoreError::param("empty sweep grid"));
    }
    Ok(grid
        .iter()
        .map(|c| {
            estimate_probability(c).unwrap_or_else(|e| SweepRow::failed(c, e.to_string()))
        })
        .collect())
}

/// Fraction of sampled ER adjacency matrices (no weights) with full numeric
/// rank. The `family`, `s` and `m` columns of the row are `none`, 0 and empty.
pub fn estimate_nonsingularity(
    n: usize,
    p: f64,
    model: BoundModel,
    trials: usize,
    master_seed: u64,
) -> Result<SweepRow> {
    if trials == 0 {
        return Err(CoreError::param("trials must be at least 1"));
    }
    let graph = match model {
        BoundModel::Undirected => GraphModel::ErUndirected { p },
        BoundModel::Directed => GraphModel::ErDirected { p },
    };
    let policy = RankPolicy::default();
    let outcomes: Vec<Result<bool>> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(master_seed, i as u64);
            let a: DMatrix<f64> = graph.sample_adjacency(n, 1, &mut rng)?.to_matrix();
            Ok(linalg::numeric_rank(&a, &policy)? == n)
        })
        .collect();
    let mut count = 0;
    for o in outcomes {
        if o? {
            count += 1;
        }
    }
    let mut row = SweepRow {
        model: graph.name().to_string(),
        n,
        p_or_alpha: p,
        family: "none".into(),
        s: 0,
        m: None,
        trials,
        seed: master_seed,
        controllable_count: 0,
        p_hat: 0.0,
        ci_low: 0.0,
        ci_high: 0.0,
        error: None,
    };
    row.fill(count);
    Ok(row)
}

/// 95% Wilson score interval for `count` successes out of `trials`.
/// The interval is closed at 0 or 1 when every trial agrees.
pub fn wilson_interval(count: usize, trials: usize) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let nt = trials as f64;
    let p = count as f64 / nt;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / nt;
    let center = (p + z2 / (2.0 * nt)) / denom;
    let half = Z95 / denom * (p * (1.0 - p) / nt + z2 / (4.0 * nt * nt)).sqrt();
    let mut lo = (center - half).max(0.0);
    let mut hi = (center + half).min(1.0);
    if count == 0 {
        lo = 0.0;
    }
    if count == trials {
        hi = 1.0;
    }
    (lo.min(p), hi.max(p))
}

/// Writes the version line, the header and one line per row.
pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], mut w: W) -> Result<()> {
    writeln!(w, "{CSV_VERSION_LINE}")?;
    writeln!(w, "{SWEEP_CSV_HEADER}")?;
    for r in rows {
        writeln!(w, "{}", r.to_csv())?;
    }
    Ok(())
}

pub fn write_sweep_json<W: Write>(rows: &[SweepRow], w: W) -> Result<()> {
    serde_json::to_writer_pretty(w, rows).map_err(|e| CoreError::Io(e.into()))
}
