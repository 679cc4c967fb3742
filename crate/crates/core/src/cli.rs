//! `sparse-ctrl-lab` command-line front end.
//!
//! Exit codes: 0 on success (or a controllable verdict), 1 for a negative
//! domain answer (not controllable, no feasible plan), 2 for usage and
//! runtime errors.

use std::collections::HashMap;
use std::fs::{self, File};
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::bounds::{bound, BoundModel, BoundParams};
use crate::control::{is_sparse_controllable, ConditionBStrategy, LinearSystem};
use crate::design::{design_inputs, ControlPlan, DesignError, SteeringProblem};
use crate::error::{CoreError, Result};
use crate::graphs::{read_dense_csv, row_normalize, sample_weight_vector, write_dense_csv, BinaryAdjacency, WeightDist, WeightVector};
use crate::linalg::RankPolicy;
use crate::montecarlo::{
    estimate_probability, trial_rng, write_sweep_json, ExperimentConfig, GraphModel, SweepRow, CSV_VERSION_LINE,
    SWEEP_CSV_HEADER,
};
use crate::sparsity::{binomial, count_subsets_q, SupportFamily};

pub const SEED_ENV: &str = "SPARSE_CTRL_SEED";
pub const BOUND_CSV_HEADER: &str = "model,N,s,p,family,C,c,q,raw_q,valid";

#[derive(Debug, Parser)]
#[command(name = "sparse-ctrl-lab", version, about = "Sparse controllability of opinion dynamics on random graphs")]
pub struct Cli {
    /// Worker threads for parallel work (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a random graph and write it as an edge list.
    Generate(GenerateArgs),
    /// Test a system for sparse controllability and print the verdict.
    Check(CheckArgs),
    /// Evaluate the probability lower bounds on a grid of p values.
    Bound(BoundArgs),
    /// Estimate controllability probabilities over a parameter grid.
    Sweep(SweepArgs),
    /// Design sparse inputs steering x0 to xf.
    Design(DesignArgs),
    /// Tabulate Q(t, U) for t = 0..=s.
    Qtable(QtableArgs),
}

fn probability(s: &str) -> std::result::Result<f64, String> {
    let p: f64 = s.parse().map_err(|_| format!("{s:?} is not a number"))?;
    if (0.0..=1.0).contains(&p) {
        Ok(p)
    } else {
        Err(format!("probability {p} outside [0, 1]"))
    }
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// er-undirected, er-directed or power-law.
    #[arg(long)]
    pub model: String,
    #[arg(long)]
    pub n: usize,
    /// Edge probability (ER models).
    #[arg(long, value_parser = probability)]
    pub p: Option<f64>,
    /// Power-law exponent.
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long, default_value_t = 1)]
    pub k_min: usize,
    /// Largest degree (default n - 1).
    #[arg(long)]
    pub k_max: Option<usize>,
    #[arg(long, env = SEED_ENV)]
    pub seed: u64,
    #[arg(long, default_value = "uniform")]
    pub weights: WeightDist,
    /// Edge-list output (default stdout).
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    /// Also write the row-normalized matrix as dense CSV.
    #[arg(long)]
    pub dense: Option<PathBuf>,
    /// Also write the node weights, one per line.
    #[arg(long)]
    pub weights_out: Option<PathBuf>,
    #[arg(long, default_value_t = 100)]
    pub max_retries: usize,
}

#[derive(Debug, Args, Clone)]
pub struct FamilyArgs {
    /// unconstrained, piecewise or block.
    #[arg(long, default_value = "unconstrained")]
    pub family: String,
    /// Sparsity budget.
    #[arg(long)]
    pub s: usize,
    /// Pieces (piecewise) or block length (block).
    #[arg(long)]
    pub m: Option<usize>,
    /// Explicit family file, one 1-based set like {1,3} per line. Overrides --family.
    #[arg(long)]
    pub explicit: Option<PathBuf>,
}

impl FamilyArgs {
    fn build(&self, n: usize) -> Result<SupportFamily> {
        if let Some(path) = &self.explicit {
            let fam = SupportFamily::read_explicit(n, open(path)?)?;
            if fam.s() != self.s {
                return Err(CoreError::param(format!(
                    "explicit family has sets of size {}, but --s is {}",
                    fam.s(),
                    self.s
                )));
            }
            return Ok(fam);
        }
        SupportFamily::from_descriptor(&self.family, n, self.s, self.m)
    }
}

#[derive(Debug, Args, Clone)]
pub struct SystemArgs {
    /// Edge-list file.
    #[arg(long, conflicts_with = "matrix")]
    pub graph: Option<PathBuf>,
    /// Node weights for --graph, one per line (default all ones).
    #[arg(long, requires = "graph")]
    pub weights_file: Option<PathBuf>,
    /// Use the binary adjacency of --graph instead of its row-normalized matrix.
    #[arg(long, requires = "graph")]
    pub raw: bool,
    /// Dense CSV state matrix, used as given.
    #[arg(long)]
    pub matrix: Option<PathBuf>,
}

impl SystemArgs {
    fn load(&self) -> Result<DMatrix<f64>> {
        if let Some(path) = &self.matrix {
            return read_dense_csv(open(path)?);
        }
        let path = self
            .graph
            .as_ref()
            .ok_or_else(|| CoreError::param("one of --graph or --matrix is required"))?;
        let adj = BinaryAdjacency::read_edge_list(open(path)?)?;
        if self.raw {
            return Ok(adj.to_matrix());
        }
        let w = match &self.weights_file {
            Some(p) => WeightVector::new(read_vector(p)?.iter().copied().collect())?,
            None => WeightVector::ones(adj.n()),
        };
        Ok(row_normalize(&adj, &w)?.a_bar)
    }
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    #[command(flatten)]
    pub family: FamilyArgs,
    /// auto, exhaustive, unconstrained-shortcut or sampled:<draws>[:<seed>].
    #[arg(long, default_value = "auto")]
    pub strategy: ConditionBStrategy,
    /// Relative singular-value threshold (default max(rows, cols)·ε).
    #[arg(long)]
    pub rank_factor: Option<f64>,
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    /// undirected or directed.
    #[arg(long, default_value = "undirected")]
    pub model: BoundModel,
    #[arg(long)]
    pub n: usize,
    #[command(flatten)]
    pub family: FamilyArgs,
    /// Edge probabilities, comma separated. Values outside the claimed range are flagged invalid.
    #[arg(long, value_delimiter = ',', required = true, value_parser = probability)]
    pub p: Vec<f64>,
    #[arg(long = "big-c", default_value_t = 1.0)]
    pub big_c: f64,
    #[arg(long = "small-c", default_value_t = 1.0)]
    pub small_c: f64,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Default)]
pub struct SweepArgs {
    /// Flat `key = value` file; any flag given on the command line wins.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub model: Option<String>,
    /// Node counts, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub n: Vec<usize>,
    /// Edge probabilities (ER) or exponents (power law), comma separated.
    #[arg(long, value_delimiter = ',')]
    pub param: Vec<f64>,
    /// Family kinds, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub family: Vec<String>,
    /// Budgets, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub s: Vec<usize>,
    /// Pieces or block length; defaults to s.
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long, env = SEED_ENV)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub weights: Option<WeightDist>,
    #[arg(long)]
    pub strategy: Option<ConditionBStrategy>,
    /// Test the binary adjacency instead of the row-normalized matrix.
    #[arg(long)]
    pub raw: bool,
    /// csv or json.
    #[arg(long)]
    pub format: Option<String>,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DesignArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    #[command(flatten)]
    pub family: FamilyArgs,
    /// Initial state, CSV vector.
    #[arg(long)]
    pub x0: PathBuf,
    /// Target state, CSV vector.
    #[arg(long)]
    pub xf: PathBuf,
    /// Number of steps (default n).
    #[arg(long)]
    pub horizon: Option<usize>,
    #[arg(long, default_value_t = crate::design::DEFAULT_RESIDUAL_TOL)]
    pub tol: f64,
    /// Plan CSV with columns k,index,value (default stdout).
    #[arg(long)]
    pub plan_out: Option<PathBuf>,
    /// Summary JSON (default stderr).
    #[arg(long)]
    pub summary_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct QtableArgs {
    #[arg(long)]
    pub n: usize,
    #[command(flatten)]
    pub family: FamilyArgs,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

/// Outcome of a subcommand that ran to completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    Negative,
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| CoreError::Io(io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| {
            CoreError::Io(io::Error::new(e.kind(), format!("{}: {e}", p.display())))
        })?)),
        None => Box::new(io::stdout().lock()),
    })
}

/// Reads a vector stored as one row or one column of a dense CSV.
pub fn read_vector(path: &Path) -> Result<DVector<f64>> {
    let m = read_dense_csv(open(path)?)?;
    match (m.nrows(), m.ncols()) {
        (1, _) => Ok(DVector::from_iterator(m.ncols(), m.iter().copied())),
        (_, 1) => Ok(DVector::from_iterator(m.nrows(), m.iter().copied())),
        (r, c) => Err(CoreError::param(format!(
            "{}: expected a vector, found a {r}x{c} matrix",
            path.display()
        ))),
    }
}

pub fn cmd_generate(args: &GenerateArgs) -> Result<Outcome> {
    let model = match args.model.to_ascii_lowercase().as_str() {
        "power-law" | "powerlaw" => GraphModel::PowerLaw {
            alpha: args.alpha.ok_or_else(|| CoreError::param("power-law needs --alpha"))?,
            k_min: args.k_min,
            k_max: args.k_max,
        },
        name => GraphModel::from_name(name, args.p.ok_or_else(|| CoreError::param("ER models need --p"))?)?,
    };
    let mut rng = trial_rng(args.seed, 0);
    let adj = model.sample_adjacency(args.n, args.max_retries, &mut rng)?;
    let w = sample_weight_vector(args.n, args.weights, &mut rng);
    let mut out = output(args.out.as_deref())?;
    writeln!(out, "# {model} seed={}", args.seed)?;
    adj.write_edge_list(&mut out)?;
    out.flush()?;
    if let Some(path) = &args.dense {
        let sys = row_normalize(&adj, &w)?;
        let mut f = output(Some(path))?;
        writeln!(f, "{CSV_VERSION_LINE}")?;
        write_dense_csv(&sys.a_bar, &mut f)?;
        f.flush()?;
    }
    if let Some(path) = &args.weights_out {
        let mut f = output(Some(path))?;
        writeln!(f, "{CSV_VERSION_LINE}")?;
        for x in w.as_slice() {
            writeln!(f, "{x}")?;
        }
        f.flush()?;
    }
    Ok(Outcome::Success)
}

pub fn cmd_check(args: &CheckArgs) -> Result<Outcome> {
    let phi = args.system.load()?;
    let system = LinearSystem::with_identity_input(phi)?;
    let family = args.family.build(system.n())?;
    let policy = RankPolicy { factor: args.rank_factor };
    let verdict = is_sparse_controllable(&system, &family, &policy, args.strategy)?;
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, &verdict.to_record()).map_err(|e| CoreError::Io(e.into()))?;
    writeln!(out)?;
    Ok(if verdict.controllable {
        Outcome::Success
    } else {
        Outcome::Negative
    })
}

pub fn cmd_bound(args: &BoundArgs) -> Result<Outcome> {
    let family = args.family.build(args.n)?;
    let params = BoundParams::new(args.big_c, args.small_c)?;
    let mut out = output(args.out.as_deref())?;
    writeln!(out, "{CSV_VERSION_LINE}")?;
    writeln!(out, "{BOUND_CSV_HEADER}")?;
    for &p in &args.p {
        let r = bound(args.model, &family, p, &params)?;
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            args.model,
            args.n,
            family.s(),
            p,
            family.kind_name(),
            params.big_c,
            params.small_c,
            r.q,
            r.raw_q,
            r.valid
        )?;
    }
    out.flush()?;
    Ok(Outcome::Success)
}

/// Reads `key = value` lines; `#` starts a comment.
pub fn parse_config(text: &str) -> Result<HashMap<String, String>> {
    let mut map = HashMap::new();
    for (idx, line) in text.lines().enumerate() {
        let t = line.split('#').next().unwrap_or("").trim();
        if t.is_empty() {
            continue;
        }
        let (k, v) = t
            .split_once('=')
            .ok_or_else(|| CoreError::parse(idx + 1, format!("expected key = value, got {t:?}")))?;
        map.insert(k.trim().to_ascii_lowercase().replace('-', "_"), v.trim().to_string());
    }
    Ok(map)
}

fn parse_list<T: std::str::FromStr>(key: &str, v: &str) -> Result<Vec<T>> {
    v.split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(|x| x.parse().map_err(|_| CoreError::param(format!("bad value {x:?} for {key}"))))
        .collect()
}

/// The sweep grid after merging the config file with command-line flags.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPlan {
    pub grid: Vec<ExperimentConfig>,
    pub json: bool,
    pub out: Option<PathBuf>,
}

const SWEEP_KEYS: &[&str] = &[
    "model", "n", "param", "p", "alpha", "family", "s", "m", "trials", "seed", "weights", "strategy", "raw", "format",
    "out",
];

pub fn build_sweep(args: &SweepArgs) -> Result<SweepPlan> {
    let file = match &args.config {
        Some(p) => parse_config(&fs::read_to_string(p).map_err(|e| {
            CoreError::Io(io::Error::new(e.kind(), format!("{}: {e}", p.display())))
        })?)?,
        None => HashMap::new(),
    };
    if let Some(k) = file.keys().find(|k| !SWEEP_KEYS.contains(&k.as_str())) {
        return Err(CoreError::param(format!("unknown config key {k:?}")));
    }
    let get = |k: &str| file.get(k).map(String::as_str);

    let model = args
        .model
        .clone()
        .or_else(|| get("model").map(str::to_string))
        .unwrap_or_else(|| "er-undirected".into());
    let ns = if args.n.is_empty() { parse_list("n", get("n").unwrap_or(""))? } else { args.n.clone() };
    let params = if !args.param.is_empty() {
        args.param.clone()
    } else {
        parse_list("param", get("param").or(get("p")).or(get("alpha")).unwrap_or(""))?
    };
    let families = if args.family.is_empty() {
        parse_list("family", get("family").unwrap_or("unconstrained"))?
    } else {
        args.family.clone()
    };
    let budgets = if args.s.is_empty() { parse_list("s", get("s").unwrap_or(""))? } else { args.s.clone() };
    let m = match args.m {
        Some(m) => Some(m),
        None => get("m").map(|v| v.parse().map_err(|_| CoreError::param(format!("bad m {v:?}")))).transpose()?,
    };
    let trials = match args.trials {
        Some(t) => t,
        None => get("trials").map_or(Ok(1000), |v| v.parse().map_err(|_| CoreError::param(format!("bad trials {v:?}"))))?,
    };
    let seed = match args.seed {
        Some(s) => s,
        None => get("seed")
            .ok_or_else(|| CoreError::param(format!("a seed is required (--seed, config key seed, or {SEED_ENV})")))?
            .parse()
            .map_err(|_| CoreError::param("bad seed"))?,
    };
    let weights = match args.weights {
        Some(w) => w,
        None => get("weights").map_or(Ok(WeightDist::Uniform), str::parse)?,
    };
    let strategy = match args.strategy {
        Some(s) => s,
        None => get("strategy").map_or(Ok(ConditionBStrategy::Auto), str::parse)?,
    };
    let raw = args.raw || get("raw").is_some_and(|v| matches!(v, "1" | "true" | "yes"));
    let format = args
        .format
        .clone()
        .or_else(|| get("format").map(str::to_string))
        .unwrap_or_else(|| "csv".into());
    let json = match format.as_str() {
        "csv" => false,
        "json" => true,
        other => return Err(CoreError::param(format!("unknown format {other:?}"))),
    };
    let out = args.out.clone().or_else(|| get("out").map(PathBuf::from));

    let mut grid = Vec::new();
    for &n in &ns {
        for &value in &params {
            let graph = GraphModel::from_name(&model, value)?;
            for kind in &families {
                for &s in &budgets {
                    let fm = if kind == "unconstrained" { None } else { Some(m.unwrap_or(s)) };
                    let family = SupportFamily::from_descriptor(kind, n, s, fm)?;
                    let mut c = ExperimentConfig::new(graph, family, seed).with_trials(trials);
                    c.weight_dist = weights;
                    c.strategy = strategy;
                    c.use_raw_adjacency = raw;
                    c.validate()?;
                    grid.push(c);
                }
            }
        }
    }
    if grid.is_empty() {
        return Err(CoreError::param("empty sweep grid: n, param and s must each have at least one value"));
    }
    Ok(SweepPlan { grid, json, out })
}

/// Completed rows of an existing sweep CSV, keyed by their identifying columns.
fn existing_rows(path: &Path) -> Result<HashMap<String, SweepRow>> {
    let mut rows = HashMap::new();
    if !path.exists() {
        return Ok(rows);
    }
    for line in open(path)?.lines() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') || t == SWEEP_CSV_HEADER {
            continue;
        }
        if let Ok(row) = SweepRow::from_csv(t) {
            rows.insert(row.key(), row);
        }
    }
    Ok(rows)
}

pub fn cmd_sweep(args: &SweepArgs) -> Result<Outcome> {
    let plan = build_sweep(args)?;
    let mut failures = 0;
    let mut run = |c: &ExperimentConfig| -> SweepRow {
        estimate_probability(c).unwrap_or_else(|e| {
            failures += 1;
            eprintln!("sweep point {} failed: {e}", c.key());
            SweepRow::failed(c, e.to_string())
        })
    };

    if plan.json {
        let rows: Vec<SweepRow> = plan.grid.iter().map(&mut run).collect();
        let mut out = output(plan.out.as_deref())?;
        write_sweep_json(&rows, &mut out)?;
        writeln!(out)?;
        out.flush()?;
    } else {
        let done = match &plan.out {
            Some(p) => existing_rows(p)?,
            None => HashMap::new(),
        };
        // rows are written one at a time so an interrupted run can resume
        let mut out = output(plan.out.as_deref())?;
        writeln!(out, "{CSV_VERSION_LINE}")?;
        writeln!(out, "{SWEEP_CSV_HEADER}")?;
        out.flush()?;
        for c in &plan.grid {
            let row = match done.get(&c.key()) {
                Some(r) => r.clone(),
                None => run(c),
            };
            writeln!(out, "{}", row.to_csv())?;
            out.flush()?;
        }
    }
    if failures > 0 {
        return Err(CoreError::Numerical(format!("{failures} sweep point(s) failed")));
    }
    Ok(Outcome::Success)
}

#[derive(Debug, Serialize)]
struct DesignSummary {
    feasible: bool,
    residual_norm: f64,
    tolerance: f64,
    horizon: usize,
    /// 1-based certifying support per step.
    supports: Vec<Vec<usize>>,
    controllable: Option<bool>,
}

fn write_plan<W: Write>(plan: &ControlPlan, mut w: W) -> Result<()> {
    writeln!(w, "{CSV_VERSION_LINE}")?;
    writeln!(w, "k,index,value")?;
    for (k, u) in plan.inputs.iter().enumerate() {
        for (i, &v) in u.iter().enumerate() {
            if v != 0.0 {
                writeln!(w, "{},{},{}", k + 1, i + 1, v)?;
            }
        }
    }
    Ok(())
}

pub fn cmd_design(args: &DesignArgs) -> Result<Outcome> {
    let phi = args.system.load()?;
    let n = phi.nrows();
    let family = args.family.build(n)?;
    let x0 = read_vector(&args.x0)?;
    let xf = read_vector(&args.xf)?;
    let problem = SteeringProblem::new(phi, x0, xf, family)?
        .with_horizon(args.horizon.unwrap_or(n))
        .with_tolerance(args.tol);
    let (plan, feasible, controllable) = match design_inputs(&problem) {
        Ok(plan) => (plan, true, None),
        Err(DesignError::Core(e)) => return Err(e),
        Err(DesignError::Infeasible(report)) => {
            eprintln!("{}", DesignError::Infeasible(report.clone()));
            let c = report.verdict.as_ref().map(|v| v.controllable);
            (report.plan, false, c)
        }
    };
    let mut out = output(args.plan_out.as_deref())?;
    write_plan(&plan, &mut out)?;
    out.flush()?;
    let summary = DesignSummary {
        feasible,
        residual_norm: plan.residual_norm,
        tolerance: args.tol,
        horizon: plan.horizon(),
        supports: plan.supports.iter().map(|s| s.one_based()).collect(),
        controllable,
    };
    let json = serde_json::to_string_pretty(&summary).map_err(|e| CoreError::Io(e.into()))?;
    match &args.summary_out {
        Some(p) => fs::write(p, json + "\n")?,
        None => eprintln!("{json}"),
    }
    Ok(if feasible { Outcome::Success } else { Outcome::Negative })
}

pub fn cmd_qtable(args: &QtableArgs) -> Result<Outcome> {
    let family = args.family.build(args.n)?;
    let mut out = output(args.out.as_deref())?;
    writeln!(out, "{CSV_VERSION_LINE}")?;
    writeln!(out, "family,N,s,m,t,Q,binomial")?;
    let m = family.m().map(|m| m.to_string()).unwrap_or_default();
    for t in 0..=family.s() {
        let q = count_subsets_q(t, &family)?;
        let c = binomial(args.n, t).map(|c| c.to_string()).unwrap_or_default();
        writeln!(out, "{},{},{},{},{},{},{}", family.kind_name(), args.n, family.s(), m, t, q, c)?;
    }
    out.flush()?;
    Ok(Outcome::Success)
}

pub fn execute(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Check(a) => cmd_check(a),
        Command::Bound(a) => cmd_bound(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Design(a) => cmd_design(a),
        Command::Qtable(a) => cmd_qtable(a),
    }
}

/// Parses the process arguments, runs the subcommand and maps the result to an exit code.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match execute(&cli) {
        Ok(Outcome::Success) => ExitCode::SUCCESS,
        Ok(Outcome::Negative) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
