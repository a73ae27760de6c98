//! Experiment harness: random instances, single trials, parameter sweeps
//! with CSV output, scaling fits, and the verification battery.

use std::collections::BTreeMap;
use std::io;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::drift::{index_distance, Violation};
use crate::error::{ConfigError, OracleError};
use crate::exec::{map_ordered, Parallelism};
use crate::graph::{mst_scalar, Edge, Graph, Objective};
use crate::gsemo::{run_gsemo, GsemoConfig, GsemoRunOptions};
use crate::nsga2::{min_safe_population, run_nsga2, CrowdingFormula, Nsga2Config, RunOptions};
use crate::oracle::{
    brute_force_pareto, conv_hull_extremals, extremal_trees, segment_weights, ExtremalFront, BRUTE_FORCE_MAX_EDGES,
};
use crate::run::{RunSummary, StopRule, TracePoint};
use crate::variation::{MechanismConfig, Mutation};

/// Deterministic random stream for one trial.
pub type TrialRng = ChaCha8Rng;

/// Random connected simple graph: a uniform random labelled spanning tree
/// (Prüfer decoding) plus `m - (n - 1)` distinct extra edges chosen
/// uniformly from the remaining vertex pairs. Weights are uniform in
/// `[1, w_max]` for both objectives and the edge order is shuffled.
pub fn generate_instance(n: usize, m: usize, w_max: u64, seed: u64) -> Result<Graph, ConfigError> {
    if n < 2 || m + 1 < n || m > n * (n - 1) / 2 {
        return Err(ConfigError::InfeasibleSize { n, m });
    }
    if w_max == 0 {
        return Err(ConfigError::ZeroWeightBound);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs: Vec<(usize, usize)> = random_tree(n, &mut rng);
    let mut present = vec![vec![false; n]; n];
    for &(u, v) in &pairs {
        present[u][v] = true;
        present[v][u] = true;
    }
    let mut rest: Vec<(usize, usize)> =
        (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).filter(|&(u, v)| !present[u][v]).collect();
    rest.shuffle(&mut rng);
    pairs.extend(rest.into_iter().take(m - (n - 1)));
    pairs.shuffle(&mut rng);
    let edges = pairs
        .into_iter()
        .map(|(u, v)| Edge { u, v, w1: rng.gen_range(1..=w_max), w2: rng.gen_range(1..=w_max) })
        .collect();
    Graph::new(n, edges).map_err(|e| ConfigError::Sweep(format!("generated instance rejected: {e}")))
}

fn random_tree<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<(usize, usize)> {
    if n == 2 {
        return vec![(0, 1)];
    }
    let code: Vec<usize> = (0..n - 2).map(|_| rng.gen_range(0..n)).collect();
    let mut degree = vec![1usize; n];
    for &v in &code {
        degree[v] += 1;
    }
    let mut edges = Vec::with_capacity(n - 1);
    for &v in &code {
        let leaf = (0..n).find(|&u| degree[u] == 1).expect("a leaf always exists");
        edges.push((leaf.min(v), leaf.max(v)));
        degree[leaf] -= 1;
        degree[v] -= 1;
    }
    let last: Vec<usize> = (0..n).filter(|&u| degree[u] == 1).collect();
    edges.push((last[0], last[1]));
    edges
}

/// Stable identifier for a generated instance.
pub fn instance_id(n: usize, m: usize, w_max: u64, seed: u64) -> String {
    format!("n{n}-m{m}-w{w_max}-s{seed}")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Nsga2,
    Gsemo,
}

impl Algorithm {
    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Nsga2 => "nsga2",
            Algorithm::Gsemo => "gsemo",
        }
    }
}

impl std::str::FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "nsga2" => Ok(Algorithm::Nsga2),
            "gsemo" => Ok(Algorithm::Gsemo),
            other => Err(format!("unknown algorithm `{other}`")),
        }
    }
}

/// Everything that determines one trial besides the instance.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub algorithm: Algorithm,
    pub mechanism: MechanismConfig,
    /// NSGA-II population; defaults to `4 ((n-1) w_min + 1)`.
    pub pop_size: Option<usize>,
    pub seed: u64,
    /// Generations (NSGA-II) or steps (GSEMO); defaults per [`default_budget`].
    pub budget: Option<u64>,
    pub stop: StopRule,
    pub monitors: bool,
    pub trace: bool,
    pub allow_unsafe_population: bool,
    /// GSEMO per-bit flip probability override (default `1/m`).
    pub gsemo_rate: Option<f64>,
    pub crowding: CrowdingFormula,
}

impl ExperimentConfig {
    pub fn new(algorithm: Algorithm, seed: u64) -> Self {
        ExperimentConfig {
            algorithm,
            mechanism: MechanismConfig::default(),
            pop_size: None,
            seed,
            budget: None,
            stop: StopRule::Coverage,
            monitors: false,
            trace: false,
            allow_unsafe_population: false,
            gsemo_rate: None,
            crowding: CrowdingFormula::Forward,
        }
    }
}

/// `10 m^2 ln(n w_max + 1)` generations for NSGA-II and
/// `10 e m^2 ((n-1) w_min + 1) ln(n w_max + 1)` evaluations for GSEMO.
pub fn default_budget(g: &Graph, algorithm: Algorithm) -> u64 {
    let m = g.m() as f64;
    let log = ((g.n() as f64) * g.w_max() as f64 + 1.0).ln();
    let base = 10.0 * m * m * log;
    match algorithm {
        Algorithm::Nsga2 => base.ceil() as u64,
        Algorithm::Gsemo => (base * std::f64::consts::E * g.incomparable_bound() as f64).ceil() as u64,
    }
}

/// Telemetry of one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub instance: String,
    pub n: usize,
    pub m: usize,
    pub w_max: u64,
    pub w_min: u64,
    pub algorithm: Algorithm,
    pub mutation: Mutation,
    pub crossover_q: Option<f64>,
    pub pop_size: Option<usize>,
    pub seed: u64,
    pub budget: u64,
    pub summary: RunSummary,
    pub wall_time: Duration,
}

impl RunRecord {
    pub fn gen_coverage(&self) -> Option<u64> {
        self.summary.gen_coverage
    }

    pub fn evaluations(&self) -> u64 {
        self.summary.evaluations
    }

    pub fn violations(&self) -> &[Violation] {
        &self.summary.violations
    }

    pub fn trace(&self) -> &[TracePoint] {
        &self.summary.trace
    }

    pub fn csv_row(&self) -> CsvRow {
        CsvRow {
            instance: self.instance.clone(),
            n: self.n,
            m: self.m,
            wmax: self.w_max,
            wmin: self.w_min,
            algo: self.algorithm.name().to_string(),
            mutation: self.mutation.to_string(),
            crossover_q: self.crossover_q,
            pop_size: self.pop_size,
            seed: self.seed,
            gen_first_tree: self.summary.gen_first_tree,
            gen_coverage: self.summary.gen_coverage,
            evals: self.summary.evaluations,
            final_d: self.summary.final_potential.total().map(|d| d.to_string()),
            violations: self.summary.violations.len(),
            budget_hit: self.summary.budget_hit,
        }
    }
}

/// One CSV line; wall time is left out so that output is reproducible.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub instance: String,
    pub n: usize,
    pub m: usize,
    pub wmax: u64,
    pub wmin: u64,
    pub algo: String,
    pub mutation: String,
    pub crossover_q: Option<f64>,
    #[serde(rename = "N")]
    pub pop_size: Option<usize>,
    pub seed: u64,
    pub gen_first_tree: Option<u64>,
    pub gen_coverage: Option<u64>,
    pub evals: u64,
    pub final_d: Option<String>,
    pub violations: usize,
    pub budget_hit: bool,
}

pub const CSV_HEADER: &str =
    "instance,n,m,wmax,wmin,algo,mutation,crossover_q,N,seed,gen_first_tree,gen_coverage,evals,final_d,violations,budget_hit";

pub fn write_csv<W: io::Write>(records: &[RunRecord], out: W) -> Result<(), csv::Error> {
    let mut writer = csv::Writer::from_writer(out);
    if records.is_empty() {
        writer.write_record(CSV_HEADER.split(','))?;
    }
    for r in records {
        writer.serialize(r.csv_row())?;
    }
    writer.flush()?;
    Ok(())
}

pub fn read_csv<R: io::Read>(input: R) -> Result<Vec<CsvRow>, csv::Error> {
    csv::Reader::from_reader(input).deserialize().collect()
}

/// Runs one trial against a precomputed extremal front.
pub fn run_trial_with_front(
    g: &Graph,
    instance: &str,
    front: &ExtremalFront,
    cfg: &ExperimentConfig,
) -> Result<RunRecord, ConfigError> {
    let start = Instant::now();
    let rng = TrialRng::seed_from_u64(cfg.seed);
    let budget = cfg.budget.unwrap_or_else(|| default_budget(g, cfg.algorithm));
    let (summary, pop_size) = match cfg.algorithm {
        Algorithm::Nsga2 => {
            let pop = cfg.pop_size.unwrap_or_else(|| min_safe_population(g));
            let engine = Nsga2Config { pop_size: pop, mechanism: cfg.mechanism, crowding: cfg.crowding, fault: None };
            let opts = RunOptions {
                stop: cfg.stop,
                budget,
                monitors: cfg.monitors,
                trace: cfg.trace,
                allow_unsafe_population: cfg.allow_unsafe_population,
            };
            (run_nsga2(g, engine, front.clone(), &opts, rng)?, Some(pop))
        }
        Algorithm::Gsemo => {
            if cfg.mechanism != MechanismConfig::default() {
                return Err(ConfigError::GsemoMechanism(cfg.mechanism.to_string()));
            }
            let opts = GsemoRunOptions { stop: cfg.stop, budget, monitors: cfg.monitors, trace: cfg.trace };
            let engine = GsemoConfig { rate: cfg.gsemo_rate, fault: None };
            (run_gsemo(g, engine, front.clone(), &opts, rng)?, None)
        }
    };
    Ok(RunRecord {
        instance: instance.to_string(),
        n: g.n(),
        m: g.m(),
        w_max: g.w_max(),
        w_min: g.w_min(),
        algorithm: cfg.algorithm,
        mutation: cfg.mechanism.mutation,
        crossover_q: cfg.mechanism.crossover_q,
        pop_size,
        seed: cfg.seed,
        budget,
        summary,
        wall_time: start.elapsed(),
    })
}

/// Computes the extremal front and runs one trial.
pub fn run_trial(g: &Graph, instance: &str, cfg: &ExperimentConfig) -> Result<RunRecord, ConfigError> {
    let front = extremal_trees(g).map_err(|e| ConfigError::Sweep(e.to_string()))?.front();
    run_trial_with_front(g, instance, &front, cfg)
}

/// Instances of one sweep row: every listed edge count for one `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub n: usize,
    /// Edge counts; defaults to the complete graph.
    #[serde(default)]
    pub m: Vec<usize>,
    pub wmax: u64,
    /// Instance generator seed; defaults to the sweep's `base_seed`.
    pub seed: Option<u64>,
}

/// One algorithm/mechanism column of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MechanismSpec {
    pub algo: Algorithm,
    #[serde(default = "default_mutation")]
    pub mutation: String,
    #[serde(default = "default_c")]
    pub c: f64,
    pub crossover_q: Option<f64>,
    pub pop_size: Option<usize>,
    pub budget: Option<u64>,
    #[serde(default)]
    pub monitors: bool,
}

fn default_mutation() -> String {
    "standard".into()
}

fn default_c() -> f64 {
    1.0
}

impl MechanismSpec {
    pub fn mechanism(&self) -> Result<MechanismConfig, ConfigError> {
        let mutation = match self.mutation.as_str() {
            "standard" => Mutation::Standard { c: self.c },
            "balanced" => Mutation::Balanced,
            other => return Err(ConfigError::Sweep(format!("unknown mutation `{other}`"))),
        };
        Ok(MechanismConfig { mutation, crossover_q: self.crossover_q })
    }
}

/// Sweep description, read from TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    /// Seeds per (instance, mechanism) cell.
    pub trials: u64,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default = "default_stop")]
    pub stop: String,
    pub instances: Vec<InstanceSpec>,
    pub mechanisms: Vec<MechanismSpec>,
}

fn default_stop() -> String {
    "coverage".into()
}

impl SweepConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Sweep(e.to_string()))
    }
}

/// A generated instance with its id and extremal front.
#[derive(Debug, Clone)]
pub struct PreparedInstance {
    pub id: String,
    pub graph: Graph,
    pub front: ExtremalFront,
}

impl PreparedInstance {
    pub fn generate(n: usize, m: usize, w_max: u64, seed: u64) -> Result<Self, ConfigError> {
        let graph = generate_instance(n, m, w_max, seed)?;
        Self::new(instance_id(n, m, w_max, seed), graph)
    }

    /// Computes the front and runs the oracle's internal consistency checks.
    pub fn new(id: String, graph: Graph) -> Result<Self, ConfigError> {
        let report = check_oracle(&graph);
        if !report.passed() {
            return Err(ConfigError::Sweep(format!("{id}: oracle check failed: {}", report.failures.join("; "))));
        }
        let front = extremal_trees(&graph).map_err(|e| ConfigError::Sweep(e.to_string()))?.front();
        Ok(PreparedInstance { id, graph, front })
    }
}

/// Outcome of one sweep cell: a record or the reason it could not run.
pub type SweepRow = Result<RunRecord, (String, Algorithm, u64, String)>;

/// Runs every (instance, mechanism, seed) combination. Rows come back sorted
/// by (instance, algorithm, mechanism, seed) whatever the execution order.
pub fn sweep(cfg: &SweepConfig, parallelism: Parallelism) -> Result<Vec<SweepRow>, ConfigError> {
    let stop: StopRule = cfg.stop.parse().map_err(ConfigError::Sweep)?;
    let mut instances = Vec::new();
    for spec in &cfg.instances {
        let ms = if spec.m.is_empty() { vec![spec.n * (spec.n - 1) / 2] } else { spec.m.clone() };
        for m in ms {
            instances.push(PreparedInstance::generate(spec.n, m, spec.wmax, spec.seed.unwrap_or(cfg.base_seed))?);
        }
    }
    let mut jobs = Vec::new();
    for (i, _) in instances.iter().enumerate() {
        for (k, spec) in cfg.mechanisms.iter().enumerate() {
            let mechanism = spec.mechanism()?;
            for t in 0..cfg.trials {
                let mut exp = ExperimentConfig::new(spec.algo, cfg.base_seed + t);
                exp.mechanism = mechanism;
                exp.pop_size = spec.pop_size;
                exp.budget = spec.budget;
                exp.monitors = spec.monitors;
                exp.stop = stop;
                jobs.push((i, k, exp));
            }
        }
    }
    let rows = map_ordered(&jobs, parallelism, |(i, _, exp)| {
        let inst = &instances[*i];
        run_trial_with_front(&inst.graph, &inst.id, &inst.front, exp)
            .map_err(|e| (inst.id.clone(), exp.algorithm, exp.seed, e.to_string()))
    });
    let mut keyed: Vec<((String, Algorithm, usize, u64), SweepRow)> = jobs
        .iter()
        .zip(rows)
        .map(|((i, k, exp), row)| ((instances[*i].id.clone(), exp.algorithm, *k, exp.seed), row))
        .collect();
    keyed.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(keyed.into_iter().map(|(_, row)| row).collect())
}

/// Writes sweep rows; failed cells keep their identifying columns and are
/// flagged as budget hits with empty measurements.
pub fn write_sweep_csv<W: io::Write>(rows: &[SweepRow], out: W) -> Result<(), csv::Error> {
    let mut writer = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    writer.write_record(CSV_HEADER.split(','))?;
    for row in rows {
        match row {
            Ok(r) => {
                writer.serialize(r.csv_row())?;
            }
            Err((instance, algo, seed, _)) => {
                let seed = seed.to_string();
                let fields =
                    [instance.as_str(), "", "", "", "", algo.name(), "", "", "", &seed, "", "", "", "", "", "true"];
                writer.write_record(fields)?;
            }
        }
    }
    writer.flush()?;
    Ok(())
}

/// Median generations of one (n, m, w_max) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellMedian {
    pub n: usize,
    pub m: usize,
    pub w_max: u64,
    pub trials: usize,
    /// `None` when at least half the trials missed coverage.
    pub median: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingReport {
    pub cells: Vec<CellMedian>,
    /// Slope of log median against log m within each `n * w_max` regime.
    pub m_exponent: Option<f64>,
    /// Coefficient of log log(n w_max) in a joint fit, when regimes vary.
    pub loglog_exponent: Option<f64>,
    /// Share of trials covering within `C m^2 ln(n w_max + 1)` generations.
    pub compliance: f64,
    pub insufficient: bool,
}

/// Median of a sample where `None` counts as larger than every value.
pub fn censored_median(values: &[Option<u64>]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v: Vec<Option<u64>> = values.to_vec();
    v.sort_by_key(|x| x.unwrap_or(u64::MAX));
    let mid = v.len() / 2;
    if v.len() % 2 == 1 {
        v[mid].map(|x| x as f64)
    } else {
        Some((v[mid - 1]? as f64 + v[mid]? as f64) / 2.0)
    }
}

pub fn scaling_budget(constant: f64, n: usize, m: usize, w_max: u64) -> f64 {
    constant * (m * m) as f64 * ((n as f64) * w_max as f64 + 1.0).ln()
}

/// Medians per cell, m-exponent, and budget compliance.
pub fn fit_scaling(records: &[RunRecord], budget_constant: f64) -> ScalingReport {
    let mut cells: BTreeMap<(usize, usize, u64), Vec<Option<u64>>> = BTreeMap::new();
    let mut within = 0usize;
    for r in records {
        cells.entry((r.n, r.m, r.w_max)).or_default().push(r.gen_coverage());
        if r.gen_coverage().is_some_and(|g| g as f64 <= scaling_budget(budget_constant, r.n, r.m, r.w_max)) {
            within += 1;
        }
    }
    let cells: Vec<CellMedian> = cells
        .into_iter()
        .map(|((n, m, w_max), gens)| CellMedian { n, m, w_max, trials: gens.len(), median: censored_median(&gens) })
        .collect();
    let compliance = if records.is_empty() { 0.0 } else { within as f64 / records.len() as f64 };

    let points: Vec<(f64, f64, f64)> = cells
        .iter()
        .filter_map(|c| {
            let median = c.median.filter(|&x| x > 0.0)?;
            Some(((c.n as f64 * c.w_max as f64), (c.m as f64).ln(), median.ln()))
        })
        .collect();
    let insufficient = points.len() < 3;
    ScalingReport {
        m_exponent: if insufficient { None } else { within_regime_slope(&points) },
        loglog_exponent: if insufficient { None } else { joint_fit(&points) },
        cells,
        compliance,
        insufficient,
    }
}

// points are (n * w_max, ln m, ln median)
fn within_regime_slope(points: &[(f64, f64, f64)]) -> Option<f64> {
    let mut groups: BTreeMap<u64, Vec<(f64, f64)>> = BTreeMap::new();
    for &(regime, x, y) in points {
        groups.entry(regime as u64).or_default().push((x, y));
    }
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for g in groups.values() {
        let k = g.len() as f64;
        let mx = g.iter().map(|p| p.0).sum::<f64>() / k;
        let my = g.iter().map(|p| p.1).sum::<f64>() / k;
        for &(x, y) in g {
            sxy += (x - mx) * (y - my);
            sxx += (x - mx) * (x - mx);
        }
    }
    (sxx > 0.0).then(|| sxy / sxx)
}

fn joint_fit(points: &[(f64, f64, f64)]) -> Option<f64> {
    let loglog: Vec<f64> = points.iter().map(|p| p.0.ln().ln()).collect();
    let varies = loglog.iter().any(|&v| (v - loglog[0]).abs() > 1e-12);
    if !varies || points.len() < 4 {
        return None;
    }
    let rows = points.len();
    let design = DMatrix::from_fn(rows, 3, |i, j| match j {
        0 => 1.0,
        1 => points[i].1,
        _ => loglog[i],
    });
    let target = DVector::from_iterator(rows, points.iter().map(|p| p.2));
    let svd = design.svd(true, true);
    let beta = svd.solve(&target, 1e-12).ok()?;
    Some(beta[2])
}

/// Paired one-sided sign test: does the first sample tend to be smaller?
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignTest {
    pub wins: usize,
    pub losses: usize,
    pub ties: usize,
    /// `P(X >= wins)` for `X ~ Binomial(wins + losses, 1/2)`.
    pub p_value: f64,
}

/// Pairs `first[k]` with `second[k]`; a missing value ranks above every
/// observed one and two missing values tie.
pub fn paired_sign_test(first: &[Option<u64>], second: &[Option<u64>]) -> SignTest {
    let key = |x: &Option<u64>| x.map_or(u128::MAX, u128::from);
    let (mut wins, mut losses, mut ties) = (0, 0, 0);
    for (a, b) in first.iter().zip(second) {
        match key(a).cmp(&key(b)) {
            std::cmp::Ordering::Less => wins += 1,
            std::cmp::Ordering::Greater => losses += 1,
            std::cmp::Ordering::Equal => ties += 1,
        }
    }
    SignTest { wins, losses, ties, p_value: binomial_upper_tail(wins + losses, wins) }
}

fn binomial_upper_tail(trials: usize, at_least: usize) -> f64 {
    let mut term = 0.5f64.powi(trials as i32);
    let mut tail = 0.0;
    for k in 0..=trials {
        if k >= at_least {
            tail += term;
        }
        term *= (trials - k) as f64 / (k + 1) as f64;
    }
    tail.min(1.0)
}

/// Which verification checks to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Check {
    Oracle,
    Elitism,
    Antichain,
    Drift,
}

impl std::str::FromStr for Check {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "oracle" => Ok(Check::Oracle),
            "elitism" => Ok(Check::Elitism),
            "antichain" => Ok(Check::Antichain),
            "drift" => Ok(Check::Drift),
            other => Err(format!("unknown check `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckReport {
    pub check: Check,
    pub failures: Vec<String>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Oracle self-consistency: convex chain structure, endpoint optimality,
/// scalar optimality of each vertex for its supporting weights, and (when
/// the instance is small enough) agreement with brute force including the
/// positivity and uniqueness of every `d_i` over the Pareto front.
pub fn check_oracle(g: &Graph) -> CheckReport {
    let mut failures = Vec::new();
    let trees = match extremal_trees(g) {
        Ok(t) => t,
        Err(e) => {
            return CheckReport { check: Check::Oracle, failures: vec![e.to_string()] };
        }
    };
    let front = trees.front();
    if !front.is_convex_chain() {
        failures.push(format!("front {:?} is not a strictly convex chain", front.points));
    }
    if front.len() > g.incomparable_bound() {
        failures.push(format!("{} extremal points exceed bound {}", front.len(), g.incomparable_bound()));
    }
    let q = &front.points;
    if mst_scalar(g, 1, 0, Objective::Second).weights != q[0] {
        failures.push("q_1 is not the lexicographic w1 minimum".into());
    }
    if mst_scalar(g, 0, 1, Objective::First).weights != q[q.len() - 1] {
        failures.push("q_r is not the lexicographic w2 minimum".into());
    }
    for (i, tree) in trees.trees.iter().enumerate() {
        let neighbours = [i.checked_sub(1), (i + 1 < q.len()).then_some(i + 1)];
        for j in neighbours.into_iter().flatten() {
            let (l, r) = if j < i { (q[j], q[i]) } else { (q[i], q[j]) };
            let (a, b) = segment_weights(&l, &r);
            let best = mst_scalar(g, a, b, Objective::First).scalar(a, b);
            if tree.scalar(a, b) != best {
                failures.push(format!("q_{} is not optimal for weights ({a}, {b})", i + 1));
            }
        }
    }
    if g.m() <= BRUTE_FORCE_MAX_EDGES {
        match brute_force_pareto(g) {
            Ok(pareto) => {
                match conv_hull_extremals(&pareto.points) {
                    Ok(hull) if hull == front => {}
                    Ok(hull) => failures.push(format!("parametric {:?} != brute force {:?}", q, hull.points)),
                    Err(OracleError::EmptyInput) => failures.push("no spanning tree enumerated".into()),
                    Err(e) => failures.push(e.to_string()),
                }
                failures.extend(lemma_four_failures(&front, &pareto.points));
            }
            Err(e) => failures.push(e.to_string()),
        }
    }
    CheckReport { check: Check::Oracle, failures }
}

/// Violations of `d_i(p) >= 0` with equality exactly at `p = q_i`.
pub fn lemma_four_failures(front: &ExtremalFront, points: &[crate::objective::FitnessVector]) -> Vec<String> {
    let mut failures = Vec::new();
    for (i, qi) in front.points.iter().enumerate() {
        for p in points {
            let d = index_distance(front, i, p);
            if d < 0 || (d == 0) != (p == qi) {
                failures.push(format!("d_{}({p}) = {d}", i + 1));
            }
        }
    }
    failures
}

/// Runs the requested checks on one instance with `seeds` trials per
/// engine check.
pub fn verify(g: &Graph, checks: &[Check], seeds: u64) -> Vec<CheckReport> {
    let front = extremal_trees(g).map(|t| t.front());
    let mut reports = Vec::new();
    for &check in checks {
        if check == Check::Oracle {
            reports.push(check_oracle(g));
            continue;
        }
        let Ok(front) = front.clone() else {
            reports.push(CheckReport { check, failures: vec!["oracle failed".into()] });
            continue;
        };
        let mut failures = Vec::new();
        for seed in 0..seeds {
            let wanted = |v: &Violation| match check {
                Check::Elitism => {
                    matches!(
                        v,
                        Violation::Elitism { .. } | Violation::CrowdingClaim { .. } | Violation::RankOneBound { .. }
                    )
                }
                Check::Antichain => matches!(v, Violation::Antichain { .. } | Violation::ArchiveSize { .. }),
                Check::Drift => matches!(v, Violation::PotentialIncrease { .. } | Violation::NegativeDistance { .. }),
                Check::Oracle => false,
            };
            let mut runs = Vec::new();
            if matches!(check, Check::Elitism | Check::Drift) {
                let cfg = Nsga2Config::new(min_safe_population(g), MechanismConfig::default());
                let opts = RunOptions {
                    stop: StopRule::BudgetOnly,
                    budget: 500,
                    monitors: true,
                    trace: false,
                    allow_unsafe_population: false,
                };
                runs.push(("nsga2", run_nsga2(g, cfg, front.clone(), &opts, TrialRng::seed_from_u64(seed))));
            }
            if matches!(check, Check::Antichain | Check::Drift) {
                let opts = GsemoRunOptions { stop: StopRule::BudgetOnly, budget: 20_000, monitors: true, trace: false };
                runs.push((
                    "gsemo",
                    run_gsemo(g, GsemoConfig::default(), front.clone(), &opts, TrialRng::seed_from_u64(seed)),
                ));
            }
            for (engine, run) in runs {
                match run {
                    Ok(summary) => failures.extend(
                        summary.violations.iter().filter(|v| wanted(v)).map(|v| format!("{engine} seed {seed}: {v}")),
                    ),
                    Err(e) => failures.push(format!("{engine} seed {seed}: {e}")),
                }
            }
        }
        reports.push(CheckReport { check, failures });
    }
    reports
}
