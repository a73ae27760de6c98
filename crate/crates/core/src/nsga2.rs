//! NSGA-II: fast non-dominated sorting, crowding distance, survival
//! selection and the generational loop.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::ConfigError;
use crate::graph::{Genotype, Graph};
use crate::objective::{evaluate, FitnessVector};
use crate::oracle::ExtremalFront;
use crate::run::{RunSummary, StopRule, TraceMode, Tracker};
use crate::variation::{generate_offspring, MechanismConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct Individual {
    pub genotype: Genotype,
    pub fitness: FitnessVector,
    pub rank: Option<usize>,
    pub crowding: Option<f64>,
}

impl Individual {
    pub fn new(g: &Graph, genotype: Genotype) -> Self {
        let fitness = evaluate(g, &genotype);
        Individual { genotype, fitness, rank: None, crowding: None }
    }
}

/// Fronts `F_1, F_2, ...` as indices into the sorted collection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrontPartition {
    pub fronts: Vec<Vec<usize>>,
}

impl FrontPartition {
    /// Rank (1-based) of every input position.
    pub fn ranks(&self, len: usize) -> Vec<usize> {
        let mut ranks = vec![0; len];
        for (k, front) in self.fronts.iter().enumerate() {
            for &i in front {
                ranks[i] = k + 1;
            }
        }
        ranks
    }
}

/// Deb's fast non-dominated sort, `O(|R|^2)` comparisons.
pub fn fast_non_dominated_sort(fitness: &[FitnessVector]) -> FrontPartition {
    let len = fitness.len();
    let mut dominated_by_me: Vec<Vec<usize>> = vec![Vec::new(); len];
    let mut domination_count = vec![0usize; len];
    for i in 0..len {
        for j in i + 1..len {
            if fitness[i].strictly_dominates(&fitness[j]) {
                dominated_by_me[i].push(j);
                domination_count[j] += 1;
            } else if fitness[j].strictly_dominates(&fitness[i]) {
                dominated_by_me[j].push(i);
                domination_count[i] += 1;
            }
        }
    }
    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..len).filter(|&i| domination_count[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            for &j in &dominated_by_me[i] {
                domination_count[j] -= 1;
                if domination_count[j] == 0 {
                    next.push(j);
                }
            }
        }
        next.sort_unstable();
        fronts.push(std::mem::replace(&mut current, next));
    }
    FrontPartition { fronts }
}

/// Which gap an interior individual is credited with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CrowdingFormula {
    /// `(f(x_{i+1}) - f(x_i)) / (f(x_N) - f(x_1))`.
    #[default]
    Forward,
    /// Deb's original `(f(x_{i+1}) - f(x_{i-1})) / (f(x_N) - f(x_1))`.
    Symmetric,
}

/// Crowding distance of each member of a front, summed over both objectives.
///
/// Per objective the front is sorted by that objective, then the other,
/// then input position. The first and last of each sorting get `+inf`; an
/// objective with zero range contributes nothing to interior members.
pub fn crowding_distance(front: &[FitnessVector], formula: CrowdingFormula) -> Vec<f64> {
    let len = front.len();
    let mut distance = vec![0.0; len];
    if len == 0 {
        return distance;
    }
    type SortKey = fn(&FitnessVector) -> (u128, u128);
    let keys: [SortKey; 2] = [|f| (f.f1, f.f2), |f| (f.f2, f.f1)];
    for key in keys {
        let mut order: Vec<usize> = (0..len).collect();
        order.sort_by_key(|&i| (key(&front[i]), i));
        let value = |pos: usize| key(&front[order[pos]]).0;
        distance[order[0]] = f64::INFINITY;
        distance[order[len - 1]] = f64::INFINITY;
        let range = value(len - 1) - value(0);
        if range == 0 {
            continue;
        }
        for pos in 1..len.saturating_sub(1) {
            let gap = match formula {
                CrowdingFormula::Forward => value(pos + 1) - value(pos),
                CrowdingFormula::Symmetric => value(pos + 1) - value(pos - 1),
            };
            distance[order[pos]] += gap as f64 / range as f64;
        }
    }
    distance
}

/// Fronts and crowding seen by one survival selection, for the monitors.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SelectionInfo {
    pub first_front: Vec<FitnessVector>,
    pub cut_front: Vec<FitnessVector>,
    pub cut_crowding: Vec<f64>,
}

/// Keeps whole fronts while they fit strictly below `n`, then fills the
/// rest from the cut front by descending crowding distance with uniformly
/// random tie-breaking. Sets `rank` on all members of `combined` and
/// `crowding` on members of the cut front.
pub fn survival_selection<R: Rng + ?Sized>(
    mut combined: Vec<Individual>,
    n: usize,
    formula: CrowdingFormula,
    rng: &mut R,
) -> (Vec<Individual>, SelectionInfo) {
    assert!(combined.len() >= n, "cannot select {n} from {}", combined.len());
    let fitness: Vec<FitnessVector> = combined.iter().map(|i| i.fitness).collect();
    let partition = fast_non_dominated_sort(&fitness);
    for (k, front) in partition.fronts.iter().enumerate() {
        for &i in front {
            combined[i].rank = Some(k + 1);
            combined[i].crowding = None;
        }
    }
    let mut info = SelectionInfo {
        first_front: partition.fronts[0].iter().map(|&i| fitness[i]).collect(),
        ..SelectionInfo::default()
    };

    let mut keep: Vec<usize> = Vec::with_capacity(n);
    for front in &partition.fronts {
        if keep.len() + front.len() < n {
            keep.extend(front);
            continue;
        }
        let values: Vec<FitnessVector> = front.iter().map(|&i| fitness[i]).collect();
        let crowding = crowding_distance(&values, formula);
        for (&i, &c) in front.iter().zip(&crowding) {
            combined[i].crowding = Some(c);
        }
        let mut order: Vec<usize> = (0..front.len()).collect();
        order.shuffle(rng);
        order.sort_by(|&a, &b| crowding[b].total_cmp(&crowding[a]));
        keep.extend(order[..n - keep.len()].iter().map(|&pos| front[pos]));
        info.cut_front = values;
        info.cut_crowding = crowding;
        break;
    }

    keep.sort_unstable();
    let mut slots: Vec<Option<Individual>> = combined.into_iter().map(Some).collect();
    let survivors = keep.into_iter().map(|i| slots[i].take().expect("index kept once")).collect();
    (survivors, info)
}

/// Deliberate selection bugs for exercising the monitors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SurvivalFault {
    /// After selection, drop every survivor carrying one randomly chosen
    /// rank-1 value that a parent also had, refilling with copies of other
    /// survivors.
    DropRankOneValue,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Nsga2Config {
    pub pop_size: usize,
    pub mechanism: MechanismConfig,
    pub crowding: CrowdingFormula,
    pub fault: Option<SurvivalFault>,
}

impl Nsga2Config {
    pub fn new(pop_size: usize, mechanism: MechanismConfig) -> Self {
        Nsga2Config { pop_size, mechanism, crowding: CrowdingFormula::default(), fault: None }
    }
}

/// `4 ((n-1) w_min + 1)`, the smallest population with guaranteed elitism.
pub fn min_safe_population(g: &Graph) -> usize {
    4 * g.incomparable_bound()
}

/// One NSGA-II run in progress.
pub struct Nsga2<'g, R> {
    graph: &'g Graph,
    cfg: Nsga2Config,
    population: Vec<Individual>,
    generation: u64,
    evaluations: u64,
    rng: R,
}

impl<'g, R: Rng> Nsga2<'g, R> {
    /// Starts from `pop_size` uniformly random genotypes.
    pub fn new(graph: &'g Graph, cfg: Nsga2Config, mut rng: R) -> Result<Self, ConfigError> {
        let genotypes = (0..cfg.pop_size)
            .map(|_| Genotype::from_bits((0..graph.m()).map(|_| rng.gen::<bool>()).collect()))
            .collect();
        Self::with_population(graph, cfg, genotypes, rng)
    }

    pub fn with_population(
        graph: &'g Graph,
        cfg: Nsga2Config,
        genotypes: Vec<Genotype>,
        rng: R,
    ) -> Result<Self, ConfigError> {
        cfg.mechanism.validate(graph)?;
        if cfg.pop_size < 2 || !cfg.pop_size.is_multiple_of(2) || genotypes.len() != cfg.pop_size {
            return Err(ConfigError::PopulationShape(cfg.pop_size));
        }
        let population: Vec<Individual> = genotypes.into_iter().map(|s| Individual::new(graph, s)).collect();
        let evaluations = population.len() as u64;
        Ok(Nsga2 { graph, cfg, population, generation: 0, evaluations, rng })
    }

    pub fn population(&self) -> &[Individual] {
        &self.population
    }

    pub fn fitness_values(&self) -> Vec<FitnessVector> {
        self.population.iter().map(|i| i.fitness).collect()
    }

    pub fn generation(&self) -> u64 {
        self.generation
    }

    pub fn evaluations(&self) -> u64 {
        self.evaluations
    }

    /// One generation with the configured mechanism.
    pub fn step(&mut self) -> SelectionInfo {
        let mechanism = self.cfg.mechanism;
        self.step_with(|g, parents, rng| generate_offspring(g, parents, &mechanism, rng))
    }

    /// One generation with a caller-supplied offspring generator, which must
    /// return one child per parent.
    pub fn step_with<F>(&mut self, make_offspring: F) -> SelectionInfo
    where
        F: FnOnce(&Graph, &[&Genotype], &mut R) -> Vec<Genotype>,
    {
        let parents: Vec<&Genotype> = self.population.iter().map(|i| &i.genotype).collect();
        let children = make_offspring(self.graph, &parents, &mut self.rng);
        assert_eq!(children.len(), self.cfg.pop_size, "offspring population must have size N");
        let parent_values: Vec<FitnessVector> = self.fitness_values();
        let mut combined = std::mem::take(&mut self.population);
        combined.extend(children.into_iter().map(|s| Individual::new(self.graph, s)));
        self.evaluations += self.cfg.pop_size as u64;

        let (mut survivors, info) = survival_selection(combined, self.cfg.pop_size, self.cfg.crowding, &mut self.rng);
        if let Some(SurvivalFault::DropRankOneValue) = self.cfg.fault {
            corrupt_survivors(&mut survivors, &info, &parent_values, &mut self.rng);
        }
        self.population = survivors;
        self.generation += 1;
        info
    }
}

fn corrupt_survivors<R: Rng + ?Sized>(
    survivors: &mut Vec<Individual>,
    info: &SelectionInfo,
    parents: &[FitnessVector],
    rng: &mut R,
) {
    // a victim must leave at least one survivor to copy from
    let mut candidates: Vec<FitnessVector> = info
        .first_front
        .iter()
        .filter(|f| parents.contains(f) && survivors.iter().any(|i| i.fitness != **f))
        .copied()
        .collect();
    candidates.sort();
    candidates.dedup();
    let Some(&victim) = candidates.choose(rng) else { return };
    let n = survivors.len();
    survivors.retain(|i| i.fitness != victim);
    while survivors.len() < n {
        let copy = survivors[rng.gen_range(0..survivors.len())].clone();
        survivors.push(copy);
    }
}

/// Options for [`run_nsga2`] beyond the engine configuration.
#[derive(Debug, Clone)]
pub struct RunOptions {
    pub stop: StopRule,
    /// Maximum number of generations.
    pub budget: u64,
    pub monitors: bool,
    pub trace: bool,
    /// Run even when the population is below the elitism threshold.
    pub allow_unsafe_population: bool,
}

/// Iterates generations until the stop rule holds or the budget is spent.
pub fn run_nsga2<R: Rng>(
    g: &Graph,
    cfg: Nsga2Config,
    front: ExtremalFront,
    opts: &RunOptions,
    rng: R,
) -> Result<RunSummary, ConfigError> {
    let threshold = min_safe_population(g);
    let safe = cfg.pop_size >= threshold;
    if !safe && !opts.allow_unsafe_population {
        return Err(ConfigError::PopulationTooSmall { size: cfg.pop_size, threshold });
    }
    let mut engine = Nsga2::new(g, cfg, rng)?;
    let trace = if opts.trace { TraceMode::EveryGeneration } else { TraceMode::Off };
    let mut tracker = Tracker::new(g, front, opts.stop, opts.monitors, safe, trace);
    let mut stopped = tracker.observe(0, &engine.fitness_values(), true);
    while !stopped && engine.generation() < opts.budget {
        let before = engine.fitness_values();
        let info = engine.step();
        let after = engine.fitness_values();
        let generation = engine.generation();
        if let Some(m) = tracker.monitors_mut() {
            m.check_elitism(generation, &before, &after);
            m.check_rank_one(generation, &info.first_front);
            m.check_crowding(generation, &info.cut_front, &info.cut_crowding);
        }
        stopped = tracker.observe(generation, &after, true);
    }
    Ok(tracker.finish(engine.generation(), engine.evaluations(), stopped))
}
