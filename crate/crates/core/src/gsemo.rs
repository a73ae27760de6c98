//! Global SEMO: an archive of mutually non-dominated individuals, grown by
//! one mutated offspring per step.

use rand::Rng;

use crate::error::ConfigError;
use crate::graph::{Genotype, Graph};
use crate::nsga2::Individual;
use crate::objective::FitnessVector;
use crate::oracle::ExtremalFront;
use crate::run::{RunSummary, StopRule, TraceMode, Tracker};
use crate::variation::mutate_with_rate;

/// Deliberate archive-update bugs for exercising the monitors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArchiveFault {
    /// Accept offspring but never remove the members they dominate.
    KeepDominated,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GsemoConfig {
    /// Per-bit flip probability; `None` means `1/m`.
    pub rate: Option<f64>,
    pub fault: Option<ArchiveFault>,
}

/// Outcome of one step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepOutcome {
    Rejected,
    Inserted { removed: usize },
}

/// Archive of individuals with pairwise distinct, mutually incomparable
/// fitness values.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Archive {
    members: Vec<Individual>,
}

impl Archive {
    pub fn new(first: Individual) -> Self {
        Archive { members: vec![first] }
    }

    pub fn members(&self) -> &[Individual] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn fitness_values(&self) -> Vec<FitnessVector> {
        self.members.iter().map(|i| i.fitness).collect()
    }

    /// Inserts `candidate` unless some member weakly dominates it, removing
    /// every member it weakly dominates.
    pub fn offer(&mut self, candidate: Individual, fault: Option<ArchiveFault>) -> StepOutcome {
        if self.members.iter().any(|m| m.fitness.weakly_dominates(&candidate.fitness)) {
            return StepOutcome::Rejected;
        }
        let before = self.members.len();
        if fault != Some(ArchiveFault::KeepDominated) {
            self.members.retain(|m| !candidate.fitness.weakly_dominates(&m.fitness));
        }
        let removed = before - self.members.len();
        self.members.push(candidate);
        StepOutcome::Inserted { removed }
    }
}

pub struct Gsemo<'g, R> {
    graph: &'g Graph,
    cfg: GsemoConfig,
    rate: f64,
    archive: Archive,
    steps: u64,
    rng: R,
}

impl<'g, R: Rng> Gsemo<'g, R> {
    /// Starts from a single uniformly random genotype.
    pub fn new(graph: &'g Graph, cfg: GsemoConfig, mut rng: R) -> Result<Self, ConfigError> {
        let start = Genotype::from_bits((0..graph.m()).map(|_| rng.gen::<bool>()).collect());
        Self::with_archive(graph, cfg, Archive::new(Individual::new(graph, start)), rng)
    }

    pub fn with_archive(graph: &'g Graph, cfg: GsemoConfig, archive: Archive, rng: R) -> Result<Self, ConfigError> {
        let rate = cfg.rate.unwrap_or(1.0 / graph.m() as f64);
        if !(rate > 0.0 && rate <= 1.0) {
            return Err(ConfigError::MutationRate(rate));
        }
        Ok(Gsemo { graph, cfg, rate, archive, steps: 0, rng })
    }

    pub fn archive(&self) -> &Archive {
        &self.archive
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Initial individual plus one per step.
    pub fn evaluations(&self) -> u64 {
        self.steps + 1
    }

    /// Picks a uniform member, mutates it, and offers the child.
    pub fn step(&mut self) -> StepOutcome {
        let parent = &self.archive.members[self.rng.gen_range(0..self.archive.len())];
        let child = mutate_with_rate(&parent.genotype, self.rate, &mut self.rng);
        self.steps += 1;
        self.archive.offer(Individual::new(self.graph, child), self.cfg.fault)
    }
}

#[derive(Debug, Clone)]
pub struct GsemoRunOptions {
    pub stop: StopRule,
    /// Maximum number of steps (offspring evaluations).
    pub budget: u64,
    pub monitors: bool,
    pub trace: bool,
}

/// Steps until the stop rule holds or the budget is spent. The potential
/// trace records only steps where the potential changed.
pub fn run_gsemo<R: Rng>(
    g: &Graph,
    cfg: GsemoConfig,
    front: ExtremalFront,
    opts: &GsemoRunOptions,
    rng: R,
) -> Result<RunSummary, ConfigError> {
    let mut engine = Gsemo::new(g, cfg, rng)?;
    let trace = if opts.trace { TraceMode::OnChange } else { TraceMode::Off };
    let mut tracker = Tracker::new(g, front, opts.stop, opts.monitors, true, trace);
    let mut values = engine.archive().fitness_values();
    if let Some(m) = tracker.monitors_mut() {
        m.check_archive(0, &values);
    }
    let mut stopped = tracker.observe(0, &values, true);
    while !stopped && engine.steps() < opts.budget {
        let outcome = engine.step();
        let changed = outcome != StepOutcome::Rejected;
        if changed {
            values = engine.archive().fitness_values();
            if let Some(m) = tracker.monitors_mut() {
                m.check_archive(engine.steps(), &values);
            }
        }
        stopped = tracker.observe(engine.steps(), &values, changed);
    }
    Ok(tracker.finish(engine.steps(), engine.evaluations(), stopped))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::parse_instance;
    use crate::oracle::extremal_points;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn member(value: (u128, u128)) -> Individual {
        Individual {
            genotype: Genotype::zeros(3),
            fitness: FitnessVector::new(value.0, value.1),
            rank: None,
            crowding: None,
        }
    }

    fn values(a: &Archive) -> Vec<(u128, u128)> {
        a.fitness_values().iter().map(|f| (f.f1, f.f2)).collect()
    }

    #[test]
    fn equal_offspring_is_rejected() {
        let mut a = Archive::new(member((3, 5)));
        assert_eq!(a.offer(member((3, 5)), None), StepOutcome::Rejected);
        assert_eq!(values(&a), vec![(3, 5)]);
    }

    #[test]
    fn incomparable_offspring_joins() {
        let mut a = Archive::new(member((4, 4)));
        assert_eq!(a.offer(member((3, 5)), None), StepOutcome::Inserted { removed: 0 });
        assert_eq!(values(&a), vec![(4, 4), (3, 5)]);
    }

    #[test]
    fn dominating_offspring_clears_members() {
        let mut a = Archive::new(member((4, 6)));
        a.offer(member((10, 10)), None);
        assert_eq!(values(&a), vec![(4, 6)]);
        let mut a = Archive { members: vec![member((4, 6)), member((10, 10))] };
        assert_eq!(a.offer(member((4, 4)), None), StepOutcome::Inserted { removed: 2 });
        assert_eq!(values(&a), vec![(4, 4)]);
    }

    #[test]
    fn faulty_update_keeps_dominated() {
        let mut a = Archive::new(member((4, 6)));
        a.offer(member((4, 4)), Some(ArchiveFault::KeepDominated));
        assert_eq!(values(&a), vec![(4, 6), (4, 4)]);
    }

    #[test]
    fn k3a_runs() {
        let g = parse_instance("3 3\n1 2 1 3\n2 3 2 2\n1 3 3 1\n").unwrap();
        let front = extremal_points(&g);
        let opts = GsemoRunOptions { stop: StopRule::Coverage, budget: 100_000, monitors: true, trace: true };
        let a = run_gsemo(&g, GsemoConfig::default(), front.clone(), &opts, ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert!(a.gen_coverage.is_some() && a.violations.is_empty());
        assert_eq!(a.evaluations, a.generations + 1);
        let b = run_gsemo(&g, GsemoConfig::default(), front.clone(), &opts, ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert_eq!(a, b);

        let opts = GsemoRunOptions { stop: StopRule::FirstTree, ..opts };
        let c = run_gsemo(&g, GsemoConfig::default(), front, &opts, ChaCha8Rng::seed_from_u64(2)).unwrap();
        assert!(c.gen_first_tree.is_some());
    }
}
