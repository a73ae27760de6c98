//! Per-run bookkeeping shared by both engines: stop predicates, first-tree
//! and coverage times, the potential trace, and the online monitors.

use std::fmt;
use std::str::FromStr;

use crate::drift::{coverage_check, potential_of_population, Monitors, Potential, PotentialState, Violation};
use crate::graph::Graph;
use crate::objective::FitnessVector;
use crate::oracle::ExtremalFront;

/// When a run ends before its budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StopRule {
    /// Every extremal vector is realized by a spanning tree.
    #[default]
    Coverage,
    /// The population contains a spanning tree.
    FirstTree,
    /// Run the full budget.
    BudgetOnly,
}

impl FromStr for StopRule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "coverage" => Ok(StopRule::Coverage),
            "first-tree" => Ok(StopRule::FirstTree),
            "budget-only" => Ok(StopRule::BudgetOnly),
            other => Err(format!("unknown stop rule `{other}`")),
        }
    }
}

impl fmt::Display for StopRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StopRule::Coverage => "coverage",
            StopRule::FirstTree => "first-tree",
            StopRule::BudgetOnly => "budget-only",
        })
    }
}

/// Which generations enter the potential trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceMode {
    Off,
    /// One entry per generation once a tree exists.
    EveryGeneration,
    /// Only generations where the potential changed.
    OnChange,
}

/// One trace entry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TracePoint {
    pub generation: u64,
    pub state: PotentialState,
}

impl TracePoint {
    pub fn line(&self) -> String {
        self.state.trace_line(self.generation)
    }
}

/// What a finished run reports.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunSummary {
    /// Generations (NSGA-II) or steps (GSEMO) performed.
    pub generations: u64,
    pub evaluations: u64,
    pub gen_first_tree: Option<u64>,
    pub gen_coverage: Option<u64>,
    /// The budget ran out before the stop predicate held.
    pub budget_hit: bool,
    pub final_potential: Potential,
    pub monitors: bool,
    /// False when elitism-dependent checks were skipped (unsafe population).
    pub elitism_checked: bool,
    pub violations: Vec<Violation>,
    pub trace: Vec<TracePoint>,
}

/// Observes each population and decides when to stop.
pub struct Tracker<'g> {
    graph: &'g Graph,
    front: ExtremalFront,
    stop: StopRule,
    monitors: Option<Monitors>,
    trace_mode: TraceMode,
    trace: Vec<TracePoint>,
    gen_first_tree: Option<u64>,
    gen_coverage: Option<u64>,
    potential: Potential,
    elitism_checked: bool,
}

impl<'g> Tracker<'g> {
    pub fn new(
        graph: &'g Graph,
        front: ExtremalFront,
        stop: StopRule,
        monitors: bool,
        elitism_checked: bool,
        trace_mode: TraceMode,
    ) -> Self {
        Tracker {
            graph,
            monitors: monitors.then(|| Monitors::new(graph, front.clone(), elitism_checked)),
            front,
            stop,
            trace_mode,
            trace: Vec::new(),
            gen_first_tree: None,
            gen_coverage: None,
            potential: Potential::PreTree,
            elitism_checked,
        }
    }

    pub fn front(&self) -> &ExtremalFront {
        &self.front
    }

    pub fn monitors_mut(&mut self) -> Option<&mut Monitors> {
        self.monitors.as_mut()
    }

    /// Records the population after `generation`; returns true when the stop
    /// predicate holds. `changed = false` lets archive-based engines skip
    /// recomputation when nothing was inserted.
    pub fn observe(&mut self, generation: u64, population: &[FitnessVector], changed: bool) -> bool {
        if changed || generation == 0 {
            self.potential = match self.monitors.as_mut() {
                Some(m) => m.observe_potential(self.graph, generation, population),
                None => potential_of_population(self.graph, population, &self.front),
            };
            if self.gen_first_tree.is_none() && self.potential != Potential::PreTree {
                self.gen_first_tree = Some(generation);
            }
            if self.gen_coverage.is_none() && coverage_check(self.graph, population, &self.front) {
                self.gen_coverage = Some(generation);
            }
        }
        if let Potential::Defined(state) = &self.potential {
            let push = match self.trace_mode {
                TraceMode::Off => false,
                TraceMode::EveryGeneration => true,
                TraceMode::OnChange => self.trace.last().is_none_or(|last| &last.state != state),
            };
            if push {
                self.trace.push(TracePoint { generation, state: state.clone() });
            }
        }
        match self.stop {
            StopRule::Coverage => self.gen_coverage.is_some(),
            StopRule::FirstTree => self.gen_first_tree.is_some(),
            StopRule::BudgetOnly => false,
        }
    }

    pub fn finish(self, generations: u64, evaluations: u64, stopped: bool) -> RunSummary {
        RunSummary {
            generations,
            evaluations,
            gen_first_tree: self.gen_first_tree,
            gen_coverage: self.gen_coverage,
            budget_hit: !stopped,
            final_potential: self.potential,
            monitors: self.monitors.is_some(),
            elitism_checked: self.elitism_checked,
            violations: self.monitors.map(Monitors::into_violations).unwrap_or_default(),
            trace: self.trace,
        }
    }
}
