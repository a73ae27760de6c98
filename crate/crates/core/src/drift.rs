//! Potential functions over the extremal points and the online monitors
//! that check elitism, monotone potential and the incomparable-set bound
//! while an engine runs.
//!
//! For an extremal front `q_1..q_r` (increasing `f1`) each index `i` gets a
//! nonnegative integer distance `d_i(p)` that is a nonnegative linear
//! combination of the two weights, shifted so that it vanishes exactly at
//! `q_i` over all spanning-tree weight vectors. The population potential is
//! `d(P) = sum_i min_{p in P} d_i(p)`, taken over spanning trees only.

use std::collections::BTreeSet;
use std::fmt;

use crate::graph::Graph;
use crate::objective::FitnessVector;
use crate::oracle::{segment_weights, ExtremalFront};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

fn diff(a: u128, b: u128) -> i128 {
    a as i128 - b as i128
}

/// Distance of `p` from the line through `left` and `right`, scaled by the
/// integer normal of that segment. Nonnegative for every spanning tree when
/// the segment is a hull edge.
pub fn line_excess(p: &FitnessVector, left: &FitnessVector, right: &FitnessVector) -> i128 {
    let (a, b) = segment_weights(left, right);
    a as i128 * diff(p.f1, left.f1) + b as i128 * diff(p.f2, left.f2)
}

/// Interior distance for `q_i` with neighbours `q_prev` (smaller `f1`) and
/// `q_next`: the sum of the inward normals of the two incident hull edges,
/// dotted with `p - q_i`.
pub fn d_interior(p: &FitnessVector, q_prev: &FitnessVector, q_i: &FitnessVector, q_next: &FitnessVector) -> i128 {
    diff(q_next.f1, q_prev.f1) * diff(p.f2, q_i.f2) + diff(q_prev.f2, q_next.f2) * diff(p.f1, q_i.f1)
}

/// Boundary distance for `q_1` (left) or `q_r` (right).
///
/// The base term is `w1(p) - w1(q_1)` on the left and `w2(p) - w2(q_r)` on
/// the right. When the front has a neighbouring point, the excess over the
/// incident hull edge is added; for a single-point front the other weight
/// difference is added instead. Either addition keeps the function a
/// nonnegative weight combination and makes `q_1`/`q_r` its unique zero,
/// which the plain base term is not when a dominated tree shares the
/// extreme weight.
pub fn d_boundary(p: &FitnessVector, q_end: &FitnessVector, neighbour: Option<&FitnessVector>, side: Side) -> i128 {
    let (base, other) = match side {
        Side::Left => (diff(p.f1, q_end.f1), diff(p.f2, q_end.f2)),
        Side::Right => (diff(p.f2, q_end.f2), diff(p.f1, q_end.f1)),
    };
    let tail = match (neighbour, side) {
        (None, _) => other,
        (Some(q2), Side::Left) => line_excess(p, q_end, q2),
        (Some(prev), Side::Right) => line_excess(p, prev, q_end),
    };
    base + tail
}

/// `d_i(p)` for the 0-based index `i` into `front`.
pub fn index_distance(front: &ExtremalFront, i: usize, p: &FitnessVector) -> i128 {
    let q = &front.points;
    let r = q.len();
    if i == 0 {
        d_boundary(p, &q[0], q.get(1), Side::Left)
    } else if i == r - 1 {
        d_boundary(p, &q[r - 1], Some(&q[r - 2]), Side::Right)
    } else {
        d_interior(p, &q[i - 1], &q[i], &q[i + 1])
    }
}

/// Per-index minima and their sum.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PotentialState {
    pub per_index: Vec<i128>,
    pub total: i128,
}

impl PotentialState {
    /// Trace line `gen d_total d_1 ... d_r`.
    pub fn trace_line(&self, generation: u64) -> String {
        let mut line = format!("{generation} {}", self.total);
        for d in &self.per_index {
            line.push_str(&format!(" {d}"));
        }
        line
    }
}

/// Potential of a population; undefined until it holds a spanning tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Potential {
    PreTree,
    Defined(PotentialState),
}

impl Potential {
    pub fn total(&self) -> Option<i128> {
        match self {
            Potential::PreTree => None,
            Potential::Defined(s) => Some(s.total),
        }
    }
}

/// `d_i(P)` and `d(P)` over the spanning trees of the population.
pub fn potential_of_population(g: &Graph, population: &[FitnessVector], front: &ExtremalFront) -> Potential {
    let trees: BTreeSet<FitnessVector> = population.iter().filter(|f| g.is_tree_fitness(f)).copied().collect();
    if trees.is_empty() {
        return Potential::PreTree;
    }
    let per_index: Vec<i128> =
        (0..front.len()).map(|i| trees.iter().map(|p| index_distance(front, i, p)).min().expect("nonempty")).collect();
    let total = per_index.iter().sum();
    Potential::Defined(PotentialState { per_index, total })
}

fn covers_all(population: &[FitnessVector], front: &ExtremalFront) -> bool {
    let present: BTreeSet<&FitnessVector> = population.iter().collect();
    front.points.iter().all(|q| present.contains(q))
}

/// Whether every extremal vector is realized by some member.
///
/// Extremal vectors are below the penalty scale, so a member with that
/// fitness is necessarily a spanning tree. The answer is cross-checked
/// against the potential being zero.
pub fn coverage_check(g: &Graph, population: &[FitnessVector], front: &ExtremalFront) -> bool {
    let covered = covers_all(population, front);
    let zero = potential_of_population(g, population, front).total() == Some(0);
    assert_eq!(covered, zero, "coverage and zero potential disagree");
    covered
}

/// Upper bound `((n-1) w_min + 1) * 2 m w_max^2` on an initial potential.
pub fn initial_potential_bound(g: &Graph) -> i128 {
    g.incomparable_bound() as i128 * 2 * g.m() as i128 * (g.w_max() as i128).pow(2)
}

/// One detected invariant violation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// A parent value has no weakly dominating member in the next population.
    Elitism { generation: u64, lost: FitnessVector },
    /// Some `d_i(P)` grew between consecutive populations.
    PotentialIncrease { generation: u64, index: usize, before: i128, after: i128 },
    /// A distance was negative; the extremal front does not fit the instance.
    NegativeDistance { generation: u64, index: usize, value: i128 },
    /// More than four members sharing a value had positive crowding.
    CrowdingClaim { generation: u64, value: FitnessVector, positive: usize },
    /// Too many distinct values in a rank-1 front holding a spanning tree.
    RankOneBound { generation: u64, distinct: usize, bound: usize },
    /// The archive holds a weakly dominated member or a repeated value.
    Antichain { step: u64, dominated: FitnessVector, by: FitnessVector },
    /// Archive above the incomparable-set bound after the first tree.
    ArchiveSize { step: u64, size: usize, bound: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Elitism { generation, lost } => write!(f, "gen {generation}: elitism lost {lost}"),
            Violation::PotentialIncrease { generation, index, before, after } => {
                write!(f, "gen {generation}: d_{} rose from {before} to {after}", index + 1)
            }
            Violation::NegativeDistance { generation, index, value } => {
                write!(f, "gen {generation}: d_{} = {value} < 0", index + 1)
            }
            Violation::CrowdingClaim { generation, value, positive } => {
                write!(f, "gen {generation}: {positive} members at {value} with positive crowding")
            }
            Violation::RankOneBound { generation, distinct, bound } => {
                write!(f, "gen {generation}: rank-1 front has {distinct} values > {bound}")
            }
            Violation::Antichain { step, dominated, by } => {
                write!(f, "step {step}: archive member {dominated} weakly dominated by {by}")
            }
            Violation::ArchiveSize { step, size, bound } => write!(f, "step {step}: archive size {size} > {bound}"),
        }
    }
}

/// Online invariant checks. Violations are collected, never raised.
#[derive(Debug, Clone)]
pub struct Monitors {
    w_ub: u128,
    bound: usize,
    front: ExtremalFront,
    check_elitism: bool,
    last: Option<PotentialState>,
    violations: Vec<Violation>,
}

impl Monitors {
    /// `elitism` enables the checks that rely on the population-size
    /// threshold: elitism itself and potential monotonicity.
    pub fn new(g: &Graph, front: ExtremalFront, elitism: bool) -> Self {
        Monitors {
            w_ub: g.w_ub(),
            bound: g.incomparable_bound(),
            front,
            check_elitism: elitism,
            last: None,
            violations: Vec::new(),
        }
    }

    pub fn violations(&self) -> &[Violation] {
        &self.violations
    }

    pub fn into_violations(self) -> Vec<Violation> {
        self.violations
    }

    fn is_tree(&self, f: &FitnessVector) -> bool {
        f.f1 < self.w_ub && f.f2 < self.w_ub
    }

    /// Every parent value must be weakly dominated by some survivor once the
    /// parents contain a spanning tree.
    pub fn check_elitism(&mut self, generation: u64, before: &[FitnessVector], after: &[FitnessVector]) {
        if !self.check_elitism || !before.iter().any(|f| self.is_tree(f)) {
            return;
        }
        let survivors: BTreeSet<&FitnessVector> = after.iter().collect();
        let parents: BTreeSet<&FitnessVector> = before.iter().collect();
        for p in parents {
            if !survivors.iter().any(|s| s.weakly_dominates(p)) {
                self.violations.push(Violation::Elitism { generation, lost: *p });
            }
        }
    }

    /// At most four members per value may carry positive crowding distance.
    pub fn check_crowding(&mut self, generation: u64, front: &[FitnessVector], crowding: &[f64]) {
        let mut counts: Vec<(FitnessVector, usize)> =
            front.iter().zip(crowding).filter(|(_, &c)| c > 0.0).map(|(f, _)| (*f, 1)).collect();
        counts.sort();
        counts.dedup_by(|later, earlier| {
            let same = later.0 == earlier.0;
            if same {
                earlier.1 += 1;
            }
            same
        });
        for (value, positive) in counts {
            if positive > 4 {
                self.violations.push(Violation::CrowdingClaim { generation, value, positive });
            }
        }
    }

    /// Distinct values of a rank-1 front holding a tree stay within bound.
    pub fn check_rank_one(&mut self, generation: u64, first_front: &[FitnessVector]) {
        if !first_front.iter().any(|f| self.is_tree(f)) {
            return;
        }
        let distinct = first_front.iter().collect::<BTreeSet<_>>().len();
        if distinct > self.bound {
            self.violations.push(Violation::RankOneBound { generation, distinct, bound: self.bound });
        }
    }

    /// Antichain of distinct values, and the size bound after the first tree.
    pub fn check_archive(&mut self, step: u64, archive: &[FitnessVector]) {
        'outer: for (i, a) in archive.iter().enumerate() {
            for (j, b) in archive.iter().enumerate() {
                if i != j && b.weakly_dominates(a) {
                    self.violations.push(Violation::Antichain { step, dominated: *a, by: *b });
                    break 'outer;
                }
            }
        }
        if archive.iter().any(|f| self.is_tree(f)) && archive.len() > self.bound {
            self.violations.push(Violation::ArchiveSize { step, size: archive.len(), bound: self.bound });
        }
    }

    /// Computes the potential, checks nonnegativity and per-index
    /// monotonicity against the previous call, and returns it.
    pub fn observe_potential(&mut self, g: &Graph, generation: u64, population: &[FitnessVector]) -> Potential {
        let potential = potential_of_population(g, population, &self.front);
        if let Potential::Defined(state) = &potential {
            for (index, &value) in state.per_index.iter().enumerate() {
                if value < 0 {
                    self.violations.push(Violation::NegativeDistance { generation, index, value });
                }
            }
            if let (Some(last), true) = (&self.last, self.check_elitism) {
                for (index, (&before, &after)) in last.per_index.iter().zip(&state.per_index).enumerate() {
                    if after > before {
                        self.violations.push(Violation::PotentialIncrease { generation, index, before, after });
                    }
                }
            }
            self.last = Some(state.clone());
        }
        potential
    }
}
