//! Exact ground truth for small and medium instances.
//!
//! [`extremal_points`] finds the vertices of the lower-left convex hull of
//! the Pareto front by parametric weighted-sum minimum spanning trees with
//! integer coefficients. [`brute_force_pareto`] enumerates every spanning
//! tree and is used as an independent check on instances with few edges.

use crate::error::OracleError;
use crate::graph::{mst_scalar, weight_of, DisjointSets, Genotype, Graph, Objective, WeightedTree};
use crate::objective::FitnessVector;

/// Largest edge count accepted by [`brute_force_pareto`].
pub const BRUTE_FORCE_MAX_EDGES: usize = 24;

/// Extremal objective vectors `q_1..q_r`, strictly increasing in `f1` and
/// strictly decreasing in `f2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtremalFront {
    pub points: Vec<FitnessVector>,
}

impl ExtremalFront {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Structural invariants: strictly monotone and strictly convex.
    pub fn is_convex_chain(&self) -> bool {
        let p = &self.points;
        let monotone = p.windows(2).all(|w| w[0].f1 < w[1].f1 && w[0].f2 > w[1].f2);
        monotone && p.windows(3).all(|w| cross(&w[0], &w[1], &w[2]) > 0)
    }
}

/// Extremal points with one witness spanning tree each.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtremalTrees {
    pub trees: Vec<WeightedTree>,
}

impl ExtremalTrees {
    pub fn front(&self) -> ExtremalFront {
        ExtremalFront { points: self.trees.iter().map(|t| t.weights).collect() }
    }
}

/// Pareto-optimal spanning-tree weight vectors with one witness each,
/// sorted by increasing `f1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParetoFrontExact {
    pub points: Vec<FitnessVector>,
    pub witnesses: Vec<Genotype>,
}

/// Cross product of `(a - o)` and `(b - o)`; positive for a left turn.
fn cross(o: &FitnessVector, a: &FitnessVector, b: &FitnessVector) -> i128 {
    let (ox, oy) = (o.f1 as i128, o.f2 as i128);
    (a.f1 as i128 - ox) * (b.f2 as i128 - oy) - (a.f2 as i128 - oy) * (b.f1 as i128 - ox)
}

/// Extremal points of the Pareto front via parametric scalarization.
pub fn extremal_points(g: &Graph) -> ExtremalFront {
    extremal_trees(g).expect("depth cap is never reached on a consistent instance").front()
}

/// Like [`extremal_points`] but keeps a witness tree per point.
pub fn extremal_trees(g: &Graph) -> Result<ExtremalTrees, OracleError> {
    let first = mst_scalar(g, 1, 0, Objective::Second);
    let last = mst_scalar(g, 0, 1, Objective::First);
    if first.weights == last.weights {
        return Ok(ExtremalTrees { trees: vec![first] });
    }
    let cap = g.incomparable_bound() + 1;
    let mut trees = vec![first.clone()];
    refine(g, &first, &last, 1, cap, &mut trees)?;
    trees.push(last);
    Ok(ExtremalTrees { trees })
}

/// Coefficients `(a, b)` of the weighted sum whose level lines are parallel
/// to the segment from `left` to `right`.
pub fn segment_weights(left: &FitnessVector, right: &FitnessVector) -> (u64, u64) {
    ((left.f2 - right.f2) as u64, (right.f1 - left.f1) as u64)
}

// Appends the hull vertices strictly between `left` and `right`, in order.
fn refine(
    g: &Graph,
    left: &WeightedTree,
    right: &WeightedTree,
    depth: usize,
    cap: usize,
    out: &mut Vec<WeightedTree>,
) -> Result<(), OracleError> {
    if depth > cap {
        return Err(OracleError::RecursionDepth(cap));
    }
    let (a, b) = segment_weights(&left.weights, &right.weights);
    let line = left.scalar(a, b);
    let candidate = mst_scalar(g, a, b, Objective::First);
    if candidate.scalar(a, b) < line {
        refine(g, left, &candidate, depth + 1, cap, out)?;
        out.push(candidate.clone());
        refine(g, &candidate, right, depth + 1, cap, out)?;
    }
    Ok(())
}

/// Enumerates all spanning trees and keeps the non-dominated weight vectors.
pub fn brute_force_pareto(g: &Graph) -> Result<ParetoFrontExact, OracleError> {
    let mut all: Vec<(FitnessVector, Genotype)> = Vec::new();
    for_each_spanning_tree(g, |s| all.push((weight_of(g, s), s.clone())))?;
    all.sort();
    all.dedup_by(|later, earlier| later.0 == earlier.0);
    // sorted by (f1, f2): a point survives iff its f2 beats every earlier one
    let mut points = Vec::new();
    let mut witnesses = Vec::new();
    let mut best_f2 = u128::MAX;
    for (p, s) in all {
        if p.f2 < best_f2 {
            best_f2 = p.f2;
            points.push(p);
            witnesses.push(s);
        }
    }
    Ok(ParetoFrontExact { points, witnesses })
}

/// Calls `visit` with every spanning tree of `g`.
pub fn for_each_spanning_tree(g: &Graph, mut visit: impl FnMut(&Genotype)) -> Result<(), OracleError> {
    let m = g.m();
    if m > BRUTE_FORCE_MAX_EDGES {
        return Err(OracleError::TooLargeForBruteForce { m, limit: BRUTE_FORCE_MAX_EDGES });
    }
    let k = g.n() - 1;
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        let mut dsu = DisjointSets::new(g.n());
        if idx.iter().all(|&j| dsu.union(g.edge(j).u, g.edge(j).v)) {
            visit(&Genotype::from_edges(m, idx.iter().copied()));
        }
        // next k-combination of 0..m in lexicographic order
        let Some(pos) = (0..k).rev().find(|&i| idx[i] != i + m - k) else {
            return Ok(());
        };
        idx[pos] += 1;
        for i in pos + 1..k {
            idx[i] = idx[i - 1] + 1;
        }
    }
}

/// Vertices of the lower-left convex hull of a point set.
///
/// Dominated points are dropped first; the remaining staircase is swept
/// left to right with a monotone chain that discards non-left turns, so
/// collinear points are excluded.
pub fn conv_hull_extremals(points: &[FitnessVector]) -> Result<ExtremalFront, OracleError> {
    if points.is_empty() {
        return Err(OracleError::EmptyInput);
    }
    let mut sorted = points.to_vec();
    sorted.sort();
    sorted.dedup();
    let mut staircase: Vec<FitnessVector> = Vec::new();
    for p in sorted {
        if staircase.last().is_none_or(|last| p.f2 < last.f2) {
            staircase.push(p);
        }
    }
    let mut hull: Vec<FitnessVector> = Vec::with_capacity(staircase.len());
    for p in staircase {
        while hull.len() >= 2 && cross(&hull[hull.len() - 2], &hull[hull.len() - 1], &p) <= 0 {
            hull.pop();
        }
        hull.push(p);
    }
    Ok(ExtremalFront { points: hull })
}

/// Worst-case factor by which the extremal points approximate the front.
///
/// For each Pareto point `p` the best extremal `q` minimizes
/// `max(q1/p1, q2/p2)`, with `0/0 = 1` and `x/0 = inf`.
pub fn approximation_ratio(front: &ParetoFrontExact, extremals: &ExtremalFront) -> f64 {
    let ratio = |q: u128, p: u128| match (q, p) {
        (0, 0) => 1.0,
        (_, 0) => f64::INFINITY,
        (q, p) => q as f64 / p as f64,
    };
    front
        .points
        .iter()
        .map(|p| {
            extremals.points.iter().map(|q| ratio(q.f1, p.f1).max(ratio(q.f2, p.f2))).fold(f64::INFINITY, f64::min)
        })
        .fold(1.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::parse_instance;

    fn v(a: u128, b: u128) -> FitnessVector {
        FitnessVector::new(a, b)
    }

    fn k3a() -> Graph {
        parse_instance("3 3\n1 2 1 3\n2 3 2 2\n1 3 3 1\n").unwrap()
    }

    #[test]
    fn k3a_extremals_skip_collinear_tree() {
        let g = k3a();
        assert_eq!(extremal_points(&g).points, vec![v(3, 5), v(5, 3)]);
        let bf = brute_force_pareto(&g).unwrap();
        assert_eq!(bf.points, vec![v(3, 5), v(4, 4), v(5, 3)]);
        assert_eq!(conv_hull_extremals(&bf.points).unwrap(), extremal_points(&g));
    }

    #[test]
    fn tree_instance_has_one_extremal() {
        let g = parse_instance("4 3\n1 2 1 5\n2 3 4 2\n3 4 2 2\n").unwrap();
        assert_eq!(extremal_points(&g).points, vec![v(7, 9)]);
    }

    #[test]
    fn single_edge_front() {
        let g = parse_instance("2 1\n1 2 7 9\n").unwrap();
        assert_eq!(brute_force_pareto(&g).unwrap().points, vec![v(7, 9)]);
    }

    #[test]
    fn three_vertex_hull_from_parallel_edges() {
        let g = parse_instance("2 4\n1 2 1 9\n1 2 4 4\n1 2 9 1\n1 2 6 6\n").unwrap();
        let front = extremal_points(&g);
        assert_eq!(front.points, vec![v(1, 9), v(4, 4), v(9, 1)]);
        assert!(front.is_convex_chain());
    }

    #[test]
    fn hull_examples() {
        let hull = |pts: &[FitnessVector]| conv_hull_extremals(pts).unwrap().points;
        assert_eq!(hull(&[v(3, 5), v(4, 4), v(5, 3)]), vec![v(3, 5), v(5, 3)]);
        // (5,5) sits on the segment from (1,9) to (9,1); (6,6) is dominated
        assert_eq!(hull(&[v(1, 9), v(5, 5), v(9, 1), v(6, 6)]), vec![v(1, 9), v(9, 1)]);
        assert_eq!(hull(&[v(1, 9), v(4, 4), v(9, 1), v(6, 6)]), vec![v(1, 9), v(4, 4), v(9, 1)]);
        assert_eq!(hull(&[v(2, 2)]), vec![v(2, 2)]);
        assert_eq!(conv_hull_extremals(&[]), Err(OracleError::EmptyInput));
    }

    #[test]
    fn brute_force_guard() {
        let text = (0..25).fold("2 25\n".to_string(), |acc, _| acc + "1 2 1 1\n");
        let g = parse_instance(&text).unwrap();
        assert_eq!(
            brute_force_pareto(&g),
            Err(OracleError::TooLargeForBruteForce { m: 25, limit: BRUTE_FORCE_MAX_EDGES })
        );
    }

    #[test]
    fn approximation_ratios() {
        let g = k3a();
        let bf = brute_force_pareto(&g).unwrap();
        let ext = extremal_points(&g);
        assert!((approximation_ratio(&bf, &ext) - 1.25).abs() < 1e-12);
        let same = ParetoFrontExact { points: ext.points.clone(), witnesses: vec![] };
        assert_eq!(approximation_ratio(&same, &ext), 1.0);
    }
}
