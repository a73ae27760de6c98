//! Problem instances: undirected multigraphs with two integer weights per
//! edge, subgraph genotypes, and exact scalarized minimum spanning trees.

use std::fmt;
use std::str::FromStr;

use crate::error::InstanceError;
use crate::objective::FitnessVector;

/// An undirected edge with its two weights. Vertices are 0-indexed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub w1: u64,
    pub w2: u64,
}

impl Edge {
    pub fn weight(&self, objective: Objective) -> u64 {
        match objective {
            Objective::First => self.w1,
            Objective::Second => self.w2,
        }
    }
}

/// Selects one of the two weight functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Objective {
    First,
    Second,
}

impl Objective {
    pub fn other(self) -> Self {
        match self {
            Objective::First => Objective::Second,
            Objective::Second => Objective::First,
        }
    }
}

/// A connected bi-weighted graph. Immutable after construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<Edge>,
    w1_max: u64,
    w2_max: u64,
}

impl Graph {
    /// Builds a graph, validating connectivity, loops and the fitness
    /// width. Vertices in `edges` are 0-indexed.
    pub fn new(n: usize, edges: Vec<Edge>) -> Result<Self, InstanceError> {
        if n < 2 {
            return Err(InstanceError::TooFewVertices(n));
        }
        for (j, e) in edges.iter().enumerate() {
            for vertex in [e.u, e.v] {
                if vertex >= n {
                    return Err(InstanceError::VertexOutOfRange { line: j + 1, vertex: vertex + 1, n });
                }
            }
            if e.u == e.v {
                return Err(InstanceError::SelfLoop { line: j + 1, vertex: e.u + 1 });
            }
        }
        let w1_max = edges.iter().map(|e| e.w1).max().unwrap_or(0);
        let w2_max = edges.iter().map(|e| e.w2).max().unwrap_or(0);
        let graph = Graph { n, edges, w1_max, w2_max };

        let mut dsu = DisjointSets::new(n);
        for e in &graph.edges {
            dsu.union(e.u, e.v);
        }
        if dsu.count() > 1 {
            let root = dsu.find(0);
            let vertex = (0..n).find(|&v| dsu.find(v) != root).unwrap_or(0);
            return Err(InstanceError::Disconnected { vertex: vertex + 1 });
        }
        if graph.w_max() == 0 {
            return Err(InstanceError::ZeroWeights);
        }
        if graph.max_fitness_component().is_none() {
            return Err(InstanceError::FitnessOverflow);
        }
        Ok(graph)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, j: usize) -> &Edge {
        &self.edges[j]
    }

    /// Largest weight of the given objective over all edges.
    pub fn weight_max(&self, objective: Objective) -> u64 {
        match objective {
            Objective::First => self.w1_max,
            Objective::Second => self.w2_max,
        }
    }

    pub fn w_max(&self) -> u64 {
        self.w1_max.max(self.w2_max)
    }

    pub fn w_min(&self) -> u64 {
        self.w1_max.min(self.w2_max)
    }

    /// Penalty scale `n^2 * w_max`.
    pub fn w_ub(&self) -> u128 {
        (self.n as u128) * (self.n as u128) * self.w_max() as u128
    }

    /// `(n-1) * w_min + 1`, the bound on the number of distinct objective
    /// values in any incomparable set that contains a spanning tree.
    pub fn incomparable_bound(&self) -> usize {
        (self.n - 1) * self.w_min() as usize + 1
    }

    /// Whether a fitness vector can only belong to a spanning tree. Every
    /// other subgraph pays at least one `w_ub` of penalty.
    pub fn is_tree_fitness(&self, f: &FitnessVector) -> bool {
        f.f1 < self.w_ub() && f.f2 < self.w_ub()
    }

    /// Upper bound on either fitness component, or `None` if it would not
    /// fit into 127 bits.
    fn max_fitness_component(&self) -> Option<u128> {
        let n = self.n as u128;
        let m = self.m() as u128;
        let w_ub = n.checked_mul(n)?.checked_mul(self.w_max() as u128)?;
        let penalty = (n - 1).checked_mul(w_ub.checked_mul(w_ub)?)?;
        let extra = m.checked_mul(w_ub)?;
        let weights = m.checked_mul(self.w_max() as u128)?;
        let total = penalty.checked_add(extra)?.checked_add(weights)?;
        (total <= i128::MAX as u128).then_some(total)
    }

    /// Renders the instance in the text format read by [`parse_instance`].
    pub fn to_instance_text(&self) -> String {
        let mut out = format!("{} {}\n", self.n, self.m());
        for e in &self.edges {
            out.push_str(&format!("{} {} {} {}\n", e.u + 1, e.v + 1, e.w1, e.w2));
        }
        out
    }
}

impl fmt::Display for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_instance_text())
    }
}

impl FromStr for Graph {
    type Err = InstanceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_instance(s)
    }
}

/// Parses the instance text format.
///
/// Lines starting with `#` and blank lines are ignored. The first data line
/// is `n m` with an optional third token declaring the maximum admissible
/// weight; it is followed by `m` lines `u v w1 w2` with 1-indexed vertices.
pub fn parse_instance(text: &str) -> Result<Graph, InstanceError> {
    let mut data =
        text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (header_line, header) =
        data.next().ok_or(InstanceError::Malformed { line: 0, reason: "missing header line `n m`".into() })?;
    let fields = parse_numbers(header_line, header)?;
    if !(2..=3).contains(&fields.len()) {
        return Err(InstanceError::Malformed {
            line: header_line,
            reason: format!("header must be `n m [wmax]`, got {} fields", fields.len()),
        });
    }
    let n = fields[0] as usize;
    let m = fields[1] as usize;
    let declared_max = fields.get(2).copied().unwrap_or(u64::MAX);
    if n < 2 {
        return Err(InstanceError::TooFewVertices(n));
    }

    let mut edges = Vec::with_capacity(m);
    for (line, content) in data {
        let f = parse_numbers(line, content)?;
        if f.len() != 4 {
            return Err(InstanceError::Malformed {
                line,
                reason: format!("edge line must be `u v w1 w2`, got {} fields", f.len()),
            });
        }
        for &vertex in &f[..2] {
            if vertex == 0 || vertex as usize > n {
                return Err(InstanceError::VertexOutOfRange { line, vertex: vertex as usize, n });
            }
        }
        if f[0] == f[1] {
            return Err(InstanceError::SelfLoop { line, vertex: f[0] as usize });
        }
        for &weight in &f[2..] {
            if weight > declared_max {
                return Err(InstanceError::WeightOutOfRange { line, weight, max: declared_max });
            }
        }
        edges.push(Edge { u: f[0] as usize - 1, v: f[1] as usize - 1, w1: f[2], w2: f[3] });
    }
    if edges.len() != m {
        return Err(InstanceError::EdgeCountMismatch { declared: m, found: edges.len() });
    }
    Graph::new(n, edges)
}

fn parse_numbers(line: usize, content: &str) -> Result<Vec<u64>, InstanceError> {
    content
        .split_whitespace()
        .map(|tok| {
            tok.parse::<u64>()
                .map_err(|_| InstanceError::Malformed { line, reason: format!("`{tok}` is not a nonnegative integer") })
        })
        .collect()
}

/// A subgraph, one bit per edge of the instance.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Genotype(Vec<bool>);

impl Genotype {
    pub fn zeros(m: usize) -> Self {
        Genotype(vec![false; m])
    }

    pub fn ones(m: usize) -> Self {
        Genotype(vec![true; m])
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        Genotype(bits)
    }

    /// Builds a genotype of length `m` with exactly the given edges set.
    pub fn from_edges(m: usize, selected: impl IntoIterator<Item = usize>) -> Self {
        let mut g = Genotype::zeros(m);
        for j in selected {
            g.0[j] = true;
        }
        g
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, j: usize) -> bool {
        self.0[j]
    }

    pub fn set(&mut self, j: usize, value: bool) {
        self.0[j] = value;
    }

    pub fn flip(&mut self, j: usize) {
        self.0[j] = !self.0[j];
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn count_ones(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    /// Indices of the selected edges, ascending.
    pub fn selected(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().filter(|(_, &b)| b).map(|(j, _)| j)
    }

    /// Number of positions where the two genotypes differ.
    pub fn hamming(&self, other: &Genotype) -> usize {
        self.0.iter().zip(&other.0).filter(|(a, b)| a != b).count()
    }
}

impl FromStr for Genotype {
    type Err = String;

    /// Parses a string of `0` and `1` characters, bit 0 first.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(format!("invalid bit `{other}`")),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Genotype)
    }
}

impl fmt::Display for Genotype {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Disjoint-set forest with path compression and union by size.
#[derive(Debug, Clone)]
pub struct DisjointSets {
    parent: Vec<usize>,
    size: Vec<usize>,
    sets: usize,
}

impl DisjointSets {
    pub fn new(n: usize) -> Self {
        DisjointSets { parent: (0..n).collect(), size: vec![1; n], sets: n }
    }

    pub fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut cur = x;
        while self.parent[cur] != root {
            let next = self.parent[cur];
            self.parent[cur] = root;
            cur = next;
        }
        root
    }

    /// Merges the sets of `a` and `b`; returns false if already merged.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        self.sets -= 1;
        true
    }

    /// Number of disjoint sets.
    pub fn count(&self) -> usize {
        self.sets
    }
}

/// Number of connected components of the selected subgraph, counting
/// isolated vertices.
pub fn components(g: &Graph, s: &Genotype) -> usize {
    debug_assert_eq!(s.len(), g.m());
    let mut dsu = DisjointSets::new(g.n());
    for j in s.selected() {
        let e = &g.edges[j];
        dsu.union(e.u, e.v);
    }
    dsu.count()
}

/// Number of selected edges.
pub fn edge_count(s: &Genotype) -> usize {
    s.count_ones()
}

pub fn is_spanning_tree(g: &Graph, s: &Genotype) -> bool {
    edge_count(s) == g.n() - 1 && components(g, s) == 1
}

/// A spanning tree together with its weight vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightedTree {
    pub genotype: Genotype,
    pub weights: FitnessVector,
}

impl WeightedTree {
    /// Value of `a * w1 + b * w2` for this tree.
    pub fn scalar(&self, a: u64, b: u64) -> u128 {
        a as u128 * self.weights.f1 + b as u128 * self.weights.f2
    }
}

/// Sum of both weights over the selected edges.
pub fn weight_of(g: &Graph, s: &Genotype) -> FitnessVector {
    s.selected().fold(FitnessVector::new(0, 0), |acc, j| {
        let e = &g.edges[j];
        FitnessVector::new(acc.f1 + e.w1 as u128, acc.f2 + e.w2 as u128)
    })
}

/// Minimum spanning tree for the scalar weight `a * w1 + b * w2`.
///
/// Kruskal over edges ordered by (scalar weight, `tiebreak` weight, edge
/// index). Among all minimum scalar trees the result also minimizes the
/// tiebreak objective, so the output is fully deterministic.
pub fn mst_scalar(g: &Graph, a: u64, b: u64, tiebreak: Objective) -> WeightedTree {
    assert!(a != 0 || b != 0, "scalarization needs a nonzero coefficient");
    let scalar = |e: &Edge| a as u128 * e.w1 as u128 + b as u128 * e.w2 as u128;
    let mut order: Vec<usize> = (0..g.m()).collect();
    order.sort_by_key(|&j| {
        let e = &g.edges[j];
        (scalar(e), e.weight(tiebreak), j)
    });

    let mut dsu = DisjointSets::new(g.n());
    let mut genotype = Genotype::zeros(g.m());
    for j in order {
        let e = &g.edges[j];
        if dsu.union(e.u, e.v) {
            genotype.set(j, true);
            if dsu.count() == 1 {
                break;
            }
        }
    }
    let weights = weight_of(g, &genotype);
    WeightedTree { genotype, weights }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const K3A: &str = "# K3-A\n3 3\n1 2 1 3\n2 3 2 2\n1 3 3 1\n";

    fn k3a() -> Graph {
        parse_instance(K3A).unwrap()
    }

    fn bits(s: &str) -> Genotype {
        s.parse().unwrap()
    }

    #[test]
    fn parses_k3a_and_derives_bounds() {
        let g = k3a();
        assert_eq!((g.n(), g.m()), (3, 3));
        assert_eq!((g.w_max(), g.w_min()), (3, 3));
        assert_eq!(g.w_ub(), 27);
        assert_eq!(g.edge(0), &Edge { u: 0, v: 1, w1: 1, w2: 3 });
    }

    #[test]
    fn smallest_instance() {
        let g = parse_instance("2 1\n1 2 7 9\n").unwrap();
        assert_eq!((g.n(), g.m()), (2, 1));
    }

    #[test]
    fn rejects_bad_instances() {
        assert_eq!(parse_instance("4 3\n1 2 1 1\n2 3 1 1\n1 3 1 1\n"), Err(InstanceError::Disconnected { vertex: 4 }));
        assert_eq!(parse_instance("1 0\n"), Err(InstanceError::TooFewVertices(1)));
        assert!(matches!(parse_instance("3 2\n1 2 1\n2 3 1 1\n"), Err(InstanceError::Malformed { line: 2, .. })));
        assert!(matches!(parse_instance("3 2\n1 2 x 1\n2 3 1 1\n"), Err(InstanceError::Malformed { .. })));
        assert!(matches!(
            parse_instance("3 2 5\n1 2 6 1\n2 3 1 1\n"),
            Err(InstanceError::WeightOutOfRange { line: 2, weight: 6, max: 5 })
        ));
        assert!(matches!(parse_instance("3 2\n1 1 1 1\n2 3 1 1\n"), Err(InstanceError::SelfLoop { .. })));
        assert!(matches!(parse_instance("3 2\n1 4 1 1\n2 3 1 1\n"), Err(InstanceError::VertexOutOfRange { .. })));
        assert!(matches!(parse_instance("3 3\n1 2 1 1\n2 3 1 1\n"), Err(InstanceError::EdgeCountMismatch { .. })));
        assert_eq!(parse_instance("2 1\n1 2 0 0\n"), Err(InstanceError::ZeroWeights));
        let huge = format!("2 1\n1 2 {} 1\n", u64::MAX);
        assert_eq!(parse_instance(&huge), Err(InstanceError::FitnessOverflow));
    }

    #[test]
    fn parallel_edges_allowed() {
        let g = parse_instance("2 2\n1 2 1 5\n2 1 5 1\n").unwrap();
        assert_eq!(g.m(), 2);
    }

    #[test]
    fn text_round_trip() {
        let g = k3a();
        assert_eq!(parse_instance(&g.to_instance_text()).unwrap(), g);
    }

    #[test]
    fn components_and_edges() {
        let g = k3a();
        assert_eq!(components(&g, &bits("000")), 3);
        assert_eq!(components(&g, &bits("100")), 2);
        assert_eq!(components(&g, &bits("111")), 1);
        assert_eq!(edge_count(&bits("000")), 0);
        assert_eq!(edge_count(&bits("110")), 2);
        assert_eq!(edge_count(&bits("111")), 3);
    }

    #[test]
    fn spanning_tree_predicate() {
        let g = k3a();
        assert!(is_spanning_tree(&g, &bits("110")));
        assert!(!is_spanning_tree(&g, &bits("111")));
        assert!(!is_spanning_tree(&g, &bits("100")));
    }

    #[test]
    fn scalar_msts_on_k3a() {
        let g = k3a();
        let t = mst_scalar(&g, 1, 0, Objective::Second);
        assert_eq!(t.genotype, bits("110"));
        assert_eq!(t.weights, FitnessVector::new(3, 5));
        let t = mst_scalar(&g, 0, 1, Objective::First);
        assert_eq!(t.genotype, bits("011"));
        assert_eq!(t.weights, FitnessVector::new(5, 3));
        let t = mst_scalar(&g, 1, 1, Objective::First);
        assert!(is_spanning_tree(&g, &t.genotype));
        assert_eq!(t.scalar(1, 1), 8);
    }
}
