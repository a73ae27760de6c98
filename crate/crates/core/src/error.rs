use thiserror::Error;

/// Problems found while reading or validating a problem instance.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InstanceError {
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("instance needs at least 2 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("header declares {declared} edges but {found} edge lines were read")]
    EdgeCountMismatch { declared: usize, found: usize },
    #[error("line {line}: vertex {vertex} outside 1..={n}")]
    VertexOutOfRange { line: usize, vertex: usize, n: usize },
    #[error("line {line}: self-loop on vertex {vertex}")]
    SelfLoop { line: usize, vertex: usize },
    #[error("line {line}: weight {weight} outside declared range [0, {max}]")]
    WeightOutOfRange { line: usize, weight: u64, max: u64 },
    #[error("all edge weights are zero; the penalty scale n^2 * w_max would vanish")]
    ZeroWeights,
    #[error("graph is disconnected: vertex {vertex} is not reachable from vertex 1")]
    Disconnected { vertex: usize },
    #[error("fitness values for this instance would not fit in 127 bits")]
    FitnessOverflow,
}

/// Invalid algorithm or mechanism configuration.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("mutation strength c = {c} must lie in (0, {m}]")]
    MutationStrength { c: f64, m: usize },
    #[error("crossover probability q = {0} must lie strictly between 0 and 1")]
    CrossoverProbability(f64),
    #[error("balanced mutation needs a 0-bit in some spanning tree, but m = n - 1 = {0}")]
    BalancedOnTree(usize),
    #[error(
        "population size {size} is below the elitism threshold {threshold}; pass the unsafe override to run anyway"
    )]
    PopulationTooSmall { size: usize, threshold: usize },
    #[error("population size {0} must be even and at least 2")]
    PopulationShape(usize),
    #[error("GSEMO mutation rate {0} must lie in (0, 1]")]
    MutationRate(f64),
    #[error("GSEMO mutates with a per-bit rate only; mechanism {0} is not available")]
    GsemoMechanism(String),
    #[error("infeasible instance size: n = {n}, m = {m} (need n >= 2 and n-1 <= m <= n(n-1)/2)")]
    InfeasibleSize { n: usize, m: usize },
    #[error("w_max must be at least 1")]
    ZeroWeightBound,
    #[error("{0}")]
    Sweep(String),
}

/// Errors from the exact oracles.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("instance too large for brute force (m = {m}, limit {limit})")]
    TooLargeForBruteForce { m: usize, limit: usize },
    #[error("convex hull of an empty point set")]
    EmptyInput,
    #[error("parametric recursion exceeded depth cap {0}")]
    RecursionDepth(usize),
}
