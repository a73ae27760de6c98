//! Offspring generation: fair selection, bitwise and balanced mutation,
//! uniform crossover with its probabilistic wrapper, and the closed-form
//! lower bounds `p1`/`p2` on single- and double-bit offspring events.

use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::ConfigError;
use crate::graph::{is_spanning_tree, Genotype, Graph};

/// Monoparental mutation operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mutation {
    /// Flip every bit independently with probability `c / m`.
    Standard { c: f64 },
    /// On spanning trees flip 1-bits with probability `1/(n-1)` and 0-bits
    /// with probability `1/(m-n+1)`; standard mutation with `c = 1` on
    /// everything else.
    Balanced,
}

impl Mutation {
    pub fn name(&self) -> &'static str {
        match self {
            Mutation::Standard { .. } => "standard",
            Mutation::Balanced => "balanced",
        }
    }
}

impl fmt::Display for Mutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mutation::Standard { c } => write!(f, "standard(c={c})"),
            Mutation::Balanced => f.write_str("balanced"),
        }
    }
}

/// Full offspring-generation mechanism. Selection is always fair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MechanismConfig {
    pub mutation: Mutation,
    /// Probability of taking the uniform-crossover branch for a parent pair.
    pub crossover_q: Option<f64>,
}

impl Default for MechanismConfig {
    fn default() -> Self {
        MechanismConfig { mutation: Mutation::Standard { c: 1.0 }, crossover_q: None }
    }
}

impl MechanismConfig {
    pub fn standard(c: f64) -> Self {
        MechanismConfig { mutation: Mutation::Standard { c }, crossover_q: None }
    }

    pub fn balanced() -> Self {
        MechanismConfig { mutation: Mutation::Balanced, crossover_q: None }
    }

    pub fn with_crossover(mut self, q: f64) -> Self {
        self.crossover_q = Some(q);
        self
    }

    pub fn validate(&self, g: &Graph) -> Result<(), ConfigError> {
        match self.mutation {
            Mutation::Standard { c } => check_strength(c, g.m())?,
            Mutation::Balanced => {
                if g.m() == g.n() - 1 {
                    return Err(ConfigError::BalancedOnTree(g.m()));
                }
            }
        }
        if let Some(q) = self.crossover_q {
            if !(q > 0.0 && q < 1.0) {
                return Err(ConfigError::CrossoverProbability(q));
            }
        }
        Ok(())
    }
}

impl fmt::Display for MechanismConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "fair+{}", self.mutation)?;
        if let Some(q) = self.crossover_q {
            write!(f, "+uniform(q={q})")?;
        }
        Ok(())
    }
}

fn check_strength(c: f64, m: usize) -> Result<(), ConfigError> {
    if c > 0.0 && c <= m as f64 {
        Ok(())
    } else {
        Err(ConfigError::MutationStrength { c, m })
    }
}

/// Lower bounds on the probability that some child of a given parent
/// differs from it in exactly one given bit (`p1`) or exactly one given
/// pair of bits (`p2`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MechanismBounds {
    pub p1: f64,
    pub p2: f64,
}

pub fn mechanism_bounds(cfg: &MechanismConfig, g: &Graph) -> Result<MechanismBounds, ConfigError> {
    cfg.validate(g)?;
    let m = g.m() as f64;
    let standard = |c: f64| {
        let p = c / m;
        (p * (1.0 - p).powf(m - 1.0), p * p * (1.0 - p).powf(m - 2.0))
    };
    let (p1, p2) = match cfg.mutation {
        Mutation::Standard { c } => standard(c),
        Mutation::Balanced => {
            let ones = (g.n() - 1) as f64;
            let zeros = (g.m() - g.n() + 1) as f64;
            let p2 = (1.0 / ones)
                * (1.0 / zeros)
                * (1.0 - 1.0 / ones).powf(ones - 1.0)
                * (1.0 - 1.0 / zeros).powf(zeros - 1.0);
            (standard(1.0).0, p2)
        }
    };
    let keep = 1.0 - cfg.crossover_q.unwrap_or(0.0);
    Ok(MechanismBounds { p1: keep * p1, p2: keep * p2 })
}

/// Every index of the population exactly once, in uniformly random order.
pub fn fair_selection<R: Rng + ?Sized>(population_size: usize, rng: &mut R) -> Vec<usize> {
    let mut order: Vec<usize> = (0..population_size).collect();
    order.shuffle(rng);
    order
}

fn flip_each<R: Rng + ?Sized>(s: &mut Genotype, rng: &mut R, rate: impl Fn(bool) -> f64) {
    for j in 0..s.len() {
        if rng.gen::<f64>() < rate(s.get(j)) {
            s.flip(j);
        }
    }
}

/// Flips each bit independently with probability `c / m`.
pub fn standard_bitwise_mutation<R: Rng + ?Sized>(s: &Genotype, c: f64, rng: &mut R) -> Result<Genotype, ConfigError> {
    check_strength(c, s.len())?;
    Ok(mutate_with_rate(s, c / s.len() as f64, rng))
}

/// Flips each bit independently with probability `rate`.
pub fn mutate_with_rate<R: Rng + ?Sized>(s: &Genotype, rate: f64, rng: &mut R) -> Genotype {
    let mut child = s.clone();
    flip_each(&mut child, rng, |_| rate);
    child
}

pub fn balanced_mutation<R: Rng + ?Sized>(g: &Graph, s: &Genotype, rng: &mut R) -> Genotype {
    let mut child = s.clone();
    if is_spanning_tree(g, s) {
        let one_rate = 1.0 / (g.n() - 1) as f64;
        // a tree on m = n - 1 edges has no 0-bits, so the rate is never used
        let zero_rate = match g.m() - (g.n() - 1) {
            0 => 0.0,
            k => 1.0 / k as f64,
        };
        flip_each(&mut child, rng, |bit| if bit { one_rate } else { zero_rate });
    } else {
        flip_each(&mut child, rng, |_| 1.0 / g.m() as f64);
    }
    child
}

/// Applies the configured monoparental mutation.
pub fn mutate<R: Rng + ?Sized>(g: &Graph, s: &Genotype, mutation: Mutation, rng: &mut R) -> Genotype {
    match mutation {
        Mutation::Standard { c } => mutate_with_rate(s, c / s.len() as f64, rng),
        Mutation::Balanced => balanced_mutation(g, s, rng),
    }
}

/// Takes each bit from `s` or `t` with probability 1/2.
pub fn uniform_crossover<R: Rng + ?Sized>(s: &Genotype, t: &Genotype, rng: &mut R) -> Genotype {
    debug_assert_eq!(s.len(), t.len());
    let bits = s.bits().iter().zip(t.bits()).map(|(&a, &b)| if rng.gen::<bool>() { a } else { b }).collect();
    Genotype::from_bits(bits)
}

/// Children of one parent pair and which branch produced them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairChildren {
    pub first: Genotype,
    pub second: Genotype,
    pub crossed: bool,
}

/// With probability `q` returns `(C(s, t), C(t, s))`, otherwise
/// `(M(s), M(t))`.
pub fn crossover_wrapper<R: Rng + ?Sized>(
    g: &Graph,
    s: &Genotype,
    t: &Genotype,
    q: f64,
    mutation: Mutation,
    rng: &mut R,
) -> PairChildren {
    if rng.gen::<f64>() < q {
        PairChildren { first: uniform_crossover(s, t, rng), second: uniform_crossover(t, s, rng), crossed: true }
    } else {
        PairChildren { first: mutate(g, s, mutation, rng), second: mutate(g, t, mutation, rng), crossed: false }
    }
}

/// Produces one child per parent.
///
/// Parents are visited in a fair-selection permutation. Without crossover
/// each visited parent is mutated once; with crossover consecutive parents
/// of the permutation form pairs that go through [`crossover_wrapper`]. The
/// random stream is consumed in permutation order, so the result is a
/// deterministic function of the parents and the stream state.
pub fn generate_offspring<R: Rng + ?Sized>(
    g: &Graph,
    parents: &[&Genotype],
    cfg: &MechanismConfig,
    rng: &mut R,
) -> Vec<Genotype> {
    let order = fair_selection(parents.len(), rng);
    let mut children = Vec::with_capacity(parents.len());
    match cfg.crossover_q {
        None => {
            for &i in &order {
                children.push(mutate(g, parents[i], cfg.mutation, rng));
            }
        }
        Some(q) => {
            for pair in order.chunks(2) {
                match *pair {
                    [a, b] => {
                        let kids = crossover_wrapper(g, parents[a], parents[b], q, cfg.mutation, rng);
                        children.push(kids.first);
                        children.push(kids.second);
                    }
                    [a] => children.push(mutate(g, parents[a], cfg.mutation, rng)),
                    _ => unreachable!(),
                }
            }
        }
    }
    children
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::parse_instance;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn k3a() -> Graph {
        parse_instance("3 3\n1 2 1 3\n2 3 2 2\n1 3 3 1\n").unwrap()
    }

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn fair_selection_is_a_seeded_permutation() {
        let mut perm = fair_selection(4, &mut rng(1));
        assert_eq!(perm, fair_selection(4, &mut rng(1)));
        perm.sort();
        assert_eq!(perm, vec![0, 1, 2, 3]);
        assert_eq!(fair_selection(1, &mut rng(2)), vec![0]);
    }

    #[test]
    fn full_strength_mutation_complements() {
        let s: Genotype = "1100101".parse().unwrap();
        let child = standard_bitwise_mutation(&s, 7.0, &mut rng(3)).unwrap();
        assert_eq!(child.hamming(&s), 7);
    }

    #[test]
    fn strength_outside_range_is_rejected() {
        let s = Genotype::zeros(5);
        assert!(standard_bitwise_mutation(&s, 0.0, &mut rng(0)).is_err());
        assert!(standard_bitwise_mutation(&s, 5.5, &mut rng(0)).is_err());
    }

    #[test]
    fn balanced_rates_on_k3a_path() {
        // 1-bits flip with 1/2, the single 0-bit always flips
        let g = k3a();
        let s: Genotype = "110".parse().unwrap();
        let mut r = rng(4);
        let trials = 20_000;
        let mut flips = [0usize; 3];
        for _ in 0..trials {
            let c = balanced_mutation(&g, &s, &mut r);
            for (j, f) in flips.iter_mut().enumerate() {
                *f += usize::from(c.get(j) != s.get(j));
            }
        }
        assert_eq!(flips[2], trials);
        for &f in &flips[..2] {
            let freq = f as f64 / trials as f64;
            assert!((freq - 0.5).abs() < 3.0 * (0.25 / trials as f64).sqrt() + 1e-3, "{freq}");
        }
    }

    #[test]
    fn crossover_of_identical_parents() {
        let g = k3a();
        let s: Genotype = "101".parse().unwrap();
        assert_eq!(uniform_crossover(&s, &s, &mut rng(5)), s);
        let kids = crossover_wrapper(&g, &s, &s, 1.0 - f64::EPSILON, Mutation::Standard { c: 1.0 }, &mut rng(6));
        assert!(kids.crossed);
        assert_eq!((kids.first, kids.second), (s.clone(), s));
    }

    #[test]
    fn crossover_is_seeded() {
        let s = Genotype::zeros(16);
        let t = Genotype::ones(16);
        assert_eq!(uniform_crossover(&s, &t, &mut rng(7)), uniform_crossover(&s, &t, &mut rng(7)));
    }

    #[test]
    fn config_validation() {
        let g = k3a();
        assert!(MechanismConfig::standard(1.0).with_crossover(0.0).validate(&g).is_err());
        assert!(MechanismConfig::standard(1.0).with_crossover(1.0).validate(&g).is_err());
        assert!(MechanismConfig::standard(4.0).validate(&g).is_err());
        assert!(MechanismConfig::standard(3.0).validate(&g).is_ok());
        let path = parse_instance("3 2\n1 2 1 1\n2 3 1 1\n").unwrap();
        assert_eq!(mechanism_bounds(&MechanismConfig::balanced(), &path), Err(ConfigError::BalancedOnTree(2)));
    }

    #[test]
    fn closed_form_bounds() {
        let g = k3a();
        let b = mechanism_bounds(&MechanismConfig::standard(1.0), &g).unwrap();
        assert!((b.p1 - 4.0 / 27.0).abs() < 1e-15);
        assert!((b.p2 - 2.0 / 27.0).abs() < 1e-15);
        let half = mechanism_bounds(&MechanismConfig::standard(1.0).with_crossover(0.5), &g).unwrap();
        assert!((half.p1 - 2.0 / 27.0).abs() < 1e-15);
        assert!((half.p2 - 1.0 / 27.0).abs() < 1e-15);
    }

    #[test]
    fn p1_at_least_one_over_em() {
        for m in [10usize, 100, 1000] {
            let text = (0..m).fold(format!("2 {m}\n"), |acc, _| acc + "1 2 1 1\n");
            let g = parse_instance(&text).unwrap();
            let b = mechanism_bounds(&MechanismConfig::standard(1.0), &g).unwrap();
            assert!(b.p1 >= 1.0 / (std::f64::consts::E * m as f64), "m = {m}");
            assert!(b.p2 <= b.p1);
        }
    }

    #[test]
    fn offspring_population_has_parent_size() {
        let g = k3a();
        let parents: Vec<Genotype> = ["110", "011", "101", "000"].iter().map(|s| s.parse().unwrap()).collect();
        let refs: Vec<&Genotype> = parents.iter().collect();
        for cfg in [MechanismConfig::standard(1.0), MechanismConfig::balanced().with_crossover(0.5)] {
            let a = generate_offspring(&g, &refs, &cfg, &mut rng(8));
            assert_eq!(a.len(), 4);
            assert!(a.iter().all(|c| c.len() == 3));
            assert_eq!(a, generate_offspring(&g, &refs, &cfg, &mut rng(8)));
        }
    }
}
