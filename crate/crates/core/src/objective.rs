//! Penalized bi-objective fitness and the domination relation.

use std::cmp::Ordering;
use std::fmt;

use crate::graph::{components, edge_count, Genotype, Graph};

/// Pair of objective values, both minimized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FitnessVector {
    pub f1: u128,
    pub f2: u128,
}

impl FitnessVector {
    pub const fn new(f1: u128, f2: u128) -> Self {
        FitnessVector { f1, f2 }
    }

    /// Componentwise `<=`.
    pub fn weakly_dominates(&self, other: &FitnessVector) -> bool {
        self.f1 <= other.f1 && self.f2 <= other.f2
    }

    /// Componentwise `<=` and not equal.
    pub fn strictly_dominates(&self, other: &FitnessVector) -> bool {
        self.weakly_dominates(other) && self != other
    }
}

impl fmt::Display for FitnessVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.f1, self.f2)
    }
}

/// Result of comparing two fitness vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DominationOutcome {
    FirstStrictlyDominates,
    SecondStrictlyDominates,
    Equal,
    Incomparable,
}

pub fn compare(a: &FitnessVector, b: &FitnessVector) -> DominationOutcome {
    match (a.f1.cmp(&b.f1), a.f2.cmp(&b.f2)) {
        (Ordering::Equal, Ordering::Equal) => DominationOutcome::Equal,
        (Ordering::Less | Ordering::Equal, Ordering::Less | Ordering::Equal) => {
            DominationOutcome::FirstStrictlyDominates
        }
        (Ordering::Greater | Ordering::Equal, Ordering::Greater | Ordering::Equal) => {
            DominationOutcome::SecondStrictlyDominates
        }
        _ => DominationOutcome::Incomparable,
    }
}

/// `f_i(s) = (c(s) - 1) w_ub^2 + (e(s) - (n - 1)) w_ub + sum of w_i over s`.
///
/// The middle term can be negative; the total never is, since a graph with
/// fewer than `n - 1` edges has at least two components.
pub fn evaluate(g: &Graph, s: &Genotype) -> FitnessVector {
    debug_assert_eq!(s.len(), g.m());
    let w_ub = g.w_ub() as i128;
    let c = components(g, s) as i128;
    let e = edge_count(s) as i128;
    let penalty = (c - 1) * w_ub * w_ub + (e - (g.n() as i128 - 1)) * w_ub;
    let (mut w1, mut w2) = (0i128, 0i128);
    for j in s.selected() {
        let edge = g.edge(j);
        w1 += edge.w1 as i128;
        w2 += edge.w2 as i128;
    }
    let f1 = penalty + w1;
    let f2 = penalty + w2;
    debug_assert!(f1 >= 0 && f2 >= 0);
    FitnessVector::new(f1 as u128, f2 as u128)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::parse_instance;
    use proptest::prelude::*;

    fn k3a() -> Graph {
        parse_instance("3 3\n1 2 1 3\n2 3 2 2\n1 3 3 1\n").unwrap()
    }

    #[test]
    fn evaluates_k3a_by_hand() {
        let g = k3a();
        let f = |s: &str| evaluate(&g, &s.parse().unwrap());
        assert_eq!(f("110"), FitnessVector::new(3, 5));
        assert_eq!(f("100"), FitnessVector::new(703, 705));
        assert_eq!(f("000"), FitnessVector::new(1404, 1404));
        assert_eq!(f("111"), FitnessVector::new(33, 33));
    }

    #[test]
    fn compare_examples() {
        let v = FitnessVector::new;
        assert_eq!(compare(&v(3, 5), &v(4, 4)), DominationOutcome::Incomparable);
        assert_eq!(compare(&v(3, 5), &v(3, 5)), DominationOutcome::Equal);
        assert_eq!(compare(&v(3, 5), &v(4, 6)), DominationOutcome::FirstStrictlyDominates);
        assert_eq!(compare(&v(4, 6), &v(3, 5)), DominationOutcome::SecondStrictlyDominates);
        assert_eq!(compare(&v(3, 6), &v(3, 5)), DominationOutcome::SecondStrictlyDominates);
    }

    fn vector() -> impl Strategy<Value = FitnessVector> {
        (0u128..6, 0u128..6).prop_map(|(a, b)| FitnessVector::new(a, b))
    }

    proptest! {
        #[test]
        fn compare_is_antisymmetric(a in vector(), b in vector()) {
            let swapped = match compare(&a, &b) {
                DominationOutcome::FirstStrictlyDominates => DominationOutcome::SecondStrictlyDominates,
                DominationOutcome::SecondStrictlyDominates => DominationOutcome::FirstStrictlyDominates,
                other => other,
            };
            prop_assert_eq!(compare(&b, &a), swapped);
            prop_assert_eq!(compare(&a, &b) == DominationOutcome::Equal, a == b);
        }

        #[test]
        fn weak_domination_is_transitive(a in vector(), b in vector(), c in vector()) {
            prop_assert!(a.weakly_dominates(&a));
            if a.weakly_dominates(&b) && b.weakly_dominates(&c) {
                prop_assert!(a.weakly_dominates(&c));
            }
            if a.weakly_dominates(&b) && b.weakly_dominates(&a) {
                prop_assert_eq!(a, b);
            }
        }
    }
}
