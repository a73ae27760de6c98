//! Exhaustive and property-based checks against brute-force oracles.

use std::collections::BTreeSet;

use mst_moea::drift::{coverage_check, index_distance, initial_potential_bound, potential_of_population};
use mst_moea::experiment::{generate_instance, TrialRng};
use mst_moea::graph::{is_spanning_tree, mst_scalar, weight_of, Genotype, Graph, Objective};
use mst_moea::nsga2::{
    crowding_distance, fast_non_dominated_sort, min_safe_population, run_nsga2, survival_selection, CrowdingFormula,
    Individual, Nsga2Config, RunOptions,
};
use mst_moea::objective::{evaluate, FitnessVector};
use mst_moea::oracle::{brute_force_pareto, extremal_points, for_each_spanning_tree};
use mst_moea::run::StopRule;
use mst_moea::variation::MechanismConfig;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

fn all_genotypes(m: usize) -> impl Iterator<Item = Genotype> {
    (0u32..1 << m).map(move |mask| Genotype::from_bits((0..m).map(|j| mask >> j & 1 == 1).collect()))
}

fn small_graph() -> impl Strategy<Value = Graph> {
    (3usize..=6, any::<u64>(), 1u64..=6).prop_flat_map(|(n, seed, w)| {
        let max_m = (n * (n - 1) / 2).min(10);
        (n - 1..=max_m).prop_map(move |m| generate_instance(n, m, w, seed).unwrap())
    })
}

fn vectors(max: u128, len: std::ops::Range<usize>) -> impl Strategy<Value = Vec<FitnessVector>> {
    prop::collection::vec((0..max, 0..max).prop_map(|(a, b)| FitnessVector::new(a, b)), len)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn first_front_matches_pairwise_oracle(values in vectors(10, 1..50)) {
        let partition = fast_non_dominated_sort(&values);
        let undominated: Vec<usize> =
            (0..values.len()).filter(|&i| !values.iter().any(|o| o.strictly_dominates(&values[i]))).collect();
        let mut first = partition.fronts[0].clone();
        first.sort();
        prop_assert_eq!(first, undominated);
        let mut all: Vec<usize> = partition.fronts.concat();
        all.sort();
        prop_assert_eq!(all, (0..values.len()).collect::<Vec<_>>());
        for pair in partition.fronts.windows(2) {
            for &later in &pair[1] {
                prop_assert!(pair[0].iter().any(|&i| values[i].strictly_dominates(&values[later])));
            }
        }
    }

    #[test]
    fn crowding_stays_in_range(front in vectors(30, 1..30), symmetric in any::<bool>()) {
        let formula = if symmetric { CrowdingFormula::Symmetric } else { CrowdingFormula::Forward };
        // the symmetric gap spans two neighbours, so its bound doubles
        let cap = if symmetric { 4.0 } else { 2.0 };
        for c in crowding_distance(&front, formula) {
            prop_assert!(c == f64::INFINITY || (0.0..=cap).contains(&c), "{}", c);
        }
    }

    #[test]
    fn scalar_mst_is_optimal(g in small_graph(), weights in prop::collection::vec((0u64..20, 0u64..20).prop_filter("nonzero", |&(a, b)| a + b > 0), 20)) {
        let mut trees = Vec::new();
        for_each_spanning_tree(&g, |s| trees.push(weight_of(&g, s))).unwrap();
        for (a, b) in weights {
            let found = mst_scalar(&g, a, b, Objective::First);
            prop_assert!(is_spanning_tree(&g, &found.genotype));
            prop_assert_eq!(weight_of(&g, &found.genotype), found.weights);
            let best = trees.iter().map(|w| a as u128 * w.f1 + b as u128 * w.f2).min().unwrap();
            prop_assert_eq!(found.scalar(a, b), best);
            // among scalar optima the first objective is minimal
            let tie = trees.iter().filter(|w| a as u128 * w.f1 + b as u128 * w.f2 == best).map(|w| w.f1).min().unwrap();
            prop_assert_eq!(found.weights.f1, tie);
        }
    }

    #[test]
    fn extremal_points_are_pareto_optimal(g in small_graph()) {
        let pareto = brute_force_pareto(&g).unwrap();
        let front = extremal_points(&g);
        prop_assert!(front.points.iter().all(|q| pareto.points.contains(q)));
        prop_assert!(front.is_convex_chain());
        prop_assert!(front.len() <= g.incomparable_bound());
    }

    #[test]
    fn selection_keeps_size_and_first_front(values in prop::collection::vec((0u128..8, 0u128..8), 4..40), keep in 1usize..20) {
        let combined: Vec<Individual> = values
            .iter()
            .map(|&(a, b)| Individual { genotype: Genotype::zeros(1), fitness: FitnessVector::new(a, b), rank: None, crowding: None })
            .collect();
        let keep = keep.min(combined.len());
        let fitness: Vec<FitnessVector> = combined.iter().map(|i| i.fitness).collect();
        let first: BTreeSet<FitnessVector> =
            fast_non_dominated_sort(&fitness).fronts[0].iter().map(|&i| fitness[i]).collect();
        let mut rng = TrialRng::seed_from_u64(7);
        let (survivors, _) = survival_selection(combined, keep, CrowdingFormula::Forward, &mut rng);
        prop_assert_eq!(survivors.len(), keep);
        // with room for four copies of every rank-1 value, all of them survive
        if keep >= 4 * first.len() {
            let kept: BTreeSet<FitnessVector> = survivors.iter().map(|i| i.fitness).collect();
            prop_assert!(first.is_subset(&kept));
        }
    }
}

#[test]
fn penalty_separates_trees_exhaustively() {
    for (n, m, seed) in [(4, 6, 1), (5, 8, 2), (6, 12, 3), (7, 12, 4), (6, 9, 5)] {
        let g = generate_instance(n, m, 7, seed).unwrap();
        let (mut trees, mut others) = (Vec::new(), Vec::new());
        for s in all_genotypes(m) {
            let f = evaluate(&g, &s);
            assert_eq!(g.is_tree_fitness(&f), is_spanning_tree(&g, &s), "{s}");
            if is_spanning_tree(&g, &s) {
                trees.push(f);
            } else {
                others.push(f);
            }
        }
        let worst_tree = trees.iter().map(|f| f.f1.max(f.f2)).max().unwrap();
        let best_other = others.iter().map(|f| f.f1.min(f.f2)).min().unwrap();
        assert!(worst_tree < g.w_ub() && g.w_ub() <= best_other, "n{n} m{m}");
    }
}

#[test]
fn first_front_of_all_genotypes_is_the_pareto_front() {
    for (n, m, seed) in [(4, 5, 11), (5, 7, 12), (5, 10, 13), (6, 10, 14)] {
        let g = generate_instance(n, m, 4, seed).unwrap();
        let fitness: Vec<FitnessVector> = all_genotypes(m).map(|s| evaluate(&g, &s)).collect();
        let rank_one: BTreeSet<FitnessVector> =
            fast_non_dominated_sort(&fitness).fronts[0].iter().map(|&i| fitness[i]).collect();
        let pareto: BTreeSet<FitnessVector> = brute_force_pareto(&g).unwrap().points.into_iter().collect();
        assert_eq!(rank_one, pareto, "n{n} m{m}");
        let everything: Vec<FitnessVector> = rank_one.into_iter().collect();
        assert!(coverage_check(&g, &everything, &extremal_points(&g)));
    }
}

#[test]
fn brute_force_counts_spanning_trees() {
    // Cayley: K_n has n^(n-2) spanning trees
    for n in 3..=6 {
        let g = generate_instance(n, n * (n - 1) / 2, 3, 0).unwrap();
        let mut count = 0u32;
        for_each_spanning_tree(&g, |_| count += 1).unwrap();
        assert_eq!(count, (n as u32).pow(n as u32 - 2));
    }
}

#[test]
fn every_tree_respects_the_initial_potential_bound() {
    for seed in 0..60u64 {
        for (n, m) in [(4, 3), (5, 6), (6, 9), (7, 12), (5, 10)] {
            let g = generate_instance(n, m, 1 + seed % 10, seed).unwrap();
            let front = extremal_points(&g);
            let bound = initial_potential_bound(&g);
            for_each_spanning_tree(&g, |s| {
                let p = weight_of(&g, s);
                let d: i128 = (0..front.len()).map(|i| index_distance(&front, i, &p)).sum();
                assert!((0..=bound).contains(&d), "n{n} m{m} seed {seed}: d({p}) = {d} > {bound}");
            })
            .unwrap();
        }
    }
}

#[test]
fn coverage_agrees_with_zero_potential_on_random_populations() {
    let g = generate_instance(6, 10, 4, 21).unwrap();
    let front = extremal_points(&g);
    let mut trees = Vec::new();
    for_each_spanning_tree(&g, |s| trees.push(evaluate(&g, s))).unwrap();
    let mut rng = TrialRng::seed_from_u64(5);
    let mut covered = 0;
    for _ in 0..1000 {
        let size = rng.gen_range(1..=12);
        let mut population: Vec<FitnessVector> = trees.choose_multiple(&mut rng, size).copied().collect();
        if rng.gen_bool(0.3) {
            population.extend(front.points.iter().copied());
        }
        if rng.gen_bool(0.3) {
            let bits = (0..g.m()).map(|_| rng.gen_bool(0.5)).collect();
            population.push(evaluate(&g, &Genotype::from_bits(bits)));
        }
        // coverage_check itself asserts agreement; count both outcomes
        if coverage_check(&g, &population, &front) {
            covered += 1;
            assert_eq!(potential_of_population(&g, &population, &front).total(), Some(0));
        }
    }
    assert!(covered > 100 && covered < 1000, "{covered}");
}

#[test]
fn long_monitored_run_on_triangle_is_clean() {
    let g = mst_moea::graph::parse_instance("3 3\n1 2 1 3\n2 3 2 2\n1 3 3 1\n").unwrap();
    assert_eq!(min_safe_population(&g), 28);
    let opts = RunOptions {
        stop: StopRule::BudgetOnly,
        budget: 2000,
        monitors: true,
        trace: true,
        allow_unsafe_population: false,
    };
    let cfg = Nsga2Config::new(28, MechanismConfig::default());
    let run = run_nsga2(&g, cfg, extremal_points(&g), &opts, TrialRng::seed_from_u64(3)).unwrap();
    assert_eq!(run.generations, 2000);
    assert!(run.violations.is_empty(), "{:?}", run.violations);
    let totals: Vec<i128> = run.trace.iter().map(|t| t.state.total).collect();
    assert!(totals.windows(2).all(|w| w[1] <= w[0]));
    assert_eq!(totals.last(), Some(&0));
}

#[test]
fn interior_distance_is_nonnegative_on_parallel_edges() {
    // the middle hull vertex and an interior point only exist as parallel edges
    let text = "3 5\n1 2 1 9\n1 2 4 4\n1 2 9 1\n1 2 6 6\n2 3 1 1\n";
    let g = mst_moea::graph::parse_instance(text).unwrap();
    let front = extremal_points(&g);
    let shifted = |a: u128, b: u128| FitnessVector::new(a + 1, b + 1);
    assert_eq!(front.points, vec![shifted(1, 9), shifted(4, 4), shifted(9, 1)]);
    let mut seen = 0;
    for_each_spanning_tree(&g, |s| {
        let p = weight_of(&g, s);
        for i in 0..front.len() {
            let d = index_distance(&front, i, &p);
            assert!(d >= 0, "d_{i}({p}) = {d}");
            assert_eq!(d == 0, p == front.points[i]);
        }
        seen += 1;
    })
    .unwrap();
    assert_eq!(seen, 4);
}
