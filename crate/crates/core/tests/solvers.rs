//! Solver and aggregation properties, checked against brute force.

use envyorder::aggregation::{borda_scores, copeland_scores};
use envyorder::exact::ratio;
use envyorder::perm::{kendall_tau, permutations};
use envyorder::{
    aggregate, evaluate_objective, solve_exact_with, solve_local_search, solve_subset_dp_with, AggregationMethod,
    Problem, Rational, SerialOrder, SolverOptions, WeightClass, WeightMatrix,
};
use num_traits::Zero;
use proptest::prelude::*;

fn ranking(len: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((0..len).collect::<Vec<_>>()).prop_shuffle()
}

fn problem(n: std::ops::RangeInclusive<usize>, m: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Problem> {
    (n, m).prop_flat_map(|(n, m)| prop::collection::vec(ranking(n), m)).prop_map(|priorities| {
        let n = priorities[0].len();
        Problem::indexed(&vec![n as u32; priorities.len()], priorities).unwrap()
    })
}

fn cell(max: i64) -> impl Strategy<Value = Rational> {
    (0..=max, 1..=5i64).prop_map(|(a, b)| ratio(a, b))
}

/// Weights of any class for `problem`, cells drawn from `0..=max / 1..=5`.
fn weights_for(problem: &Problem, class: WeightClass, max: i64) -> impl Strategy<Value = WeightMatrix> {
    let (n, m) = (problem.n(), problem.m());
    prop::collection::vec(cell(max), m * n * n).prop_map(move |cells| {
        let at = |s: usize, t: usize, u: usize| cells[(s * n + t) * n + u].clone();
        WeightMatrix::from_fn(n, m, class, |s, t, u| match class {
            WeightClass::Constant => at(0, 0, 0),
            WeightClass::EarlierPosition => at(s, t, 0),
            WeightClass::PairwisePosition => at(0, t, u),
            WeightClass::Full => at(s, t, u),
        })
        .unwrap()
    })
}

fn instance(
    n: std::ops::RangeInclusive<usize>,
    classes: &'static [WeightClass],
    max: i64,
) -> impl Strategy<Value = (Problem, WeightMatrix)> {
    (problem(n, 1..=3), prop::sample::select(classes))
        .prop_flat_map(move |(p, class)| (Just(p.clone()), weights_for(&p, class, max)))
}

fn all_optima() -> SolverOptions {
    SolverOptions { argmin_cap: usize::MAX, ..SolverOptions::default() }
}

/// Every order with its exact objective, by enumeration.
fn brute_force(problem: &Problem, weights: &WeightMatrix) -> (Rational, Vec<Vec<usize>>) {
    let scored: Vec<(Vec<usize>, Rational)> = permutations(problem.n())
        .into_iter()
        .map(|o| {
            let v =
                evaluate_objective(problem, weights, &SerialOrder::checked(problem.n(), o.clone()).unwrap()).unwrap();
            (o, v)
        })
        .collect();
    let best = scored.iter().map(|(_, v)| v).min().unwrap().clone();
    let orders = scored.into_iter().filter(|(_, v)| *v == best).map(|(o, _)| o).collect();
    (best, orders)
}

fn agents(orders: &[SerialOrder]) -> Vec<Vec<usize>> {
    orders.iter().map(|o| o.agents().to_vec()).collect()
}

const DECOMPOSABLE: &[WeightClass] = &[WeightClass::Constant, WeightClass::EarlierPosition];
const ANY: &[WeightClass] =
    &[WeightClass::Constant, WeightClass::EarlierPosition, WeightClass::PairwisePosition, WeightClass::Full];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn branch_and_bound_finds_every_optimum((problem, weights) in instance(1..=6, ANY, 12)) {
        let solved = solve_exact_with(&problem, &weights, &all_optima()).unwrap();
        let (best, orders) = brute_force(&problem, &weights);
        prop_assert_eq!(&solved.objective, &best);
        prop_assert_eq!(agents(&solved.best_orders), orders);
        prop_assert_eq!(solved.optimum_count, Some(solved.best_orders.len() as u64));
        for order in &solved.best_orders {
            prop_assert_eq!(evaluate_objective(&problem, &weights, order).unwrap(), solved.objective.clone());
        }
    }

    #[test]
    fn dynamic_program_matches_branch_and_bound((problem, weights) in instance(1..=8, DECOMPOSABLE, 12)) {
        let dp = solve_subset_dp_with(&problem, &weights, &all_optima()).unwrap();
        let bb = solve_exact_with(&problem, &weights, &all_optima()).unwrap();
        prop_assert_eq!(&dp.objective, &bb.objective);
        prop_assert_eq!(agents(&dp.best_orders), agents(&bb.best_orders));
        prop_assert_eq!(dp.optimum_count, bb.optimum_count);
    }

    #[test]
    fn argmin_survives_positive_rescaling(
        ((problem, weights), a, b) in (instance(1..=6, ANY, 12), 1..=7i64, 1..=7i64)
    ) {
        let factor = ratio(a, b);
        let scaled = weights.scaled(&factor).unwrap();
        let plain = solve_exact_with(&problem, &weights, &all_optima()).unwrap();
        let rescaled = solve_exact_with(&problem, &scaled, &all_optima()).unwrap();
        prop_assert_eq!(agents(&plain.best_orders), agents(&rescaled.best_orders));
        prop_assert_eq!(&plain.objective * &factor, rescaled.objective.clone());
        prop_assert_eq!(plain.expected_envy(&weights), rescaled.expected_envy(&scaled));
    }

    #[test]
    fn constant_weights_minimize_kendall_tau((problem, c) in (problem(1..=6, 1..=4), cell(9))) {
        let weights = WeightMatrix::constant(problem.n(), problem.m(), c.clone()).unwrap();
        let solved = solve_exact_with(&problem, &weights, &SolverOptions::default()).unwrap();
        let tau = |o: &[usize]| problem.priorities().iter().map(|p| kendall_tau(o, p)).sum::<usize>();
        let least = permutations(problem.n()).iter().map(|o| tau(o)).min().unwrap();
        prop_assert_eq!(solved.objective, c * Rational::from_integer(least.into()));
    }

    #[test]
    fn a_common_priority_is_the_unique_optimum(
        (n, common, cells) in (1..=7usize).prop_flat_map(|n| (Just(n), ranking(n), prop::collection::vec(1..=9i64, 2 * n * n)))
    ) {
        let m = 2;
        let problem = Problem::indexed(&[n as u32; 2], vec![common.clone(); m]).unwrap();
        let weights = WeightMatrix::from_fn(n, m, WeightClass::Full, |s, t, u| ratio(cells[(s * n + t) * n + u], 3)).unwrap();
        let solved = solve_exact_with(&problem, &weights, &all_optima()).unwrap();
        prop_assert!(solved.objective.is_zero());
        prop_assert_eq!(agents(&solved.best_orders), vec![common]);
    }

    #[test]
    fn local_search_never_beats_the_optimum((problem, weights) in instance(1..=6, ANY, 12), seed in 0..1000u64) {
        let local = solve_local_search(&problem, &weights, seed, 2).unwrap();
        let exact = solve_exact_with(&problem, &weights, &SolverOptions::default()).unwrap();
        prop_assert!(local.objective >= exact.objective);
        prop_assert_eq!(evaluate_objective(&problem, &weights, local.best()).unwrap(), local.objective.clone());
        prop_assert_eq!(local, solve_local_search(&problem, &weights, seed, 2).unwrap());
    }

    #[test]
    fn aggregation_returns_permutations(problem in problem(1..=7, 1..=5)) {
        for method in AggregationMethod::ALL {
            let mut order = aggregate(method, &problem).unwrap().into_inner();
            order.sort_unstable();
            prop_assert_eq!(order, (0..problem.n()).collect::<Vec<_>>());
        }
    }

    #[test]
    fn aggregation_is_unanimous((common, m) in (1..=7usize).prop_flat_map(ranking).prop_flat_map(|r| (Just(r), 1..=4usize))) {
        let n = common.len();
        let problem = Problem::indexed(&vec![n as u32; m], vec![common.clone(); m]).unwrap();
        for method in AggregationMethod::ALL {
            prop_assert_eq!(aggregate(method, &problem).unwrap().into_inner(), common.clone(), "{}", method);
        }
    }

    #[test]
    fn borda_scores_two_ways(problem in problem(1..=7, 1..=5)) {
        let (n, m) = (problem.n(), problem.m());
        let rank_sum: Vec<usize> = (0..n).map(|i| (0..m).map(|s| problem.priority_rank(s, i)).sum()).collect();
        let expected: Vec<usize> = rank_sum.iter().map(|r| m * (n - 1) - r).collect();
        prop_assert_eq!(borda_scores(&problem), expected);
    }

    #[test]
    fn copeland_with_two_agents_follows_the_majority(problem in problem(2..=2, 1..=6)) {
        let m = problem.m();
        let first_wins = (0..m).filter(|&s| problem.outranks(s, 0, 1)).count();
        let expected = if 2 * first_wins >= m { vec![0, 1] } else { vec![1, 0] };
        prop_assert_eq!(aggregate(AggregationMethod::Copeland, &problem).unwrap().into_inner(), expected);
        let scores = copeland_scores(&problem);
        prop_assert_eq!(scores.iter().sum::<usize>(), usize::from(2 * first_wins != m));
    }

    #[test]
    fn kemeny_aggregation_attains_the_optimum(problem in problem(1..=6, 1..=5)) {
        let order = aggregate(AggregationMethod::Kemeny, &problem).unwrap();
        let weights = WeightMatrix::constant(problem.n(), problem.m(), ratio(1, 1)).unwrap();
        let (best, orders) = brute_force(&problem, &weights);
        prop_assert_eq!(evaluate_objective(&problem, &weights, &order).unwrap(), best);
        prop_assert_eq!(order.agents(), &orders[0][..]);
    }
}
