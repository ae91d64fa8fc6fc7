//! Properties of the mechanism, distributions, weights and exact evaluation.

#![allow(clippy::needless_range_loop)]

use envyorder::exact::ratio;
use envyorder::perm::{kendall_tau, permutations};
use envyorder::weights::independent_envy_probability;
use envyorder::{
    capacity_weights, count_justified_envy, enumerate_support, expected_envy_exact, independent_weights,
    kemeny_weights, marginal_weights, marginals_of, run_sd, DistributionSpec, PositionMarginals, PreferenceProfile,
    Problem, Rational, SerialOrder,
};
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

fn ranking(len: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((0..len).collect::<Vec<_>>()).prop_shuffle()
}

fn rankings(len: usize, count: usize) -> impl Strategy<Value = Vec<Vec<usize>>> {
    prop::collection::vec(ranking(len), count)
}

/// A problem with `n ≤ 4` agents, up to three objects of capacity 1..=3,
/// one random profile and one random order.
fn small_instance() -> impl Strategy<Value = (Problem, Vec<Vec<usize>>, Vec<usize>)> {
    (1..=3usize, prop::collection::vec(1..=3u32, 3))
        .prop_flat_map(|(m, caps)| {
            let caps: Vec<u32> = caps[..m].to_vec();
            let seats = caps.iter().sum::<u32>() as usize;
            (Just(caps), 1..=seats.min(4))
        })
        .prop_flat_map(|(caps, n)| {
            let m = caps.len();
            (Just(caps), rankings(n, m), rankings(m, n), ranking(n))
        })
        .prop_map(|(caps, priorities, prefs, order)| (Problem::indexed(&caps, priorities).unwrap(), prefs, order))
}

fn unit_problem(n: usize) -> impl Strategy<Value = Problem> {
    rankings(n, n).prop_map(|p| Problem::unit(p).unwrap())
}

/// Every assignment of agents to objects within capacities.
fn feasible_assignments(problem: &Problem) -> Vec<Vec<usize>> {
    let (n, m) = (problem.n(), problem.m());
    let mut out = Vec::new();
    let mut cur = vec![0; n];
    loop {
        let mut load = vec![0u32; m];
        cur.iter().for_each(|&s| load[s] += 1);
        if (0..m).all(|s| load[s] <= problem.capacity(s)) {
            out.push(cur.clone());
        }
        let mut k = 0;
        while k < n {
            cur[k] += 1;
            if cur[k] < m {
                break;
            }
            cur[k] = 0;
            k += 1;
        }
        if k == n {
            return out;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn sd_respects_capacities_and_is_pareto_efficient((problem, prefs, order) in small_instance()) {
        let profile = PreferenceProfile::new(&problem, prefs).unwrap();
        let order = SerialOrder::new(&problem, order).unwrap();
        let matching = run_sd(&problem, &profile, &order).unwrap();
        let ranks = profile.rank_tables();
        let mine: Vec<usize> = (0..problem.n()).map(|i| ranks[i][matching.object_of(i)]).collect();
        for s in 0..problem.m() {
            let load = matching.assignment().iter().filter(|&&x| x == s).count();
            prop_assert!(load <= problem.capacity(s) as usize);
        }
        for other in feasible_assignments(&problem) {
            let theirs: Vec<usize> = (0..problem.n()).map(|i| ranks[i][other[i]]).collect();
            let no_worse = mine.iter().zip(&theirs).all(|(a, b)| b <= a);
            let better = mine.iter().zip(&theirs).any(|(a, b)| b < a);
            prop_assert!(!(no_worse && better), "{:?} dominates {:?}", other, matching.assignment());
        }
    }

    #[test]
    fn envy_count_matches_a_double_loop((problem, prefs, order) in small_instance()) {
        let profile = PreferenceProfile::new(&problem, prefs).unwrap();
        let order = SerialOrder::new(&problem, order).unwrap();
        let matching = run_sd(&problem, &profile, &order).unwrap();
        let report = count_justified_envy(&problem, &profile, &matching);
        let mut brute = Vec::new();
        for i in 0..problem.n() {
            for j in 0..problem.n() {
                let s = matching.object_of(j);
                if i != j && profile.prefers(i, s, matching.object_of(i)) && problem.outranks(s, i, j) {
                    brute.push((i, j, s));
                }
            }
        }
        let mut got: Vec<_> = report.triplets.iter().map(|t| (t.envier, t.envied, t.object)).collect();
        got.sort_unstable();
        brute.sort_unstable();
        prop_assert_eq!(report.count(), got.len());
        prop_assert_eq!(got, brute);
    }

    #[test]
    fn identical_unit_envy_counts_priority_disagreements(
        (problem, r, order) in (2..=6usize).prop_flat_map(|n| (unit_problem(n), ranking(n), ranking(n)))
    ) {
        let n = problem.n();
        let profile = PreferenceProfile::identical(&problem, r.clone()).unwrap();
        let order = SerialOrder::new(&problem, order).unwrap();
        let matching = run_sd(&problem, &profile, &order).unwrap();
        let rho = order.agents();
        let mut disagreements = 0;
        for t in 0..n {
            for u in t + 1..n {
                prop_assert!(profile.prefers(rho[u], r[t], matching.object_of(rho[u])));
                if problem.outranks(r[t], rho[u], rho[t]) {
                    disagreements += 1;
                }
            }
        }
        prop_assert_eq!(count_justified_envy(&problem, &profile, &matching).count(), disagreements);
    }

    #[test]
    fn second_agent_never_envies_the_first_when_seats_are_plentiful(
        (problem, prefs, order) in small_instance().prop_filter("capacities ≥ 2", |(p, _, _)| {
            p.capacities().iter().all(|&q| q >= 2) && p.n() >= 2
        })
    ) {
        let profile = PreferenceProfile::new(&problem, prefs).unwrap();
        let order = SerialOrder::new(&problem, order).unwrap();
        let matching = run_sd(&problem, &profile, &order).unwrap();
        let (first, second) = (order.agents()[0], order.agents()[1]);
        let report = count_justified_envy(&problem, &profile, &matching);
        prop_assert!(!report.triplets.iter().any(|t| t.envier == second && t.envied == first));
    }

    #[test]
    fn explicit_marginals_are_doubly_stochastic_and_match_the_support(
        (m, support) in (2..=4usize).prop_flat_map(|m| (Just(m), prop::collection::vec((ranking(m), 1..=9i64), 1..=6)))
    ) {
        let mut merged = std::collections::BTreeMap::new();
        support.into_iter().for_each(|(r, w)| *merged.entry(r).or_insert(0) += w);
        let total: i64 = merged.values().sum();
        let spec = DistributionSpec::IdenticalExplicit(merged.into_iter().map(|(r, w)| (r, ratio(w, total))).collect());
        let problem = Problem::unit(vec![(0..m).collect(); m]).unwrap();
        let marginals = marginals_of(&spec, &problem).unwrap();
        let mut empirical = vec![vec![Rational::zero(); m]; m];
        for (profile, p) in enumerate_support(&spec, &problem).unwrap().to_vec() {
            for (t, &s) in profile.ranking(0).iter().enumerate() {
                empirical[s][t] += p.clone();
            }
        }
        for s in 0..m {
            let row: Rational = (0..m).map(|t| marginals.get(s, t).clone()).sum();
            let col: Rational = (0..m).map(|t| marginals.get(t, s).clone()).sum();
            prop_assert!(row.is_one() && col.is_one());
            for t in 0..m {
                prop_assert_eq!(marginals.get(s, t), &empirical[s][t]);
            }
        }
    }

    #[test]
    fn builders_agree_where_their_domains_meet(problem in (1..=6usize).prop_flat_map(unit_problem)) {
        let n = problem.n();
        let kemeny = kemeny_weights(&problem).unwrap();
        let marginal = marginal_weights(&PositionMarginals::uniform(n));
        let capacity = capacity_weights(&problem).unwrap();
        let independent = independent_weights(n).unwrap();
        for s in 0..n {
            for t in 0..n {
                for u in t + 1..n {
                    prop_assert_eq!(kemeny.get(s, t, u), marginal.get(s, t, u));
                    prop_assert_eq!(kemeny.get(s, t, u), capacity.get(s, t, u));
                    let p = independent.get(s, t, u);
                    prop_assert!(!p.is_negative() && p <= Rational::one());
                    if u + 1 < n {
                        prop_assert!(p <= independent.get(s, t, u + 1));
                    }
                }
                if t + 1 < n {
                    prop_assert_eq!(independent_envy_probability(n, t + 1, t + 2), ratio(1, (n - t) as i64));
                }
            }
        }
    }

    #[test]
    fn capacity_weights_lie_in_the_unit_interval(
        caps in prop::collection::vec(1..=4u32, 1..=4).prop_filter("at least two seats", |c| c.iter().sum::<u32>() >= 2)
    ) {
        let n = caps.iter().sum::<u32>() as usize;
        let problem = Problem::indexed(&caps, vec![(0..n).collect(); caps.len()]).unwrap();
        let weights = capacity_weights(&problem).unwrap();
        for (_, _, _, w) in weights.table() {
            prop_assert!(!w.is_negative() && w <= Rational::one());
        }
    }

    #[test]
    fn identical_uniform_envy_is_the_mean_kendall_tau(
        (problem, order) in (2..=5usize).prop_flat_map(|n| (unit_problem(n), ranking(n)))
    ) {
        let n = problem.n();
        let order = SerialOrder::new(&problem, order).unwrap();
        let got = expected_envy_exact(&problem, &order, &DistributionSpec::IdenticalUniform).unwrap();
        let tau: usize = problem.priorities().iter().map(|p| kendall_tau(order.agents(), p)).sum();
        prop_assert_eq!(got.mean.as_exact().unwrap(), &ratio(tau as i64, n as i64));
        prop_assert_eq!(got.standard_error, 0.0);
    }

    #[test]
    fn equal_marginals_give_equal_expected_envy(
        (problem, base, order) in unit_problem(4).prop_flat_map(|p| (Just(p), ranking(4), ranking(4)))
    ) {
        let swap = |r: &[usize], pairs: &[(usize, usize)]| {
            let mut r = r.to_vec();
            pairs.iter().for_each(|&(a, b)| r.swap(a, b));
            r
        };
        let half = ratio(1, 2);
        let both = DistributionSpec::IdenticalExplicit(vec![
            (base.clone(), half.clone()),
            (swap(&base, &[(0, 1), (2, 3)]), half.clone()),
        ]);
        let split = DistributionSpec::IdenticalExplicit(vec![
            (swap(&base, &[(0, 1)]), half.clone()),
            (swap(&base, &[(2, 3)]), half),
        ]);
        let cycles: Vec<(Vec<usize>, Rational)> =
            (0..4).map(|k| ((0..4).map(|t| base[(t + k) % 4]).collect(), ratio(1, 4))).collect();
        let order = SerialOrder::new(&problem, order).unwrap();
        let envy = |spec: &DistributionSpec| expected_envy_exact(&problem, &order, spec).unwrap().mean;
        prop_assert_eq!(
            marginals_of(&both, &problem).unwrap(),
            marginals_of(&split, &problem).unwrap()
        );
        prop_assert_eq!(envy(&both), envy(&split));
        prop_assert_eq!(envy(&DistributionSpec::IdenticalExplicit(cycles)), envy(&DistributionSpec::IdenticalUniform));
    }
}

#[test]
fn permutations_are_complete() {
    for n in 0..=5 {
        let all = permutations(n);
        let mut sorted = all.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted, all);
        assert_eq!(all.len(), (1..=n).product::<usize>());
    }
}
