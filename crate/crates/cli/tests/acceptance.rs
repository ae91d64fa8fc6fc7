//! Acceptance suite. Prints one PASS/FAIL line per criterion and fails at
//! the end if any criterion failed or ran over its time budget.

#![allow(clippy::needless_range_loop)]

use std::io::Write;
use std::panic::{self, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use envyorder::exact::ratio;
use envyorder::perm::permutations;
use envyorder::weights::{capacity_weights, independent_envy_probability, independent_weights};
use envyorder::{
    aggregate, count_justified_envy, kemeny_weights, match_probability_check, run_sd, solve_auto, solve_exact,
    solve_local_search, solve_subset_dp, trial_rng, weights_for, AggregationMethod, DistributionSpec,
    PreferenceProfile, Problem, Rational, Scheme, SerialOrder, SolverOptions, WeightClass, WeightMatrix,
};
use envyorder_cli::file::ProblemFile;
use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::Rng;

type Check = fn() -> Result<String, String>;

fn fixture(name: &str) -> Problem {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name);
    ProblemFile::load(&path).and_then(|f| f.to_model()).expect("fixture loads").0
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn shuffled<R: Rng>(rng: &mut R, n: usize) -> Vec<usize> {
    let mut v: Vec<usize> = (0..n).collect();
    v.shuffle(rng);
    v
}

fn random_priorities<R: Rng>(rng: &mut R, n: usize, m: usize) -> Vec<Vec<usize>> {
    (0..m).map(|_| shuffled(rng, n)).collect()
}

/// Justified envy of one SD run, counted directly.
fn envy_of(problem: &Problem, rankings: Vec<Vec<usize>>, order: &SerialOrder) -> usize {
    let profile = PreferenceProfile::new(problem, rankings).unwrap();
    let matching = run_sd(problem, &profile, order).unwrap();
    count_justified_envy(problem, &profile, &matching).count()
}

fn one_based(order: &SerialOrder) -> Vec<usize> {
    order.agents().iter().map(|a| a + 1).collect()
}

fn golden_vectors() -> Result<String, String> {
    let problem = fixture("five_agents.toml");
    let expected: [(AggregationMethod, [usize; 5]); 6] = [
        (AggregationMethod::Plurality, [2, 3, 1, 4, 5]),
        (AggregationMethod::InstantRunoff, [2, 1, 4, 5, 3]),
        (AggregationMethod::Coombs, [1, 3, 4, 2, 5]),
        (AggregationMethod::Copeland, [1, 2, 3, 4, 5]),
        (AggregationMethod::Borda, [1, 2, 4, 3, 5]),
        (AggregationMethod::Kemeny, [2, 1, 3, 4, 5]),
    ];
    for (method, want) in expected {
        let got = one_based(&aggregate(method, &problem).map_err(|e| e.to_string())?);
        ensure(got == want, || format!("{method}: got {got:?}, want {want:?}"))?;
    }
    Ok("6/6 orders match".into())
}

fn kemeny_equivalence() -> Result<String, String> {
    let n = 4;
    let rankings = permutations(n);
    let orders = permutations(n);
    let per_ranking = ratio(1, rankings.len() as i64);
    for trial in 0..100 {
        let mut rng = trial_rng(2, trial);
        let problem = Problem::unit(random_priorities(&mut rng, n, n)).unwrap();
        let values: Vec<Rational> = orders
            .iter()
            .map(|o| {
                let order = SerialOrder::checked(n, o.clone()).unwrap();
                let total: usize = rankings.iter().map(|r| envy_of(&problem, vec![r.clone(); n], &order)).sum();
                Rational::from_integer(total.into()) * &per_ranking
            })
            .collect();
        let best = values.iter().min().unwrap();
        let oracle: Vec<Vec<usize>> =
            orders.iter().zip(&values).filter(|(_, v)| *v == best).map(|(o, _)| o.clone()).collect();
        let weights = kemeny_weights(&problem).unwrap();
        let options = SolverOptions { argmin_cap: usize::MAX, ..SolverOptions::default() };
        let solved = solve_auto(&problem, &weights, &options, 0).unwrap();
        let solver: Vec<Vec<usize>> = solved.best_orders.iter().map(|o| o.agents().to_vec()).collect();
        ensure(solver == oracle, || format!("trial {trial}: argmin {solver:?} vs oracle {oracle:?}"))?;
        let value = solved.expected_envy(&weights);
        ensure(&value == best, || format!("trial {trial}: objective {value} vs oracle {best}"))?;
    }
    Ok("100 profiles at n = m = 4, argmin sets and values equal".into())
}

/// `p[t][u]`: probability that the agent at position `u` prefers the object
/// taken at position `t`, over all `(n!)^n` independent profiles.
fn independent_envy_table(n: usize) -> Vec<Vec<Rational>> {
    let perms = permutations(n);
    let mut counts = vec![vec![0u64; n]; n];
    let mut digits = vec![0usize; n];
    let mut taken = vec![0usize; n];
    loop {
        let mut free = vec![true; n];
        for t in 0..n {
            let pick = perms[digits[t]].iter().copied().find(|&s| free[s]).unwrap();
            free[pick] = false;
            taken[t] = pick;
        }
        for u in 0..n {
            let rank = &perms[digits[u]];
            let pos = |s: usize| rank.iter().position(|&x| x == s).unwrap();
            for t in 0..u {
                if pos(taken[t]) < pos(taken[u]) {
                    counts[t][u] += 1;
                }
            }
        }
        let mut k = 0;
        while k < n {
            digits[k] += 1;
            if digits[k] < perms.len() {
                break;
            }
            digits[k] = 0;
            k += 1;
        }
        if k == n {
            break;
        }
    }
    let total = (perms.len() as i64).pow(n as u32);
    counts.iter().map(|row| row.iter().map(|&c| ratio(c as i64, total)).collect()).collect()
}

fn independent_formula() -> Result<String, String> {
    let mut cells = 0;
    for n in [3usize, 4] {
        let table = independent_envy_table(n);
        let weights = independent_weights(n).unwrap();
        for t in 0..n {
            for u in t + 1..n {
                let formula = independent_envy_probability(n, t + 1, u + 1);
                ensure(formula == table[t][u], || {
                    format!("n={n} p({},{}): formula {formula} vs oracle {}", u + 1, t + 1, table[t][u])
                })?;
                for s in 0..n {
                    ensure(weights.get(s, t, u) == formula, || format!("n={n}: weight cell ({s},{t},{u})"))?;
                }
                cells += 1;
            }
        }
        ensure(table[0][1] == ratio(1, n as i64), || format!("n={n}: p(2,1) = {}", table[0][1]))?;
        ensure(table[n - 2][n - 1] == ratio(1, 2), || format!("n={n}: p(n,n-1) = {}", table[n - 2][n - 1]))?;
    }
    Ok(format!("{cells} cells exact, anchors 1/n and 1/2 hold"))
}

/// `w[s][t][u]` under identical uniform preferences and the identity order:
/// probability that position `t` takes `s` and position `u` prefers `s` to
/// its own object.
fn identical_joint(problem: &Problem) -> Vec<Vec<Vec<Rational>>> {
    let (n, m) = (problem.n(), problem.m());
    let rankings = permutations(m);
    let order = SerialOrder::identity(n);
    let mut counts = vec![vec![vec![0i64; n]; n]; m];
    for r in &rankings {
        let profile = PreferenceProfile::new(problem, vec![r.clone(); n]).unwrap();
        let matching = run_sd(problem, &profile, &order).unwrap();
        for t in 0..n {
            let s = matching.object_of(t);
            for u in t + 1..n {
                if profile.prefers(u, s, matching.object_of(u)) {
                    counts[s][t][u] += 1;
                }
            }
        }
    }
    let total = rankings.len() as i64;
    counts.iter().map(|a| a.iter().map(|b| b.iter().map(|&c| ratio(c, total)).collect()).collect()).collect()
}

fn capacity_formula() -> Result<String, String> {
    let mut problems = 0;
    for n in 1..=6usize {
        let problem = Problem::unit(vec![(0..n).collect(); n]).unwrap();
        let weights = capacity_weights(&problem).unwrap();
        for s in 0..n {
            for t in 0..n {
                for u in t + 1..n {
                    ensure(weights.get(s, t, u) == ratio(1, n as i64), || format!("unit n={n}: cell ({s},{t},{u})"))?;
                }
            }
        }
    }
    let mut shapes: Vec<Vec<u32>> = vec![vec![2, 2]];
    for a in 1..=4u32 {
        for b in 1..=4u32 {
            for c in 1..=4u32 {
                if a + b + c <= 6 && !(a == b && b == c) {
                    shapes.push(vec![a, b, c]);
                }
            }
        }
    }
    for caps in &shapes {
        let seats: u32 = caps.iter().sum();
        for n in 2..=seats as usize {
            let problem = Problem::indexed(caps, vec![(0..n).collect(); caps.len()]).unwrap();
            let weights = capacity_weights(&problem).unwrap();
            let oracle = identical_joint(&problem);
            for (s, table) in oracle.iter().enumerate() {
                for t in 0..n {
                    for u in t + 1..n {
                        let got = weights.get(s, t, u);
                        ensure(got == table[t][u], || {
                            format!("q={caps:?} n={n}: cell ({s},{t},{u}) {got} vs oracle {}", table[t][u])
                        })?;
                    }
                }
                if caps.iter().all(|&q| q >= 2) {
                    ensure(weights.get(s, 0, 1).is_zero(), || format!("q={caps:?} n={n}: (s,1,2) cell is nonzero"))?;
                }
            }
            problems += 1;
        }
    }
    Ok(format!("unit cases 1/n; {problems} capacitated problems equal the oracle"))
}

fn match_probabilities() -> Result<String, String> {
    let samples = 100_000;
    let independent = Problem::unit(vec![(0..5).collect(); 5]).unwrap();
    let freq = match_probability_check(
        &independent,
        &SerialOrder::identity(5),
        &DistributionSpec::IndependentUniform,
        samples,
        5,
    )
    .unwrap();
    let z1 = freq.max_z(|_, _| 0.2);
    ensure(z1 <= 3.0, || format!("n=m=5 independent: max z {z1:.3}"))?;
    let seats = Problem::indexed(&[2, 2, 2], vec![(0..6).collect(); 3]).unwrap();
    let freq =
        match_probability_check(&seats, &SerialOrder::identity(6), &DistributionSpec::IdenticalUniform, samples, 6)
            .unwrap();
    let z2 = freq.max_z(|_, _| 1.0 / 3.0);
    ensure(z2 <= 3.0, || format!("q=2, n=6 identical: max z {z2:.3}"))?;
    Ok(format!("max z {z1:.2} and {z2:.2} with {samples} samples each"))
}

fn zero_envy() -> Result<String, String> {
    for trial in 0..100 {
        let mut rng = trial_rng(6, trial);
        let n = rng.random_range(2..=7);
        let problem = Problem::unit(random_priorities(&mut rng, n, n)).unwrap();
        let ranking = shuffled(&mut rng, n);
        let spec = DistributionSpec::IdenticalExplicit(vec![(ranking.clone(), Rational::from_integer(1.into()))]);
        let weights = weights_for(&problem, &spec, Scheme::Marginal).unwrap();
        let solved = solve_auto(&problem, &weights, &SolverOptions::default(), 0).unwrap();
        ensure(solved.objective.is_zero(), || format!("trial {trial}: objective {}", solved.objective))?;
        for order in &solved.best_orders {
            let envy = envy_of(&problem, vec![ranking.clone(); n], order);
            ensure(envy == 0, || format!("trial {trial}: order {:?} leaves {envy} envy", order.agents()))?;
        }
    }
    Ok("100 problems, every optimal order envy-free".into())
}

fn random_weights<R: Rng>(rng: &mut R, n: usize, m: usize, constant: bool) -> WeightMatrix {
    let mut cell = || ratio(rng.random_range(0..=20), rng.random_range(1..=6));
    if constant {
        return WeightMatrix::constant(n, m, cell()).unwrap();
    }
    let table: Vec<Vec<Rational>> = (0..m).map(|_| (0..n).map(|_| cell()).collect()).collect();
    WeightMatrix::from_fn(n, m, WeightClass::EarlierPosition, |s, t, _| table[s][t].clone()).unwrap()
}

fn solver_agreement() -> Result<String, String> {
    let instances = 120;
    for trial in 0..instances {
        let mut rng = trial_rng(7, trial);
        let n = rng.random_range(2..=8);
        let m = rng.random_range(1..=4);
        let problem = Problem::indexed(&vec![n as u32; m], random_priorities(&mut rng, n, m)).unwrap();
        let weights = random_weights(&mut rng, n, m, trial % 2 == 0);
        let dp = solve_subset_dp(&problem, &weights).unwrap();
        let bb = solve_exact(&problem, &weights).unwrap();
        ensure(dp.objective == bb.objective, || format!("trial {trial}: dp {} vs bnb {}", dp.objective, bb.objective))?;
        ensure(dp.best() == bb.best(), || format!("trial {trial}: smallest optimal orders differ"))?;
    }
    for name in ["dominance.toml", "five_agents.toml"] {
        let problem = fixture(name);
        let weights = kemeny_weights(&problem).unwrap();
        let exact = solve_exact(&problem, &weights).unwrap();
        let local = solve_local_search(&problem, &weights, 0, 8).unwrap();
        ensure(local.objective == exact.objective, || {
            format!("{name}: local {} vs exact {}", local.objective, exact.objective)
        })?;
    }
    Ok(format!("{instances} instances agree; local search optimal on both examples"))
}

fn verify_output(threads: usize) -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_envyorder"))
        .args(["verify", "--seed", "11", "--trials", "25", "--threads", &threads.to_string()])
        .output()
        .expect("binary runs");
    assert_eq!(out.status.code(), Some(0), "verify failed: {}", String::from_utf8_lossy(&out.stderr));
    out.stdout
}

fn determinism() -> Result<String, String> {
    let first = verify_output(1);
    let second = verify_output(1);
    let wide = verify_output(4);
    ensure(first == second, || "two runs with one worker differ".into())?;
    ensure(first == wide, || "one worker and four workers differ".into())?;
    Ok(format!("{} report bytes identical over 3 runs", first.len()))
}

/// Writes past the test harness capture.
fn report(line: String) {
    let _ = writeln!(std::io::stderr(), "{line}");
}

#[test]
fn acceptance() {
    let criteria: [(&str, Check, Option<Duration>); 8] = [
        ("golden aggregation vectors", golden_vectors, Some(Duration::from_secs(1))),
        ("constant weights match the envy oracle", kemeny_equivalence, Some(Duration::from_secs(60))),
        ("independent envy probabilities", independent_formula, Some(Duration::from_secs(120))),
        ("capacity weights", capacity_formula, Some(Duration::from_secs(10))),
        ("match probabilities", match_probabilities, Some(Duration::from_secs(30))),
        ("zero envy for a known ranking", zero_envy, Some(Duration::from_secs(10))),
        ("solver cross-validation", solver_agreement, None),
        ("verify determinism", determinism, None),
    ];
    let mut failed = Vec::new();
    for (i, (name, check, budget)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            Err(e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default())
        });
        let elapsed = start.elapsed();
        let outcome = match (outcome, budget) {
            (Ok(_), Some(limit)) if elapsed > limit => Err(format!("over budget of {limit:?}")),
            (other, _) => other,
        };
        match outcome {
            Ok(detail) => report(format!("criterion {}: PASS  {name} ({detail}; {elapsed:.2?})", i + 1)),
            Err(detail) => {
                report(format!("criterion {}: FAIL  {name} ({detail}; {elapsed:.2?})", i + 1));
                failed.push(i + 1);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
