//! Rank-aggregation baselines that turn the object priority rankings into a
//! single serial order.
//!
//! Ties favour the agent with the smaller index: it wins a top slot,
//! survives an elimination, sorts higher on equal scores, and Kemeny returns
//! the lexicographically smallest optimum. Plurality, instant-runoff and
//! Coombs first compare deeper positions before falling back to the index
//! (see `profiles`).

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::exact::ratio;
use crate::problem::{Problem, SerialOrder};
use crate::solver::{solve_subset_dp_with, SolverOptions};
use crate::weights::WeightMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AggregationMethod {
    Plurality,
    InstantRunoff,
    Coombs,
    Copeland,
    Borda,
    Kemeny,
}

impl AggregationMethod {
    pub const ALL: [AggregationMethod; 6] = [
        AggregationMethod::Plurality,
        AggregationMethod::InstantRunoff,
        AggregationMethod::Coombs,
        AggregationMethod::Copeland,
        AggregationMethod::Borda,
        AggregationMethod::Kemeny,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AggregationMethod::Plurality => "plurality",
            AggregationMethod::InstantRunoff => "instant-runoff",
            AggregationMethod::Coombs => "coombs",
            AggregationMethod::Copeland => "copeland",
            AggregationMethod::Borda => "borda",
            AggregationMethod::Kemeny => "kemeny",
        }
    }
}

impl fmt::Display for AggregationMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AggregationMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        AggregationMethod::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown aggregation method `{s}`")))
    }
}

/// Aggregates the priority rankings with `method`.
///
/// Only Kemeny can fail: it is solved exactly by the subset dynamic program
/// and refuses more than 20 agents.
pub fn aggregate(method: AggregationMethod, problem: &Problem) -> Result<SerialOrder> {
    let order = match method {
        AggregationMethod::Plurality => plurality(problem),
        AggregationMethod::InstantRunoff => instant_runoff(problem),
        AggregationMethod::Coombs => coombs(problem),
        AggregationMethod::Copeland => by_score(&copeland_scores(problem)),
        AggregationMethod::Borda => by_score(&borda_scores(problem)),
        AggregationMethod::Kemeny => return kemeny(problem),
    };
    Ok(SerialOrder::from_vec_unchecked(order))
}

/// `b(i)`: over all objects, the number of agents ranked below `i`.
pub fn borda_scores(problem: &Problem) -> Vec<usize> {
    let n = problem.n();
    let mut score = vec![0; n];
    for ranking in problem.priorities() {
        for (r, &i) in ranking.iter().enumerate() {
            score[i] += n - 1 - r;
        }
    }
    score
}

/// `c(i)`: the number of agents `j` that `i` beats at strictly more than
/// half of the objects.
pub fn copeland_scores(problem: &Problem) -> Vec<usize> {
    let (n, m) = (problem.n(), problem.m());
    (0..n)
        .map(|i| (0..n).filter(|&j| j != i && 2 * (0..m).filter(|&s| problem.outranks(s, i, j)).count() > m).count())
        .collect()
}

fn by_score(score: &[usize]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..score.len()).collect();
    order.sort_by(|&a, &b| score[b].cmp(&score[a]).then(a.cmp(&b)));
    order
}

/// Round-based rules compare remaining agents by their position profile:
/// how many objects rank them first among the remaining agents, then second,
/// and so on (counted from the bottom when `from_last`). Only when two
/// profiles are identical does the agent index decide. With a single
/// common ranking every profile is distinct, which keeps all three rules
/// unanimous.
fn profiles(problem: &Problem, alive: &[bool], from_last: bool) -> Vec<Vec<usize>> {
    let k = alive.iter().filter(|&&a| a).count();
    let mut counts = vec![vec![0; k]; problem.n()];
    for ranking in problem.priorities() {
        let remaining: Vec<usize> = ranking.iter().copied().filter(|&i| alive[i]).collect();
        for (d, &i) in remaining.iter().enumerate() {
            let depth = if from_last { k - 1 - d } else { d };
            counts[i][depth] += 1;
        }
    }
    counts
}

/// The remaining agent whose profile is greatest (`want_max`) or least;
/// equal profiles resolve to the smaller index when `prefer_early`.
fn extreme(profile: &[Vec<usize>], alive: &[bool], want_max: bool, prefer_early: bool) -> usize {
    let mut best: Option<usize> = None;
    for i in (0..profile.len()).filter(|&i| alive[i]) {
        best = match best {
            None => Some(i),
            Some(b) => {
                let ord = profile[i].cmp(&profile[b]);
                let ord = if want_max { ord } else { ord.reverse() };
                match ord {
                    std::cmp::Ordering::Greater => Some(i),
                    std::cmp::Ordering::Equal if !prefer_early => Some(i),
                    _ => Some(b),
                }
            }
        };
    }
    best.expect("an agent remains")
}

/// Repeatedly seats the agent ranked first most often.
fn plurality(problem: &Problem) -> Vec<usize> {
    let n = problem.n();
    let mut alive = vec![true; n];
    let mut order = Vec::with_capacity(n);
    for _ in 0..n {
        let top = extreme(&profiles(problem, &alive, false), &alive, true, true);
        alive[top] = false;
        order.push(top);
    }
    order
}

/// Repeatedly moves one agent to the lowest open slot.
fn eliminate(problem: &Problem, from_last: bool, want_max: bool) -> Vec<usize> {
    let n = problem.n();
    let mut alive = vec![true; n];
    let mut order = vec![0; n];
    for slot in (0..n).rev() {
        let out = extreme(&profiles(problem, &alive, from_last), &alive, want_max, false);
        alive[out] = false;
        order[slot] = out;
    }
    order
}

/// Eliminates the agent ranked first least often.
fn instant_runoff(problem: &Problem) -> Vec<usize> {
    eliminate(problem, false, false)
}

/// Eliminates the agent ranked last most often.
fn coombs(problem: &Problem) -> Vec<usize> {
    eliminate(problem, true, true)
}

fn kemeny(problem: &Problem) -> Result<SerialOrder> {
    let weights = WeightMatrix::constant(problem.n(), problem.m(), ratio(1, 1))?;
    let options = SolverOptions { dp_enumerate_cap: 0, ..SolverOptions::default() };
    Ok(solve_subset_dp_with(problem, &weights, &options)?.best_orders.swap_remove(0))
}
