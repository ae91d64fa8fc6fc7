//! Serial dictatorship, justified-envy accounting, and priority dominance.

use crate::error::{Error, Result};
use crate::problem::{Matching, PreferenceProfile, Problem, SerialOrder};

/// One case of justified envy: `envier` prefers `object = μ(envied)` to its
/// own match and has higher priority at `object` than `envied`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EnvyTriplet {
    pub envier: usize,
    pub envied: usize,
    pub object: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnvyReport {
    pub triplets: Vec<EnvyTriplet>,
}

impl EnvyReport {
    /// N(μ).
    pub fn count(&self) -> usize {
        self.triplets.len()
    }
}

/// Runs serial dictatorship: the agent at each position takes its favourite
/// object among those with seats left.
pub fn run_sd(problem: &Problem, profile: &PreferenceProfile, order: &SerialOrder) -> Result<Matching> {
    if profile.n() != problem.n() || order.len() != problem.n() {
        return Err(Error::DimensionMismatch(format!(
            "problem has {} agents, profile {}, order {}",
            problem.n(),
            profile.n(),
            order.len()
        )));
    }
    let mut load = vec![0u32; problem.m()];
    let mut assignment = vec![usize::MAX; problem.n()];
    for (t, &agent) in order.agents().iter().enumerate() {
        let pick = profile
            .ranking(agent)
            .iter()
            .copied()
            .find(|&s| load[s] < problem.capacity(s))
            .ok_or(Error::Unmatchable { position: t + 1 })?;
        load[pick] += 1;
        assignment[agent] = pick;
    }
    Ok(Matching::from_vec_unchecked(assignment))
}

/// Lists every justified-envy triplet of `matching`.
///
/// Agents sharing an object never envy each other.
pub fn count_justified_envy(problem: &Problem, profile: &PreferenceProfile, matching: &Matching) -> EnvyReport {
    let ranks = profile.rank_tables();
    let n = problem.n();
    let mut triplets = Vec::new();
    for (i, rank) in ranks.iter().enumerate() {
        let own = matching.object_of(i);
        for j in 0..n {
            let s = matching.object_of(j);
            if i == j || s == own {
                continue;
            }
            if rank[s] < rank[own] && problem.outranks(s, i, j) {
                triplets.push(EnvyTriplet { envier: i, envied: j, object: s });
            }
        }
    }
    EnvyReport { triplets }
}

/// Agents in `remaining_agents` that no other remaining agent dominates,
/// where `j` dominates `i` when every remaining object ranks `j` above `i`.
pub fn non_dominated_agents(problem: &Problem, remaining_agents: &[usize], remaining_objects: &[usize]) -> Vec<usize> {
    let mut out: Vec<usize> = remaining_agents
        .iter()
        .copied()
        .filter(|&i| {
            !remaining_agents.iter().any(|&j| j != i && remaining_objects.iter().all(|&s| problem.outranks(s, j, i)))
        })
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// Reusable buffers for the allocation-free serial dictatorship kernel used
/// by the enumeration oracles and Monte Carlo loops.
#[derive(Debug, Clone)]
pub(crate) struct SdScratch {
    load: Vec<u32>,
    /// Object taken at each position.
    pub(crate) taken: Vec<usize>,
    /// Index into the picking agent's ranking where it stopped.
    stop: Vec<usize>,
}

impl SdScratch {
    pub(crate) fn new(problem: &Problem) -> Self {
        SdScratch { load: vec![0; problem.m()], taken: vec![0; problem.n()], stop: vec![0; problem.n()] }
    }

    /// Runs SD. `ranking_of(agent)` returns that agent's ranking.
    pub(crate) fn run<'r, F>(&mut self, problem: &Problem, order: &[usize], ranking_of: F)
    where
        F: Fn(usize) -> &'r [usize],
    {
        self.load.iter_mut().for_each(|l| *l = 0);
        let caps = problem.capacities();
        for (t, &agent) in order.iter().enumerate() {
            let ranking = ranking_of(agent);
            // Σq ≥ n is enforced at load time, so someone always has a seat.
            let k = ranking.iter().position(|&s| self.load[s] < caps[s]).expect("total capacity covers every agent");
            let s = ranking[k];
            self.load[s] += 1;
            self.taken[t] = s;
            self.stop[t] = k;
        }
    }

    /// Whether the agent at `later` strictly prefers `taken[earlier]` to its
    /// own pick. Only meaningful after [`SdScratch::run`].
    #[inline]
    pub(crate) fn envies(&self, ranking: &[usize], earlier: usize, later: usize) -> bool {
        let target = self.taken[earlier];
        target != self.taken[later] && ranking[..self.stop[later]].contains(&target)
    }

    /// Justified-envy count of the last run. Earlier dictators never envy
    /// later ones, so only `t < t'` pairs are inspected.
    pub(crate) fn justified_envy<'r, F>(&self, problem: &Problem, order: &[usize], ranking_of: F) -> u32
    where
        F: Fn(usize) -> &'r [usize],
    {
        let ranks = problem.priority_ranks();
        let mut count = 0;
        for later in 1..order.len() {
            let envier = order[later];
            let ranking = ranking_of(envier);
            for earlier in 0..later {
                let s = self.taken[earlier];
                let rank = &ranks[s];
                if rank[envier] < rank[order[earlier]] && self.envies(ranking, earlier, later) {
                    count += 1;
                }
            }
        }
        count
    }
}
