//! Problem data: agents, objects with quotas, and strict priorities.
//!
//! Agents and objects are dense indices (`0..n`, `0..m`). Names only live at
//! the boundary, for parsing and reporting.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};

/// A priority-based matching problem: agents, objects with capacities, and
/// one strict priority order over all agents per object.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Problem {
    agents: Vec<String>,
    objects: Vec<String>,
    capacities: Vec<u32>,
    /// `priorities[s]` lists agents from highest to lowest priority.
    priorities: Vec<Vec<usize>>,
    /// `priority_rank[s][i]` is agent `i`'s 0-based rank at object `s`.
    priority_rank: Vec<Vec<usize>>,
}

impl Problem {
    pub fn new(
        agents: Vec<String>,
        objects: Vec<String>,
        capacities: Vec<u32>,
        priorities: Vec<Vec<usize>>,
    ) -> Result<Self> {
        let n = agents.len();
        let m = objects.len();
        if n == 0 {
            return Err(Error::invalid("a problem needs at least one agent"));
        }
        if m == 0 {
            return Err(Error::invalid("a problem needs at least one object"));
        }
        ensure_unique("agent", &agents)?;
        ensure_unique("object", &objects)?;
        if capacities.len() != m {
            return Err(Error::invalid(format!("expected {m} capacities, got {}", capacities.len())));
        }
        if let Some(s) = capacities.iter().position(|&q| q == 0) {
            return Err(Error::invalid(format!("object {} has capacity 0; quotas must be at least 1", objects[s])));
        }
        if priorities.len() != m {
            return Err(Error::invalid(format!("expected {m} priority orders, got {}", priorities.len())));
        }
        let mut priority_rank = Vec::with_capacity(m);
        for (s, order) in priorities.iter().enumerate() {
            let rank = inverse_permutation(order, n).ok_or_else(|| {
                Error::invalid(format!(
                    "priority order of object {} is not a permutation of the {n} agents",
                    objects[s]
                ))
            })?;
            priority_rank.push(rank);
        }
        let capacity: u64 = capacities.iter().map(|&q| u64::from(q)).sum();
        if capacity < n as u64 {
            return Err(Error::InfeasibleCapacity { capacity, agents: n });
        }
        Ok(Problem { agents, objects, capacities, priorities, priority_rank })
    }

    /// Builds a problem from agent and object names; priorities are listed by
    /// agent name, highest priority first, in object order.
    pub fn from_names<A, O, P>(agents: &[A], objects: &[(O, u32)], priorities: &[Vec<P>]) -> Result<Self>
    where
        A: AsRef<str>,
        O: AsRef<str>,
        P: AsRef<str>,
    {
        let agents: Vec<String> = agents.iter().map(|a| a.as_ref().to_string()).collect();
        let index: HashMap<&str, usize> = agents.iter().enumerate().map(|(i, a)| (a.as_str(), i)).collect();
        let mut orders = Vec::with_capacity(priorities.len());
        for order in priorities {
            let order = order
                .iter()
                .map(|name| {
                    index
                        .get(name.as_ref())
                        .copied()
                        .ok_or_else(|| Error::invalid(format!("unknown agent {}", name.as_ref())))
                })
                .collect::<Result<Vec<_>>>()?;
            orders.push(order);
        }
        let names = objects.iter().map(|(o, _)| o.as_ref().to_string()).collect();
        let caps = objects.iter().map(|&(_, q)| q).collect();
        Problem::new(agents, names, caps, orders)
    }

    /// Builds a problem with default names: agents `"1"..="n"`, objects
    /// `"a", "b", ...` (or `"s1", "s2", ...` beyond 26 objects).
    pub fn indexed(capacities: &[u32], priorities: Vec<Vec<usize>>) -> Result<Self> {
        let n = priorities.first().map_or(0, Vec::len);
        let m = capacities.len();
        Problem::new(default_agent_names(n), default_object_names(m), capacities.to_vec(), priorities)
    }

    /// Unit-capacity problem with one object per priority order.
    pub fn unit(priorities: Vec<Vec<usize>>) -> Result<Self> {
        let m = priorities.len();
        Problem::indexed(&vec![1; m], priorities)
    }

    pub fn n(&self) -> usize {
        self.agents.len()
    }

    pub fn m(&self) -> usize {
        self.objects.len()
    }

    pub fn agents(&self) -> &[String] {
        &self.agents
    }

    pub fn objects(&self) -> &[String] {
        &self.objects
    }

    pub fn agent_name(&self, i: usize) -> &str {
        &self.agents[i]
    }

    pub fn object_name(&self, s: usize) -> &str {
        &self.objects[s]
    }

    pub fn agent_index(&self, name: &str) -> Option<usize> {
        self.agents.iter().position(|a| a == name)
    }

    pub fn object_index(&self, name: &str) -> Option<usize> {
        self.objects.iter().position(|o| o == name)
    }

    pub fn capacities(&self) -> &[u32] {
        &self.capacities
    }

    pub fn capacity(&self, s: usize) -> u32 {
        self.capacities[s]
    }

    pub fn total_capacity(&self) -> u64 {
        self.capacities.iter().map(|&q| u64::from(q)).sum()
    }

    /// Unit capacities with as many objects as agents.
    pub fn is_unit(&self) -> bool {
        self.m() == self.n() && self.capacities.iter().all(|&q| q == 1)
    }

    /// Agents at object `s`, highest priority first.
    pub fn priority(&self, s: usize) -> &[usize] {
        &self.priorities[s]
    }

    pub fn priorities(&self) -> &[Vec<usize>] {
        &self.priorities
    }

    /// 0-based rank of agent `i` in object `s`'s priority order.
    pub fn priority_rank(&self, s: usize, i: usize) -> usize {
        self.priority_rank[s][i]
    }

    /// `i ≻_s j`: object `s` gives agent `i` higher priority than agent `j`.
    #[inline]
    pub fn outranks(&self, s: usize, i: usize, j: usize) -> bool {
        self.priority_rank[s][i] < self.priority_rank[s][j]
    }

    pub(crate) fn priority_ranks(&self) -> &[Vec<usize>] {
        &self.priority_rank
    }

    /// True when every object shares one priority order.
    pub fn common_priority(&self) -> Option<&[usize]> {
        let first = &self.priorities[0];
        self.priorities.iter().all(|p| p == first).then_some(first.as_slice())
    }
}

/// One strict ranking of all objects per agent.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PreferenceProfile {
    rankings: Vec<Vec<usize>>,
}

impl PreferenceProfile {
    pub fn new(problem: &Problem, rankings: Vec<Vec<usize>>) -> Result<Self> {
        if rankings.len() != problem.n() {
            return Err(Error::invalid(format!("profile has {} rankings for {} agents", rankings.len(), problem.n())));
        }
        for (i, r) in rankings.iter().enumerate() {
            if inverse_permutation(r, problem.m()).is_none() {
                return Err(Error::invalid(format!(
                    "ranking of agent {} is not a permutation of the {} objects",
                    problem.agent_name(i),
                    problem.m()
                )));
            }
        }
        Ok(PreferenceProfile { rankings })
    }

    /// Every agent reports the same ranking.
    pub fn identical(problem: &Problem, ranking: Vec<usize>) -> Result<Self> {
        PreferenceProfile::new(problem, vec![ranking; problem.n()])
    }

    pub(crate) fn from_rankings_unchecked(rankings: Vec<Vec<usize>>) -> Self {
        PreferenceProfile { rankings }
    }

    /// Agent `i`'s ranking, most preferred first.
    pub fn ranking(&self, i: usize) -> &[usize] {
        &self.rankings[i]
    }

    pub fn rankings(&self) -> &[Vec<usize>] {
        &self.rankings
    }

    pub fn n(&self) -> usize {
        self.rankings.len()
    }

    /// `a P_i b`.
    pub fn prefers(&self, i: usize, a: usize, b: usize) -> bool {
        for &s in &self.rankings[i] {
            if s == a {
                return a != b;
            }
            if s == b {
                return false;
            }
        }
        false
    }

    /// Per-agent rank tables: `result[i][s]` is the 0-based position of `s`
    /// in agent `i`'s ranking.
    pub fn rank_tables(&self) -> Vec<Vec<usize>> {
        self.rankings
            .iter()
            .map(|r| {
                let mut rank = vec![0; r.len()];
                for (k, &s) in r.iter().enumerate() {
                    rank[s] = k;
                }
                rank
            })
            .collect()
    }
}

/// A serial order ρ: `order[t]` is the agent at (0-based) position `t`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SerialOrder(Vec<usize>);

impl SerialOrder {
    pub fn new(problem: &Problem, order: Vec<usize>) -> Result<Self> {
        SerialOrder::checked(problem.n(), order)
    }

    pub fn checked(n: usize, order: Vec<usize>) -> Result<Self> {
        if inverse_permutation(&order, n).is_none() {
            return Err(Error::invalid(format!("serial order {order:?} is not a permutation of the {n} agents")));
        }
        Ok(SerialOrder(order))
    }

    /// Resolves agent names into a serial order, naming the first missing or
    /// unknown agent on failure.
    pub fn from_names<S: AsRef<str>>(problem: &Problem, names: &[S]) -> Result<Self> {
        let mut order = Vec::with_capacity(names.len());
        let mut seen = vec![false; problem.n()];
        for name in names {
            let name = name.as_ref();
            let i = problem
                .agent_index(name)
                .ok_or_else(|| Error::invalid(format!("serial order names unknown agent {name}")))?;
            if std::mem::replace(&mut seen[i], true) {
                return Err(Error::invalid(format!("serial order lists agent {name} twice")));
            }
            order.push(i);
        }
        if let Some(i) = seen.iter().position(|&x| !x) {
            return Err(Error::invalid(format!("serial order is missing agent {}", problem.agent_name(i))));
        }
        Ok(SerialOrder(order))
    }

    pub(crate) fn from_vec_unchecked(order: Vec<usize>) -> Self {
        SerialOrder(order)
    }

    pub fn identity(n: usize) -> Self {
        SerialOrder((0..n).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn agents(&self) -> &[usize] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<usize> {
        self.0
    }

    /// `position[i]` is the 0-based position of agent `i`.
    pub fn positions(&self) -> Vec<usize> {
        let mut pos = vec![0; self.0.len()];
        for (t, &i) in self.0.iter().enumerate() {
            pos[i] = t;
        }
        pos
    }

    pub fn names<'a>(&self, problem: &'a Problem) -> Vec<&'a str> {
        self.0.iter().map(|&i| problem.agent_name(i)).collect()
    }
}

impl fmt::Display for SerialOrder {
    /// 1-based agent indices, comma separated.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, i) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}", i + 1)?;
        }
        Ok(())
    }
}

/// Agent to object assignment.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Matching {
    assignment: Vec<usize>,
}

impl Matching {
    pub fn new(problem: &Problem, assignment: Vec<usize>) -> Result<Self> {
        if assignment.len() != problem.n() {
            return Err(Error::invalid(format!(
                "matching assigns {} agents, problem has {}",
                assignment.len(),
                problem.n()
            )));
        }
        let mut load = vec![0u32; problem.m()];
        for &s in &assignment {
            if s >= problem.m() {
                return Err(Error::invalid(format!("matching uses unknown object index {s}")));
            }
            load[s] += 1;
        }
        if let Some(s) = (0..problem.m()).find(|&s| load[s] > problem.capacity(s)) {
            return Err(Error::invalid(format!(
                "object {} is over capacity ({} > {})",
                problem.object_name(s),
                load[s],
                problem.capacity(s)
            )));
        }
        Ok(Matching { assignment })
    }

    pub(crate) fn from_vec_unchecked(assignment: Vec<usize>) -> Self {
        Matching { assignment }
    }

    /// Object assigned to agent `i`.
    pub fn object_of(&self, i: usize) -> usize {
        self.assignment[i]
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }
}

fn ensure_unique(kind: &str, names: &[String]) -> Result<()> {
    let mut seen = HashMap::with_capacity(names.len());
    for name in names {
        if seen.insert(name.as_str(), ()).is_some() {
            return Err(Error::invalid(format!("duplicate {kind} name {name}")));
        }
    }
    Ok(())
}

/// Inverse of `perm` if it is a permutation of `0..len`.
pub(crate) fn inverse_permutation(perm: &[usize], len: usize) -> Option<Vec<usize>> {
    if perm.len() != len {
        return None;
    }
    let mut inv = vec![usize::MAX; len];
    for (k, &x) in perm.iter().enumerate() {
        if x >= len || inv[x] != usize::MAX {
            return None;
        }
        inv[x] = k;
    }
    Some(inv)
}

pub fn default_agent_names(n: usize) -> Vec<String> {
    (1..=n).map(|i| i.to_string()).collect()
}

pub fn default_object_names(m: usize) -> Vec<String> {
    if m <= 26 {
        (0..m).map(|s| char::from(b'a' + s as u8).to_string()).collect()
    } else {
        (1..=m).map(|s| format!("s{s}")).collect()
    }
}
