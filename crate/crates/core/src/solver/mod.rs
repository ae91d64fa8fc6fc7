//! Minimizing the weighted pairwise-disagreement objective over serial
//! orders.
//!
//! The objective of an order ρ is
//! `Σ_s Σ_{t<t'} w(s, t, t') · [ρ(t') ≻_s ρ(t)]`: every time a later agent
//! outranks an earlier one at some object, the weight of that cell is paid.
//!
//! Three solvers are provided:
//!
//! * [`solve_exact`]: depth-first branch-and-bound over prefixes, any
//!   weight class, returns the full argmin set.
//! * [`solve_subset_dp`]: dynamic program over placed subsets, exact only
//!   when the weight of a cell does not depend on the later position.
//! * [`solve_local_search`]: insertion-move hill climbing for large `n`.

mod bnb;
mod dp;
mod kernel;
mod local;

use std::fmt;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::exact::Rational;
use crate::problem::{Problem, SerialOrder};
use crate::weights::WeightMatrix;

pub use bnb::{solve_exact, solve_exact_with};
pub use dp::{solve_subset_dp, solve_subset_dp_with};
pub use local::solve_local_search;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolverKind {
    BranchAndBound,
    SubsetDp,
    LocalSearch,
}

impl SolverKind {
    pub fn name(self) -> &'static str {
        match self {
            SolverKind::BranchAndBound => "exact",
            SolverKind::SubsetDp => "dp",
            SolverKind::LocalSearch => "local",
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Caps and switches shared by the solvers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolverOptions {
    /// Largest `n` for branch-and-bound.
    pub exact_cap: usize,
    /// Largest `n` for the subset dynamic program.
    pub dp_cap: usize,
    /// Largest `n` for which the dynamic program enumerates every optimum.
    pub dp_enumerate_cap: usize,
    /// Argmin sets larger than this are truncated to their smallest member.
    pub argmin_cap: usize,
    /// Split branch-and-bound over the first position across rayon workers.
    pub parallel: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { exact_cap: 12, dp_cap: 20, dp_enumerate_cap: 12, argmin_cap: 1000, parallel: true }
    }
}

/// Outcome of a solver run.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    /// Optimal orders in lexicographic order (by agent index), or just the
    /// smallest one when the argmin set was truncated. Local search returns
    /// its single best order.
    pub best_orders: Vec<SerialOrder>,
    /// Objective of the orders, recomputed exactly.
    pub objective: Rational,
    pub solver: SolverKind,
    pub nodes_explored: u64,
    /// Size of the argmin set when the solver counts it.
    pub optimum_count: Option<u64>,
    pub truncated: bool,
}

impl SolveResult {
    pub fn best(&self) -> &SerialOrder {
        &self.best_orders[0]
    }

    /// Objective multiplied into expected justified-envy units.
    pub fn expected_envy(&self, weights: &WeightMatrix) -> Rational {
        &self.objective * weights.envy_factor()
    }
}

fn check_dimensions(problem: &Problem, weights: &WeightMatrix) -> Result<()> {
    if weights.n() != problem.n() || weights.m() != problem.m() {
        return Err(Error::DimensionMismatch(format!(
            "weights are sized for n = {}, m = {}; problem has n = {}, m = {}",
            weights.n(),
            weights.m(),
            problem.n(),
            problem.m()
        )));
    }
    Ok(())
}

/// `Σ_s Σ_{t<t'} w(s, t, t') · [ρ(t') ≻_s ρ(t)]`, in exact arithmetic.
pub fn evaluate_objective(problem: &Problem, weights: &WeightMatrix, order: &SerialOrder) -> Result<Rational> {
    check_dimensions(problem, weights)?;
    if order.len() != problem.n() {
        return Err(Error::DimensionMismatch(format!("order has {} agents, problem has {}", order.len(), problem.n())));
    }
    let rho = order.agents();
    let mut total = Rational::zero();
    for s in 0..problem.m() {
        for t in 0..rho.len() {
            for u in t + 1..rho.len() {
                if problem.outranks(s, rho[u], rho[t]) {
                    total += weights.get(s, t, u);
                }
            }
        }
    }
    Ok(total)
}

/// Order built by repeatedly seating the highest-priority remaining agent of
/// the most preferred object that still has a seat, for a common ranking
/// known in advance. Serial dictatorship under that ranking then produces no
/// justified envy.
pub fn known_ranking_order(problem: &Problem, ranking: &[usize]) -> Result<SerialOrder> {
    if crate::problem::inverse_permutation(ranking, problem.m()).is_none() {
        return Err(Error::invalid("known ranking must be a permutation of the objects"));
    }
    let mut placed = vec![false; problem.n()];
    let mut load = vec![0u32; problem.m()];
    let mut order = Vec::with_capacity(problem.n());
    for _ in 0..problem.n() {
        let s = *ranking
            .iter()
            .find(|&&s| load[s] < problem.capacity(s))
            .ok_or(Error::Unmatchable { position: order.len() + 1 })?;
        let agent = *problem.priority(s).iter().find(|&&i| !placed[i]).expect("an agent remains");
        placed[agent] = true;
        load[s] += 1;
        order.push(agent);
    }
    Ok(SerialOrder::from_vec_unchecked(order))
}

/// Picks the solver for a weight matrix: the subset dynamic program when
/// the class allows it, branch-and-bound up to its cap, local search beyond.
pub fn solve_auto(
    problem: &Problem,
    weights: &WeightMatrix,
    options: &SolverOptions,
    seed: u64,
) -> Result<SolveResult> {
    let n = problem.n();
    if weights.class().is_decomposable() && n <= options.dp_cap {
        solve_subset_dp_with(problem, weights, options)
    } else if n <= options.exact_cap {
        solve_exact_with(problem, weights, options)
    } else {
        solve_local_search(problem, weights, seed, 8)
    }
}
