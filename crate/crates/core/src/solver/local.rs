//! Insertion-move hill climbing.
//!
//! Each pass lifts every agent out of the order and slides it through all
//! other positions by adjacent swaps, tracking the running change in the
//! objective; the best strictly improving position is kept. Passes repeat
//! until nothing improves. Starts are the Borda order followed by seeded
//! random permutations.

use rand::seq::SliceRandom;

use super::kernel::{AnyKernel, Cost, Kernel};
use super::{check_dimensions, evaluate_objective, SolveResult, SolverKind};
use crate::distributions::trial_rng;
use crate::error::Result;
use crate::problem::{Problem, SerialOrder};
use crate::weights::WeightMatrix;

/// Runs local search from the Borda order plus `restarts` random starts.
/// The result is a local optimum, not a certified one.
pub fn solve_local_search(
    problem: &Problem,
    weights: &WeightMatrix,
    seed: u64,
    restarts: usize,
) -> Result<SolveResult> {
    check_dimensions(problem, weights)?;
    let found = match AnyKernel::build(problem, weights) {
        AnyKernel::Exact(k) => improve(&k, seed, restarts).erase(),
        AnyKernel::Float(k) => improve(&k, seed, restarts).erase(),
    };
    let order = SerialOrder::from_vec_unchecked(found.order);
    let objective = evaluate_objective(problem, weights, &order)?;
    Ok(SolveResult {
        best_orders: vec![order],
        objective,
        solver: SolverKind::LocalSearch,
        nodes_explored: found.evaluations,
        optimum_count: None,
        truncated: false,
    })
}

pub(crate) struct Found<C> {
    pub(crate) order: Vec<usize>,
    pub(crate) cost: C,
    pub(crate) evaluations: u64,
}

impl<C> Found<C> {
    fn erase(self) -> Found<()> {
        Found { order: self.order, cost: (), evaluations: self.evaluations }
    }
}

pub(crate) fn improve<C: Cost>(kernel: &Kernel<C>, seed: u64, restarts: usize) -> Found<C> {
    let n = kernel.n;
    let mut starts = vec![borda(kernel)];
    for r in 0..restarts {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut trial_rng(seed, r as u64));
        starts.push(order);
    }
    let mut evaluations = 0;
    let mut best: Option<(Vec<usize>, C)> = None;
    for start in starts {
        let (order, cost) = climb(kernel, start, &mut evaluations);
        best = match best {
            None => Some((order, cost)),
            Some((b, bc)) => {
                if cost.better(bc) || (cost.tied(bc) && order < b) {
                    Some((order, cost))
                } else {
                    Some((b, bc))
                }
            }
        };
    }
    let (order, cost) = best.expect("at least one start");
    Found { order, cost, evaluations }
}

/// Agents sorted by how many (object, agent) pairs they outrank, ties by index.
fn borda<C: Cost>(kernel: &Kernel<C>) -> Vec<usize> {
    let n = kernel.n;
    let score: Vec<usize> =
        (0..n).map(|i| (0..kernel.m).map(|s| (0..n).filter(|&j| kernel.beats(s, i, j)).count()).sum()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| score[b].cmp(&score[a]).then(a.cmp(&b)));
    order
}

/// Cost of the pair sitting at positions `x` and `y` (either order).
#[inline]
fn cell<C: Cost>(kernel: &Kernel<C>, order: &[usize], x: usize, y: usize) -> C {
    if x < y {
        kernel.pair_cost(x, y, order[x], order[y])
    } else {
        kernel.pair_cost(y, x, order[y], order[x])
    }
}

/// Change in objective from swapping positions `t` and `t + 1`.
fn swap_delta<C: Cost>(kernel: &Kernel<C>, order: &mut [usize], t: usize) -> C {
    let mut before = C::zero();
    for v in 0..order.len() {
        if v != t && v != t + 1 {
            before = before + cell(kernel, order, v, t) + cell(kernel, order, v, t + 1);
        }
    }
    before = before + cell(kernel, order, t, t + 1);
    order.swap(t, t + 1);
    let mut after = C::zero();
    for v in 0..order.len() {
        if v != t && v != t + 1 {
            after = after + cell(kernel, order, v, t) + cell(kernel, order, v, t + 1);
        }
    }
    after = after + cell(kernel, order, t, t + 1);
    after - before
}

fn climb<C: Cost>(kernel: &Kernel<C>, mut order: Vec<usize>, evaluations: &mut u64) -> (Vec<usize>, C) {
    let n = order.len();
    let mut cost = kernel.objective(&order);
    let mut improved = true;
    while improved {
        improved = false;
        for agent in 0..n {
            let from = order.iter().position(|&a| a == agent).expect("agent is placed");
            let mut best_delta = C::zero();
            let mut best_to = from;

            let mut work = order.clone();
            let mut delta = C::zero();
            for t in (0..from).rev() {
                delta = delta + swap_delta(kernel, &mut work, t);
                *evaluations += 1;
                if delta.better(best_delta) {
                    best_delta = delta;
                    best_to = t;
                }
            }
            let mut work = order.clone();
            let mut delta = C::zero();
            for t in from..n.saturating_sub(1) {
                delta = delta + swap_delta(kernel, &mut work, t);
                *evaluations += 1;
                if delta.better(best_delta) {
                    best_delta = delta;
                    best_to = t + 1;
                }
            }

            if best_to != from {
                let a = order.remove(from);
                order.insert(best_to, a);
                let fresh = kernel.objective(&order);
                if fresh.better(cost) {
                    cost = fresh;
                    improved = true;
                } else {
                    // rounding made a non-move look better; undo it
                    let a = order.remove(best_to);
                    order.insert(from, a);
                }
            }
        }
    }
    (order, cost)
}
