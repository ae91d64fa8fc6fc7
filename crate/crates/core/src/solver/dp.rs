//! Dynamic program over the set of already placed agents.
//!
//! When `w(s, t, t')` depends only on `(s, t)`, the cost of putting agent
//! `i` at position `|A|` after the set `A` is
//! `Σ_s w(s, |A|) · #{j ∉ A ∪ {i} : j ≻_s i}`, which does not depend on how
//! the remaining agents are ordered afterwards. `best[A]` is the cheapest
//! completion from `A`, computed from the full set downwards.

use super::kernel::{AnyKernel, Cost, Kernel};
use super::{check_dimensions, evaluate_objective, SolveResult, SolverKind, SolverOptions};
use crate::error::{Error, Result};
use crate::problem::{Problem, SerialOrder};
use crate::weights::WeightMatrix;

pub fn solve_subset_dp(problem: &Problem, weights: &WeightMatrix) -> Result<SolveResult> {
    solve_subset_dp_with(problem, weights, &SolverOptions::default())
}

pub fn solve_subset_dp_with(problem: &Problem, weights: &WeightMatrix, options: &SolverOptions) -> Result<SolveResult> {
    check_dimensions(problem, weights)?;
    if !weights.class().is_decomposable() {
        return Err(Error::WrongWeightClass(weights.class()));
    }
    let n = problem.n();
    if n > options.dp_cap {
        return Err(Error::SizeCap { what: "subset dynamic program", n, cap: options.dp_cap });
    }
    let limit = if n <= options.dp_enumerate_cap { options.argmin_cap } else { 0 };
    let (orders, count) = match AnyKernel::build(problem, weights) {
        AnyKernel::Exact(k) => run(&k, limit),
        AnyKernel::Float(k) => run(&k, limit),
    };
    let best_orders: Vec<SerialOrder> = if count as usize > options.argmin_cap || limit == 0 {
        vec![SerialOrder::from_vec_unchecked(orders[0].clone())]
    } else {
        orders.into_iter().map(SerialOrder::from_vec_unchecked).collect()
    };
    let objective = evaluate_objective(problem, weights, &best_orders[0])?;
    Ok(SolveResult {
        truncated: (best_orders.len() as u64) < count,
        best_orders,
        objective,
        solver: SolverKind::SubsetDp,
        nodes_explored: 1u64 << n,
        optimum_count: Some(count),
    })
}

struct Table<'a, C> {
    kernel: &'a Kernel<C>,
    /// `above[s * n + i]`: bitmask of agents that outrank `i` at `s`.
    above: Vec<u32>,
    best: Vec<C>,
    count: Vec<u64>,
}

impl<C: Cost> Table<'_, C> {
    fn step(&self, placed: u32, i: usize) -> C {
        let n = self.kernel.n;
        let k = placed.count_ones() as usize;
        let later = !placed & !(1u32 << i);
        let mut cost = C::zero();
        for s in 0..self.kernel.m {
            let c = (self.above[s * n + i] & later).count_ones();
            if c > 0 {
                cost = cost + self.kernel.earlier_weight(s, k).scale(c);
            }
        }
        cost
    }

    fn collect(&self, placed: u32, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>, limit: usize) {
        let n = self.kernel.n;
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        for i in 0..n {
            if out.len() >= limit.max(1) {
                return;
            }
            if placed & (1 << i) != 0 {
                continue;
            }
            let next = placed | (1 << i);
            if (self.step(placed, i) + self.best[next as usize]).tied(self.best[placed as usize]) {
                prefix.push(i);
                self.collect(next, prefix, out, limit);
                prefix.pop();
            }
        }
    }
}

/// Returns (up to `limit` optimal orders in lexicographic order, argmin size).
fn run<C: Cost>(kernel: &Kernel<C>, limit: usize) -> (Vec<Vec<usize>>, u64) {
    let n = kernel.n;
    let mut above = vec![0u32; kernel.m * n];
    for s in 0..kernel.m {
        for i in 0..n {
            for j in 0..n {
                if kernel.beats(s, j, i) {
                    above[s * n + i] |= 1 << j;
                }
            }
        }
    }
    let full = (1usize << n) - 1;
    let mut table = Table { kernel, above, best: vec![C::zero(); full + 1], count: vec![0; full + 1] };
    table.count[full] = 1;
    for placed in (0..full).rev() {
        let mut best: Option<C> = None;
        for i in (0..n).filter(|&i| placed & (1 << i) == 0) {
            let v = table.step(placed as u32, i) + table.best[placed | (1 << i)];
            best = Some(best.map_or(v, |b| b.min_of(v)));
        }
        let best = best.expect("an unplaced agent exists");
        let mut count = 0u64;
        for i in (0..n).filter(|&i| placed & (1 << i) == 0) {
            let next = placed | (1 << i);
            if (table.step(placed as u32, i) + table.best[next]).tied(best) {
                count = count.saturating_add(table.count[next]);
            }
        }
        table.best[placed] = best;
        table.count[placed] = count;
    }
    let mut out = Vec::new();
    table.collect(0, &mut Vec::with_capacity(n), &mut out, limit);
    (out, table.count[0])
}
