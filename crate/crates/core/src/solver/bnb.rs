//! Branch-and-bound over serial-order prefixes.
//!
//! Positions are filled left to right. A node's lower bound adds to the
//! prefix cost, for every object,
//! * each (placed, unplaced) pair priced at the cheapest later position, and
//! * each unplaced pair priced at its cheaper orientation, using the
//!   cheapest cell among the positions still free.
//!
//! Both terms only replace a weight by a minimum over feasible cells, so
//! the bound never exceeds the true completion cost.
//!
//! The first position splits the tree into independent branches. Branches
//! never share incumbents; they all start from the same heuristic upper
//! bound, so the result and the node count are identical whether the
//! branches run on one thread or many.

use rayon::prelude::*;

use super::kernel::{AnyKernel, Cost, Kernel};
use super::{check_dimensions, evaluate_objective, local, SolveResult, SolverKind, SolverOptions};
use crate::error::{Error, Result};
use crate::problem::{Problem, SerialOrder};
use crate::weights::WeightMatrix;

pub fn solve_exact(problem: &Problem, weights: &WeightMatrix) -> Result<SolveResult> {
    solve_exact_with(problem, weights, &SolverOptions::default())
}

pub fn solve_exact_with(problem: &Problem, weights: &WeightMatrix, options: &SolverOptions) -> Result<SolveResult> {
    check_dimensions(problem, weights)?;
    if problem.n() > options.exact_cap {
        return Err(Error::SizeCap {
            what: "branch-and-bound (use the local-search heuristic)",
            n: problem.n(),
            cap: options.exact_cap,
        });
    }
    let (orders, count, nodes) = match AnyKernel::build(problem, weights) {
        AnyKernel::Exact(k) => search(&k, options),
        AnyKernel::Float(k) => search(&k, options),
    };
    let truncated = count as usize > options.argmin_cap;
    let best_orders: Vec<SerialOrder> = if truncated {
        vec![SerialOrder::from_vec_unchecked(orders[0].clone())]
    } else {
        orders.into_iter().map(SerialOrder::from_vec_unchecked).collect()
    };
    let objective = evaluate_objective(problem, weights, &best_orders[0])?;
    Ok(SolveResult {
        best_orders,
        objective,
        solver: SolverKind::BranchAndBound,
        nodes_explored: nodes,
        optimum_count: Some(count),
        truncated,
    })
}

struct Tables<C> {
    n: usize,
    /// `place[((t * n + k) * n + b) * n + a]`: agent `b` at `t` precedes agent `a` at `k`.
    place: Vec<C>,
    /// Lower bound for placed `b` at `t` and unplaced `j`, when `k` positions are filled.
    fixed: Vec<C>,
    /// Lower bound for unplaced `i` before unplaced `j`, when `k` positions are filled.
    free: Vec<C>,
}

impl<C: Cost> Tables<C> {
    fn new(kernel: &Kernel<C>) -> Self {
        let (n, m) = (kernel.n, kernel.m);
        let idx4 = |a: usize, b: usize, c: usize, d: usize| ((a * n + b) * n + c) * n + d;

        let mut place = vec![C::zero(); n * n * n * n];
        for t in 0..n {
            for k in t + 1..n {
                for b in 0..n {
                    for a in 0..n {
                        if a != b {
                            place[idx4(t, k, b, a)] = kernel.pair_cost(t, k, b, a);
                        }
                    }
                }
            }
        }

        // min_later[(s * n + t) * n + k] = min over u in k..n of w(s, t, u), for k > t
        let mut min_later = vec![C::zero(); m * n * n];
        for s in 0..m {
            for t in 0..n {
                let mut best: Option<C> = None;
                for k in (t + 1..n).rev() {
                    let w = kernel.weight(s, t, k);
                    let v = best.map_or(w, |b| b.min_of(w));
                    best = Some(v);
                    min_later[(s * n + t) * n + k] = v;
                }
            }
        }
        // min_pair[s * n + k] = min over k <= t < u < n of w(s, t, u)
        let mut min_pair = vec![C::zero(); m * n];
        for s in 0..m {
            let mut best: Option<C> = None;
            for k in (0..n).rev() {
                for u in k + 1..n {
                    let w = kernel.weight(s, k, u);
                    best = Some(best.map_or(w, |b| b.min_of(w)));
                }
                min_pair[s * n + k] = best.unwrap_or_else(C::zero);
            }
        }

        let mut fixed = vec![C::zero(); n * n * n * n];
        for t in 0..n {
            for k in t + 1..n {
                for b in 0..n {
                    for j in 0..n {
                        let mut v = C::zero();
                        for s in 0..m {
                            if kernel.beats(s, j, b) {
                                v = v + min_later[(s * n + t) * n + k];
                            }
                        }
                        fixed[idx4(t, k, b, j)] = v;
                    }
                }
            }
        }

        let mut free = vec![C::zero(); n * n * n];
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let mut v = C::zero();
                    for s in 0..m {
                        if kernel.beats(s, j, i) {
                            v = v + min_pair[s * n + k];
                        }
                    }
                    free[(k * n + i) * n + j] = v;
                }
            }
        }
        Tables { n, place, fixed, free }
    }

    #[inline]
    fn place(&self, t: usize, k: usize, b: usize, a: usize) -> C {
        self.place[((t * self.n + k) * self.n + b) * self.n + a]
    }

    fn bound(&self, prefix: &[usize], placed: &[bool]) -> C {
        let n = self.n;
        let k = prefix.len();
        let mut lb = C::zero();
        for (t, &b) in prefix.iter().enumerate() {
            let base = ((t * n + k) * n + b) * n;
            for j in (0..n).filter(|&j| !placed[j]) {
                lb = lb + self.fixed[base + j];
            }
        }
        let base = k * n * n;
        for i in (0..n).filter(|&i| !placed[i]) {
            for j in (i + 1..n).filter(|&j| !placed[j]) {
                lb = lb + self.free[base + i * n + j].min_of(self.free[base + j * n + i]);
            }
        }
        lb
    }
}

struct Branch<'a, C> {
    tables: &'a Tables<C>,
    cap: usize,
    best: C,
    orders: Vec<Vec<usize>>,
    count: u64,
    nodes: u64,
    prefix: Vec<usize>,
    placed: Vec<bool>,
}

impl<C: Cost> Branch<'_, C> {
    fn dfs(&mut self, cost: C) {
        self.nodes += 1;
        let n = self.tables.n;
        let k = self.prefix.len();
        if k == n {
            if cost.better(self.best) {
                self.best = cost;
                self.orders.clear();
                self.count = 0;
            }
            if cost.tied(self.best) {
                self.count += 1;
                if self.orders.len() <= self.cap {
                    self.orders.push(self.prefix.clone());
                }
            }
            return;
        }
        if k + 1 < n && self.best.better(cost + self.tables.bound(&self.prefix, &self.placed)) {
            return;
        }
        for a in 0..n {
            if self.placed[a] {
                continue;
            }
            let mut add = C::zero();
            for (t, &b) in self.prefix.iter().enumerate() {
                add = add + self.tables.place(t, k, b, a);
            }
            self.placed[a] = true;
            self.prefix.push(a);
            self.dfs(cost + add);
            self.prefix.pop();
            self.placed[a] = false;
        }
    }
}

/// Returns (optimal orders in lexicographic order, argmin size, nodes).
fn search<C: Cost>(kernel: &Kernel<C>, options: &SolverOptions) -> (Vec<Vec<usize>>, u64, u64) {
    let n = kernel.n;
    let tables = Tables::new(kernel);
    let upper = local::improve(kernel, 0, 4).cost;
    let run = |first: usize| {
        let mut branch = Branch {
            tables: &tables,
            cap: options.argmin_cap,
            best: upper,
            orders: Vec::new(),
            count: 0,
            nodes: 0,
            prefix: vec![first],
            placed: (0..n).map(|i| i == first).collect(),
        };
        branch.dfs(C::zero());
        (branch.best, branch.orders, branch.count, branch.nodes)
    };
    let branches: Vec<_> =
        if options.parallel { (0..n).into_par_iter().map(run).collect() } else { (0..n).map(run).collect() };

    let best = branches.iter().filter(|b| b.2 > 0).map(|b| b.0).fold(upper, |acc, v| acc.min_of(v));
    let mut orders = Vec::new();
    let mut count = 0;
    let mut nodes = 1;
    for (value, list, c, visited) in branches {
        nodes += visited;
        if c > 0 && value.tied(best) {
            count += c;
            for o in list {
                if orders.len() <= options.argmin_cap {
                    orders.push(o);
                }
            }
        }
    }
    (orders, count, nodes)
}
