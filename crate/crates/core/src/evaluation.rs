//! Expected justified envy of a serial order, exactly or by simulation, and
//! brute-force oracles used to check the weight builders and the solvers.
//!
//! Work is split by index range (support chunks, trial blocks, candidate
//! orders) and every reduction runs in index order, so results do not
//! depend on the number of rayon workers.

use std::fmt;

use num_bigint::BigInt;
use num_traits::Zero;
use rayon::prelude::*;

use crate::distributions::{
    enumerate_support_with_cap, marginals_of, trial_rng, DistributionSpec, Sampler, DEFAULT_SUPPORT_CAP,
};
use crate::error::{Error, Result};
use crate::exact::{Rational, Value};
use crate::mechanism::SdScratch;
use crate::perm::{factorial, permutations};
use crate::problem::{Problem, SerialOrder};
use crate::solver::{solve_auto, SolverOptions};
use crate::weights::{
    capacity_weights, independent_weights_for, kemeny_weights, marginal_weights, Scheme, WeightMatrix,
};

/// Largest `n` for which [`oracle_optimal_orders`] enumerates every order.
pub const ORACLE_ORDER_CAP: usize = 8;

/// Monte Carlo trials handed to one rayon task.
const TRIAL_BLOCK: u64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EvalMethod {
    Exact,
    MonteCarlo,
}

impl EvalMethod {
    pub fn name(self) -> &'static str {
        match self {
            EvalMethod::Exact => "exact",
            EvalMethod::MonteCarlo => "mc",
        }
    }
}

impl fmt::Display for EvalMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Expected number of justified-envy triplets.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpectationResult {
    /// Exact for enumeration, a float sample mean for Monte Carlo.
    pub mean: Value,
    /// Zero for exact results.
    pub standard_error: f64,
    pub method: EvalMethod,
    /// Support size for exact results, trial count for Monte Carlo.
    pub samples: u128,
}

/// Exact expectation by enumerating the support (default cap).
pub fn expected_envy_exact(
    problem: &Problem,
    order: &SerialOrder,
    spec: &DistributionSpec,
) -> Result<ExpectationResult> {
    expected_envy_exact_with_cap(problem, order, spec, DEFAULT_SUPPORT_CAP)
}

pub fn expected_envy_exact_with_cap(
    problem: &Problem,
    order: &SerialOrder,
    spec: &DistributionSpec,
    cap: u128,
) -> Result<ExpectationResult> {
    check_order(problem, order)?;
    let support = enumerate_support_with_cap(spec, problem, cap)?;
    let rho = order.agents();
    let mean = if support.is_uniform() {
        let total: u64 = (0..support.chunks())
            .into_par_iter()
            .map(|chunk| {
                let mut sd = SdScratch::new(problem);
                let mut sum = 0u64;
                support.for_each_in_chunk(chunk, |_, view| {
                    sd.run(problem, rho, |a| view[a]);
                    sum += u64::from(sd.justified_envy(problem, rho, |a| view[a]));
                });
                sum
            })
            .collect::<Vec<_>>()
            .into_iter()
            .sum();
        Rational::new(BigInt::from(total), BigInt::from(support.len()))
    } else {
        let mut sd = SdScratch::new(problem);
        let mut mean = Rational::zero();
        support.for_each(|key, view| {
            sd.run(problem, rho, |a| view[a]);
            let count = sd.justified_envy(problem, rho, |a| view[a]);
            if count > 0 {
                mean += support.probability(key) * Rational::from_integer(BigInt::from(count));
            }
        });
        mean
    };
    Ok(ExpectationResult {
        mean: Value::Exact(mean),
        standard_error: 0.0,
        method: EvalMethod::Exact,
        samples: support.len(),
    })
}

/// Monte Carlo estimate over trials `0..samples` drawn with [`trial_rng`].
pub fn expected_envy_mc(
    problem: &Problem,
    order: &SerialOrder,
    spec: &DistributionSpec,
    samples: u64,
    seed: u64,
) -> Result<ExpectationResult> {
    check_order(problem, order)?;
    if samples == 0 {
        return Err(Error::invalid("samples must be at least 1"));
    }
    let sampler = Sampler::new(spec, problem)?;
    let rho = order.agents();
    let blocks = samples.div_ceil(TRIAL_BLOCK);
    let partial: Vec<(u128, u128)> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut sd = SdScratch::new(problem);
            let mut rankings = vec![Vec::new(); problem.n()];
            let (mut sum, mut sq) = (0u128, 0u128);
            for trial in b * TRIAL_BLOCK..((b + 1) * TRIAL_BLOCK).min(samples) {
                sampler.draw(&mut trial_rng(seed, trial), &mut rankings);
                sd.run(problem, rho, |a| &rankings[a]);
                let c = u128::from(sd.justified_envy(problem, rho, |a| &rankings[a]));
                sum += c;
                sq += c * c;
            }
            (sum, sq)
        })
        .collect();
    let (sum, sq) = partial.into_iter().fold((0, 0), |(a, b), (c, d)| (a + c, b + d));
    let n = samples as f64;
    let mean = sum as f64 / n;
    let standard_error = if samples > 1 {
        // exact integer numerator of the unbiased variance
        let num = u128::from(samples) * sq - sum * sum;
        (num as f64 / (n * (n - 1.0)) / n).sqrt()
    } else {
        0.0
    };
    Ok(ExpectationResult {
        mean: Value::Float(mean),
        standard_error,
        method: EvalMethod::MonteCarlo,
        samples: u128::from(samples),
    })
}

/// Empirical match frequencies from serial dictatorship runs.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchFrequencies {
    /// `frequency[t][s]`: share of runs in which position `t` took object `s`.
    pub frequency: Vec<Vec<f64>>,
    pub samples: u64,
}

impl MatchFrequencies {
    /// Largest deviation from `expected[t][s]`, in binomial standard errors.
    /// Cells with zero variance must match exactly or count as infinite.
    pub fn max_z(&self, expected: impl Fn(usize, usize) -> f64) -> f64 {
        let n = self.samples as f64;
        let mut worst: f64 = 0.0;
        for (t, row) in self.frequency.iter().enumerate() {
            for (s, &f) in row.iter().enumerate() {
                let p = expected(t, s);
                let se = (p * (1.0 - p) / n).sqrt();
                let z = if se > 0.0 {
                    (f - p).abs() / se
                } else if (f - p).abs() > 1e-12 {
                    f64::INFINITY
                } else {
                    0.0
                };
                worst = worst.max(z);
            }
        }
        worst
    }
}

/// Frequency with which each position is matched to each object.
pub fn match_probability_check(
    problem: &Problem,
    order: &SerialOrder,
    spec: &DistributionSpec,
    samples: u64,
    seed: u64,
) -> Result<MatchFrequencies> {
    check_order(problem, order)?;
    if !matches!(spec, DistributionSpec::IdenticalUniform | DistributionSpec::IndependentUniform) {
        return Err(Error::UnsupportedDistribution(format!(
            "match frequencies are checked for uniform distributions only, not {}",
            spec.kind_name()
        )));
    }
    if samples == 0 {
        return Err(Error::invalid("samples must be at least 1"));
    }
    let (n, m) = (problem.n(), problem.m());
    let sampler = Sampler::new(spec, problem)?;
    let rho = order.agents();
    let blocks = samples.div_ceil(TRIAL_BLOCK);
    let partial: Vec<Vec<u64>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut sd = SdScratch::new(problem);
            let mut rankings = vec![Vec::new(); n];
            let mut counts = vec![0u64; n * m];
            for trial in b * TRIAL_BLOCK..((b + 1) * TRIAL_BLOCK).min(samples) {
                sampler.draw(&mut trial_rng(seed, trial), &mut rankings);
                sd.run(problem, rho, |a| &rankings[a]);
                for (t, &s) in sd.taken.iter().enumerate() {
                    counts[t * m + s] += 1;
                }
            }
            counts
        })
        .collect();
    let mut counts = vec![0u64; n * m];
    for part in partial {
        counts.iter_mut().zip(part).for_each(|(c, p)| *c += p);
    }
    let frequency = (0..n).map(|t| (0..m).map(|s| counts[t * m + s] as f64 / samples as f64).collect()).collect();
    Ok(MatchFrequencies { frequency, samples })
}

/// Exact envy probabilities between positions.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvyProbabilities {
    n: usize,
    m: usize,
    joint: Vec<Rational>,
}

impl EnvyProbabilities {
    /// `P[position u envies position t and t took s]`, 0-based `t < u`.
    pub fn joint(&self, s: usize, t: usize, u: usize) -> &Rational {
        &self.joint[(s * self.n + t) * self.n + u]
    }

    /// `P[position u envies position t]`.
    pub fn marginal(&self, t: usize, u: usize) -> Rational {
        (0..self.m).map(|s| self.joint(s, t, u)).sum()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }
}

/// Enumerates the support and records, for every `(s, t, u)`, how likely the
/// agent at `u` strictly prefers the object taken at `t`, with that object
/// being `s`. Priorities play no part.
pub fn envy_probability_oracle(
    problem: &Problem,
    order: &SerialOrder,
    spec: &DistributionSpec,
) -> Result<EnvyProbabilities> {
    check_order(problem, order)?;
    let support = enumerate_support_with_cap(spec, problem, DEFAULT_SUPPORT_CAP)?;
    let (n, m) = (problem.n(), problem.m());
    let rho = order.agents();
    let joint = if support.is_uniform() {
        let partial: Vec<Vec<u64>> = (0..support.chunks())
            .into_par_iter()
            .map(|chunk| {
                let mut sd = SdScratch::new(problem);
                let mut counts = vec![0u64; m * n * n];
                support.for_each_in_chunk(chunk, |_, view| {
                    sd.run(problem, rho, |a| view[a]);
                    envy_cells(&sd, view, rho, |cell| counts[cell] += 1);
                });
                counts
            })
            .collect();
        let mut counts = vec![0u64; m * n * n];
        for part in partial {
            counts.iter_mut().zip(part).for_each(|(c, p)| *c += p);
        }
        let len = BigInt::from(support.len());
        counts.into_iter().map(|c| Rational::new(BigInt::from(c), len.clone())).collect()
    } else {
        let mut sd = SdScratch::new(problem);
        let mut joint = vec![Rational::zero(); m * n * n];
        support.for_each(|key, view| {
            sd.run(problem, rho, |a| view[a]);
            let p = support.probability(key);
            envy_cells(&sd, view, rho, |cell| joint[cell] += &p);
        });
        joint
    };
    Ok(EnvyProbabilities { n, m, joint })
}

/// Weight scheme proven optimal for this distribution and capacity shape.
///
/// | distribution        | unit capacities | otherwise |
/// |---------------------|-----------------|-----------|
/// | identical uniform   | `thm1`          | `prop3`   |
/// | identical explicit  | `prop1`         | refused   |
/// | independent uniform | `prop2`         | refused   |
/// | fixed profile       | refused         | refused   |
///
/// "Unit" means every capacity is 1 and there are as many objects as agents.
pub fn select_scheme(problem: &Problem, spec: &DistributionSpec) -> Result<Scheme> {
    let unit = problem.is_unit();
    match (spec, unit) {
        (DistributionSpec::IdenticalUniform, true) => Ok(Scheme::Kemeny),
        (DistributionSpec::IdenticalExplicit(_), true) => Ok(Scheme::Marginal),
        (DistributionSpec::IndependentUniform, true) => Ok(Scheme::Independent),
        (DistributionSpec::IdenticalUniform, false) => Ok(Scheme::Capacity),
        _ => Err(Error::IncompatibleScheme(format!(
            "no weight scheme is proven optimal for distribution {} with {} capacities",
            spec.kind_name(),
            if unit { "unit" } else { "non-unit" }
        ))),
    }
}

/// Builds `scheme`'s weights after checking that the scheme applies to this
/// distribution and capacity shape. `thm1` and `prop2` need an identical or
/// independent uniform distribution with unit capacities, `prop1` an
/// identical distribution with unit capacities, `prop3` an identical
/// uniform distribution.
pub fn weights_for(problem: &Problem, spec: &DistributionSpec, scheme: Scheme) -> Result<WeightMatrix> {
    let refuse = |need: &str| {
        Err(Error::IncompatibleScheme(format!(
            "weights {} need {need}; got distribution {} with {} capacities",
            scheme.name(),
            spec.kind_name(),
            if problem.is_unit() { "unit" } else { "non-unit" }
        )))
    };
    spec.validate(problem)?;
    match scheme {
        Scheme::Kemeny => match spec {
            DistributionSpec::IdenticalUniform if problem.is_unit() => kemeny_weights(problem),
            _ => refuse("an identical_uniform distribution and unit capacities"),
        },
        Scheme::Marginal => match spec {
            DistributionSpec::IdenticalUniform | DistributionSpec::IdenticalExplicit(_) if problem.is_unit() => {
                Ok(marginal_weights(&marginals_of(spec, problem)?))
            }
            _ => refuse("an identical distribution and unit capacities"),
        },
        Scheme::Independent => match spec {
            DistributionSpec::IndependentUniform if problem.is_unit() => independent_weights_for(problem),
            _ => refuse("an independent_uniform distribution and unit capacities"),
        },
        Scheme::Capacity => match spec {
            DistributionSpec::IdenticalUniform => capacity_weights(problem),
            _ => refuse("an identical_uniform distribution"),
        },
        Scheme::Custom => refuse("an explicit weight table"),
    }
}

/// Weights from [`select_scheme`].
pub fn auto_weights(problem: &Problem, spec: &DistributionSpec) -> Result<WeightMatrix> {
    weights_for(problem, spec, select_scheme(problem, spec)?)
}

/// Brute-force argmin next to the solver's.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub oracle_argmin: Vec<SerialOrder>,
    /// Minimum expected envy over all orders.
    pub oracle_value: Rational,
    pub solver_argmin: Vec<SerialOrder>,
    /// Solver objective times the scheme's envy factor, i.e. expected envy.
    pub solver_value: Rational,
    /// Raw solver objective before the envy factor.
    pub solver_objective: Rational,
    pub scheme: Scheme,
    pub agree: bool,
}

/// Evaluates every order exactly and compares the argmin with the solver
/// run under the scheme from [`select_scheme`].
pub fn oracle_optimal_orders(problem: &Problem, spec: &DistributionSpec) -> Result<OracleReport> {
    let n = problem.n();
    if n > ORACLE_ORDER_CAP {
        return Err(Error::SizeCap { what: "order enumeration", n, cap: ORACLE_ORDER_CAP });
    }
    let support = enumerate_support_with_cap(spec, problem, DEFAULT_SUPPORT_CAP)?;
    let weights = auto_weights(problem, spec)?;
    let orders = permutations(n);
    debug_assert_eq!(orders.len() as u128, factorial(n));

    // Uniform supports: compare integer envy totals; otherwise exact rationals.
    let values: Vec<Rational> = if support.is_uniform() {
        let totals: Vec<u64> = orders
            .par_iter()
            .map(|rho| {
                let mut sd = SdScratch::new(problem);
                let mut sum = 0u64;
                support.for_each(|_, view| {
                    sd.run(problem, rho, |a| view[a]);
                    sum += u64::from(sd.justified_envy(problem, rho, |a| view[a]));
                });
                sum
            })
            .collect();
        let len = BigInt::from(support.len());
        totals.into_iter().map(|t| Rational::new(BigInt::from(t), len.clone())).collect()
    } else {
        orders
            .par_iter()
            .map(|rho| {
                let mut sd = SdScratch::new(problem);
                let mut sum = Rational::zero();
                support.for_each(|key, view| {
                    sd.run(problem, rho, |a| view[a]);
                    let c = sd.justified_envy(problem, rho, |a| view[a]);
                    if c > 0 {
                        sum += support.probability(key) * Rational::from_integer(BigInt::from(c));
                    }
                });
                sum
            })
            .collect()
    };
    let oracle_value = values.iter().min().cloned().unwrap_or_else(Rational::zero);
    let oracle_argmin: Vec<SerialOrder> = orders
        .into_iter()
        .zip(&values)
        .filter(|(_, v)| **v == oracle_value)
        .map(|(o, _)| SerialOrder::from_vec_unchecked(o))
        .collect();

    let options =
        SolverOptions { argmin_cap: usize::MAX, dp_enumerate_cap: ORACLE_ORDER_CAP, ..SolverOptions::default() };
    let solved = solve_auto(problem, &weights, &options, 0)?;
    let solver_value = solved.expected_envy(&weights);
    let agree = oracle_argmin == solved.best_orders && oracle_value == solver_value;
    Ok(OracleReport {
        oracle_argmin,
        oracle_value,
        solver_argmin: solved.best_orders,
        solver_value,
        solver_objective: solved.objective,
        scheme: weights.scheme(),
        agree,
    })
}

fn check_order(problem: &Problem, order: &SerialOrder) -> Result<()> {
    if order.len() != problem.n() {
        return Err(Error::DimensionMismatch(format!("order has {} agents, problem has {}", order.len(), problem.n())));
    }
    Ok(())
}

/// Calls `hit` with the `(s, t, u)` cell of every envy pair in the last run.
fn envy_cells(sd: &SdScratch, view: &[&[usize]], rho: &[usize], mut hit: impl FnMut(usize)) {
    let n = rho.len();
    for u in 1..n {
        for t in 0..u {
            if sd.envies(view[rho[u]], t, u) {
                hit((sd.taken[t] * n + t) * n + u);
            }
        }
    }
}
