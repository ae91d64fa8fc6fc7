//! Preference distributions: seeded samplers, exact support enumeration,
//! and position marginals of a common ranking.
//!
//! # Seeding
//!
//! Trial `k` under root seed `seed` draws from ChaCha8 keyed by
//! `seed_from_u64(seed)` with stream id `k` ([`trial_rng`]). Each trial's
//! stream is independent of every other, so results do not depend on how
//! trials are split across threads.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exact::{ratio, Rational};
use crate::perm::{factorial, permutations};
use crate::problem::{inverse_permutation, PreferenceProfile, Problem};

/// Default cap on the number of profiles an exact enumeration may visit.
pub const DEFAULT_SUPPORT_CAP: u128 = 2_000_000;

/// How agents' preferences are drawn.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DistributionSpec {
    /// One ranking, uniform over all `m!`, shared by every agent.
    IdenticalUniform,
    /// One ranking shared by every agent, drawn from an explicit list.
    IdenticalExplicit(Vec<(Vec<usize>, Rational)>),
    /// Each agent draws a uniform ranking independently.
    IndependentUniform,
    /// A single known profile.
    Fixed(PreferenceProfile),
}

impl DistributionSpec {
    pub fn kind_name(&self) -> &'static str {
        match self {
            DistributionSpec::IdenticalUniform => "identical_uniform",
            DistributionSpec::IdenticalExplicit(_) => "identical_explicit",
            DistributionSpec::IndependentUniform => "independent_uniform",
            DistributionSpec::Fixed(_) => "fixed",
        }
    }

    /// Checks the spec against the problem's agents and objects.
    pub fn validate(&self, problem: &Problem) -> Result<()> {
        match self {
            DistributionSpec::IdenticalUniform | DistributionSpec::IndependentUniform => Ok(()),
            DistributionSpec::Fixed(profile) => {
                PreferenceProfile::new(problem, profile.rankings().to_vec()).map(|_| ())
            }
            DistributionSpec::IdenticalExplicit(entries) => {
                if entries.is_empty() {
                    return Err(Error::invalid("identical_explicit needs at least one ranking"));
                }
                let mut total = Rational::zero();
                for (k, (ranking, prob)) in entries.iter().enumerate() {
                    if inverse_permutation(ranking, problem.m()).is_none() {
                        return Err(Error::invalid(format!(
                            "ranking #{} is not a permutation of the {} objects",
                            k + 1,
                            problem.m()
                        )));
                    }
                    if prob.is_negative() {
                        return Err(Error::invalid(format!("ranking #{} has a negative probability", k + 1)));
                    }
                    if entries[..k].iter().any(|(r, _)| r == ranking) {
                        return Err(Error::invalid(format!("ranking #{} is listed twice", k + 1)));
                    }
                    total += prob;
                }
                if (total.clone() - Rational::one()).abs() > ratio(1, 1_000_000_000_000) {
                    return Err(Error::invalid(format!(
                        "probabilities sum to {}, not 1",
                        crate::exact::fraction_string(&total)
                    )));
                }
                Ok(())
            }
        }
    }

    /// Exact number of profiles in the support.
    pub fn support_size(&self, problem: &Problem) -> u128 {
        match self {
            DistributionSpec::IdenticalUniform => factorial(problem.m()),
            DistributionSpec::IdenticalExplicit(entries) => entries.len() as u128,
            DistributionSpec::IndependentUniform => {
                let per_agent = factorial(problem.m());
                (0..problem.n()).try_fold(1u128, |acc, _| acc.checked_mul(per_agent)).unwrap_or(u128::MAX)
            }
            DistributionSpec::Fixed(_) => 1,
        }
    }
}

/// The per-trial random stream for `(seed, trial)`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Draws one profile; a deterministic function of `(seed, trial)`.
pub fn sample_profile(spec: &DistributionSpec, problem: &Problem, seed: u64, trial: u64) -> Result<PreferenceProfile> {
    let sampler = Sampler::new(spec, problem)?;
    let mut rankings = vec![Vec::new(); problem.n()];
    sampler.draw(&mut trial_rng(seed, trial), &mut rankings);
    Ok(PreferenceProfile::from_rankings_unchecked(rankings))
}

/// Reusable sampler; validation and cumulative tables are computed once.
#[derive(Debug, Clone)]
pub(crate) struct Sampler<'a> {
    spec: &'a DistributionSpec,
    m: usize,
    n: usize,
    cumulative: Cumulative,
}

#[derive(Debug, Clone)]
enum Cumulative {
    None,
    /// Integer thresholds over a common denominator.
    Exact {
        thresholds: Vec<u64>,
        denom: u64,
    },
    Float(Vec<f64>),
}

impl<'a> Sampler<'a> {
    pub(crate) fn new(spec: &'a DistributionSpec, problem: &Problem) -> Result<Self> {
        spec.validate(problem)?;
        let cumulative = match spec {
            DistributionSpec::IdenticalExplicit(entries) => explicit_cumulative(entries),
            _ => Cumulative::None,
        };
        Ok(Sampler { spec, m: problem.m(), n: problem.n(), cumulative })
    }

    /// Fills `out` (one ranking per agent).
    pub(crate) fn draw<R: Rng>(&self, rng: &mut R, out: &mut [Vec<usize>]) {
        match self.spec {
            DistributionSpec::IdenticalUniform => {
                let ranking = self.uniform_ranking(rng);
                out.iter_mut().for_each(|r| r.clone_from(&ranking));
            }
            DistributionSpec::IndependentUniform => {
                for r in out.iter_mut() {
                    *r = self.uniform_ranking(rng);
                }
            }
            DistributionSpec::IdenticalExplicit(entries) => {
                let k = match &self.cumulative {
                    Cumulative::Exact { thresholds, denom } => {
                        let u = rng.random_range(0..*denom);
                        thresholds.iter().position(|&c| u < c).unwrap_or(entries.len() - 1)
                    }
                    Cumulative::Float(cum) => {
                        let u: f64 = rng.random();
                        cum.iter().position(|&c| u < c).unwrap_or(entries.len() - 1)
                    }
                    Cumulative::None => unreachable!("explicit sampler without table"),
                };
                out.iter_mut().for_each(|r| r.clone_from(&entries[k].0));
            }
            DistributionSpec::Fixed(profile) => {
                for (r, fixed) in out.iter_mut().zip(profile.rankings()) {
                    r.clone_from(fixed);
                }
            }
        }
        debug_assert_eq!(out.len(), self.n);
    }

    fn uniform_ranking<R: Rng>(&self, rng: &mut R) -> Vec<usize> {
        let mut ranking: Vec<usize> = (0..self.m).collect();
        ranking.shuffle(rng);
        ranking
    }
}

fn explicit_cumulative(entries: &[(Vec<usize>, Rational)]) -> Cumulative {
    let denom = entries.iter().fold(BigInt::one(), |acc, (_, p)| acc.lcm(p.denom()));
    if let Some(d) = denom.to_u64() {
        let mut acc = BigInt::zero();
        let thresholds = entries
            .iter()
            .map(|(_, p)| {
                acc += p.numer() * (&denom / p.denom());
                acc.to_u64().unwrap_or(d)
            })
            .collect();
        Cumulative::Exact { thresholds, denom: d }
    } else {
        let mut acc = 0.0;
        let cum = entries
            .iter()
            .map(|(_, p)| {
                acc += crate::exact::to_f64(p);
                acc
            })
            .collect();
        Cumulative::Float(cum)
    }
}

/// The exact support of a distribution, visited lazily.
#[derive(Debug, Clone)]
pub struct Support {
    n: usize,
    len: u128,
    body: SupportBody,
}

#[derive(Debug, Clone)]
enum SupportBody {
    /// Common rankings; `probs == None` means uniform.
    Identical {
        rankings: Vec<Vec<usize>>,
        probs: Option<Vec<Rational>>,
    },
    /// Every combination of per-agent permutations, uniform.
    Independent {
        perms: Vec<Vec<usize>>,
    },
    Fixed(PreferenceProfile),
}

/// Enumerates the support under the default cap.
pub fn enumerate_support(spec: &DistributionSpec, problem: &Problem) -> Result<Support> {
    enumerate_support_with_cap(spec, problem, DEFAULT_SUPPORT_CAP)
}

pub fn enumerate_support_with_cap(spec: &DistributionSpec, problem: &Problem, cap: u128) -> Result<Support> {
    spec.validate(problem)?;
    let size = spec.support_size(problem);
    if size > cap {
        return Err(Error::SupportTooLarge { size, cap });
    }
    let body = match spec {
        DistributionSpec::IdenticalUniform => {
            SupportBody::Identical { rankings: permutations(problem.m()), probs: None }
        }
        DistributionSpec::IdenticalExplicit(entries) => SupportBody::Identical {
            rankings: entries.iter().map(|(r, _)| r.clone()).collect(),
            probs: Some(entries.iter().map(|(_, p)| p.clone()).collect()),
        },
        DistributionSpec::IndependentUniform => SupportBody::Independent { perms: permutations(problem.m()) },
        DistributionSpec::Fixed(profile) => SupportBody::Fixed(profile.clone()),
    };
    Ok(Support { n: problem.n(), len: size, body })
}

impl Support {
    pub fn len(&self) -> u128 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// True when every profile carries probability `1 / len`.
    pub fn is_uniform(&self) -> bool {
        !matches!(self.body, SupportBody::Identical { probs: Some(_), .. })
    }

    /// Probability of the profile visited with `key` (see [`Support::for_each_in_chunk`]).
    pub fn probability(&self, key: usize) -> Rational {
        match &self.body {
            SupportBody::Identical { probs: Some(p), .. } => p[key].clone(),
            _ => Rational::new(BigInt::one(), BigInt::from(self.len)),
        }
    }

    /// Independent units of work, visited in index order by
    /// [`Support::for_each_in_chunk`].
    pub fn chunks(&self) -> usize {
        match &self.body {
            SupportBody::Independent { perms } if self.n > 1 => perms.len(),
            _ => 1,
        }
    }

    /// Visits every profile of chunk `chunk` as `(key, rankings)` with one
    /// ranking per agent. `key` indexes explicit probabilities.
    pub fn for_each_in_chunk<F>(&self, chunk: usize, mut f: F)
    where
        F: FnMut(usize, &[&[usize]]),
    {
        match &self.body {
            SupportBody::Identical { rankings, .. } => {
                let mut view: Vec<&[usize]> = Vec::with_capacity(self.n);
                for (key, r) in rankings.iter().enumerate() {
                    view.clear();
                    view.extend(std::iter::repeat_n(r.as_slice(), self.n));
                    f(key, &view);
                }
            }
            SupportBody::Fixed(profile) => {
                let view: Vec<&[usize]> = profile.rankings().iter().map(Vec::as_slice).collect();
                f(0, &view);
            }
            SupportBody::Independent { perms } => {
                let k = perms.len();
                // mixed-radix counter over agents; agent 0 is fixed by the chunk
                // unless it is the only agent
                let lowest = usize::from(self.n > 1);
                let mut digits = vec![0usize; self.n];
                if lowest == 1 {
                    digits[0] = chunk;
                }
                let mut view: Vec<&[usize]> = digits.iter().map(|&d| perms[d].as_slice()).collect();
                loop {
                    f(0, &view);
                    let mut a = self.n;
                    loop {
                        if a == lowest {
                            return;
                        }
                        a -= 1;
                        digits[a] += 1;
                        if digits[a] < k {
                            view[a] = perms[digits[a]].as_slice();
                            break;
                        }
                        digits[a] = 0;
                        view[a] = perms[0].as_slice();
                    }
                }
            }
        }
    }

    /// Visits every profile.
    pub fn for_each<F>(&self, mut f: F)
    where
        F: FnMut(usize, &[&[usize]]),
    {
        for c in 0..self.chunks() {
            self.for_each_in_chunk(c, &mut f);
        }
    }

    /// Materializes `(profile, probability)` pairs.
    pub fn to_vec(&self) -> Vec<(PreferenceProfile, Rational)> {
        let mut out = Vec::new();
        self.for_each(|key, view| {
            let profile = PreferenceProfile::from_rankings_unchecked(view.iter().map(|r| r.to_vec()).collect());
            out.push((profile, self.probability(key)));
        });
        out
    }
}

/// `p(s, t)`: probability that the common ranking puts object `s` at
/// position `t` (0-based). Square and doubly stochastic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PositionMarginals {
    size: usize,
    cells: Vec<Rational>,
}

impl PositionMarginals {
    /// Raw-marginal input mode: accepts a matrix indexed `[object][position]`.
    /// Such a matrix feeds the weight builder only; it does not determine a
    /// distribution and cannot be sampled.
    pub fn from_matrix(rows: Vec<Vec<Rational>>) -> Result<Self> {
        let size = rows.len();
        if size == 0 || rows.iter().any(|r| r.len() != size) {
            return Err(Error::NotStochastic("marginal matrix must be square and nonempty".into()));
        }
        let tol = ratio(1, 1_000_000_000_000);
        let one = Rational::one();
        for (s, row) in rows.iter().enumerate() {
            if row.iter().any(|p| p.is_negative() || *p > one) {
                return Err(Error::NotStochastic(format!("row {s} has an entry outside [0, 1]")));
            }
            let sum: Rational = row.iter().sum();
            if (sum - &one).abs() > tol {
                return Err(Error::NotStochastic(format!("row {s} does not sum to 1")));
            }
        }
        for t in 0..size {
            let sum: Rational = rows.iter().map(|r| &r[t]).sum();
            if (sum - &one).abs() > tol {
                return Err(Error::NotStochastic(format!("column {t} does not sum to 1")));
            }
        }
        Ok(PositionMarginals { size, cells: rows.into_iter().flatten().collect() })
    }

    pub fn uniform(size: usize) -> Self {
        let p = ratio(1, size as i64);
        PositionMarginals { size, cells: vec![p; size * size] }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// `p(s, t)` with 0-based `t`.
    pub fn get(&self, s: usize, t: usize) -> &Rational {
        &self.cells[s * self.size + t]
    }
}

/// Exact position marginals of an identical-preference distribution.
pub fn marginals_of(spec: &DistributionSpec, problem: &Problem) -> Result<PositionMarginals> {
    spec.validate(problem)?;
    let m = problem.m();
    match spec {
        DistributionSpec::IdenticalUniform => Ok(PositionMarginals::uniform(m)),
        DistributionSpec::IdenticalExplicit(entries) => {
            let mut rows = vec![vec![Rational::zero(); m]; m];
            for (ranking, prob) in entries {
                for (t, &s) in ranking.iter().enumerate() {
                    rows[s][t] += prob;
                }
            }
            PositionMarginals::from_matrix(rows)
        }
        other => Err(Error::UnsupportedDistribution(format!(
            "position marginals need identical preferences, got {}",
            other.kind_name()
        ))),
    }
}
