//! Weights converted to a machine number type for the search loops.
//!
//! Rational weights are multiplied by the least common multiple of their
//! denominators and stored as `i128`, which keeps comparisons exact. If that
//! would overflow, or the matrix is generated on demand, the search falls
//! back to `f64` with ties declared at 1e-12 relative tolerance.

use std::fmt::Debug;
use std::ops::{Add, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};

use crate::exact::{close, to_f64, Rational};
use crate::problem::Problem;
use crate::weights::{WeightClass, WeightMatrix};

pub(crate) trait Cost:
    Copy + PartialOrd + Add<Output = Self> + Sub<Output = Self> + Send + Sync + Debug + 'static
{
    fn zero() -> Self;
    fn tied(self, other: Self) -> bool;
    fn scale(self, k: u32) -> Self;

    /// Strictly below `other`, beyond tie tolerance.
    fn better(self, other: Self) -> bool {
        self < other && !self.tied(other)
    }

    fn min_of(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }
}

impl Cost for i128 {
    fn zero() -> Self {
        0
    }

    fn tied(self, other: Self) -> bool {
        self == other
    }

    fn scale(self, k: u32) -> Self {
        self * i128::from(k)
    }
}

impl Cost for f64 {
    fn zero() -> Self {
        0.0
    }

    fn tied(self, other: Self) -> bool {
        close(self, other)
    }

    fn scale(self, k: u32) -> Self {
        self * f64::from(k)
    }
}

/// Weight cells in a search-friendly number type, plus the priority
/// comparisons the objective needs.
pub(crate) struct Kernel<C> {
    pub(crate) n: usize,
    pub(crate) m: usize,
    cells: Cells<C>,
    /// `beats[s][a * n + b]`: agent `a` outranks agent `b` at object `s`.
    beats: Vec<Vec<bool>>,
}

enum Cells<C> {
    Constant(C),
    Earlier(Vec<C>),
    Pairwise(Vec<C>),
    Dense(Vec<C>),
    Generated(Box<dyn Fn(usize, usize, usize) -> C + Send + Sync>),
}

/// Either number type, chosen by [`Kernel::build`].
pub(crate) enum AnyKernel {
    Exact(Kernel<i128>),
    Float(Kernel<f64>),
}

impl AnyKernel {
    pub(crate) fn build(problem: &Problem, weights: &WeightMatrix) -> AnyKernel {
        match integer_scale(weights) {
            Some(scale) => AnyKernel::Exact(Kernel::new(problem, weights, move |r: &Rational| {
                (r * &scale).to_integer().to_i128().expect("scaled weight fits")
            })),
            None => AnyKernel::Float(Kernel::new(problem, weights, |r: &Rational| to_f64(r))),
        }
    }
}

/// Common denominator that turns every cell into an `i128` whose sum over
/// all cells stays far from overflow, if one exists.
fn integer_scale(weights: &WeightMatrix) -> Option<Rational> {
    if !weights.is_dense() {
        return None;
    }
    let table = weights.table();
    let mut lcm = BigInt::one();
    for (_, _, _, w) in &table {
        lcm = lcm.lcm(w.denom());
        if lcm.bits() > 96 {
            return None;
        }
    }
    let scale = Rational::from_integer(lcm);
    let total: Rational = table.iter().map(|(_, _, _, w)| w * &scale).sum();
    let limit = Rational::from_integer(BigInt::one() << 100);
    (total < limit).then_some(scale)
}

impl<C: Cost> Kernel<C> {
    fn new<F>(problem: &Problem, weights: &WeightMatrix, convert: F) -> Self
    where
        F: Fn(&Rational) -> C + Send + Sync + 'static,
    {
        let (n, m) = (weights.n(), weights.m());
        let cells = match weights.class() {
            WeightClass::Constant => Cells::Constant(if n >= 2 { convert(&weights.get(0, 0, 1)) } else { C::zero() }),
            WeightClass::EarlierPosition => {
                let mut v = Vec::with_capacity(m * n);
                for s in 0..m {
                    for t in 0..n {
                        v.push(if t + 1 < n { convert(&weights.get(s, t, t + 1)) } else { C::zero() });
                    }
                }
                Cells::Earlier(v)
            }
            WeightClass::PairwisePosition => {
                let mut v = vec![C::zero(); n * n];
                for t in 0..n {
                    for u in t + 1..n {
                        v[t * n + u] = convert(&weights.get(0, t, u));
                    }
                }
                Cells::Pairwise(v)
            }
            WeightClass::Full if weights.is_dense() => {
                let mut v = vec![C::zero(); m * n * n];
                for s in 0..m {
                    for t in 0..n {
                        for u in t + 1..n {
                            v[(s * n + t) * n + u] = convert(&weights.get(s, t, u));
                        }
                    }
                }
                Cells::Dense(v)
            }
            WeightClass::Full => {
                let w = weights.clone();
                Cells::Generated(Box::new(move |s, t, u| convert(&w.get(s, t, u))))
            }
        };
        let beats = (0..m)
            .map(|s| {
                let mut row = vec![false; n * n];
                for a in 0..n {
                    for b in 0..n {
                        row[a * n + b] = problem.outranks(s, a, b);
                    }
                }
                row
            })
            .collect();
        Kernel { n, m, cells, beats }
    }

    #[inline]
    pub(crate) fn weight(&self, s: usize, t: usize, u: usize) -> C {
        match &self.cells {
            Cells::Constant(c) => *c,
            Cells::Earlier(v) => v[s * self.n + t],
            Cells::Pairwise(v) => v[t * self.n + u],
            Cells::Dense(v) => v[(s * self.n + t) * self.n + u],
            Cells::Generated(f) => f(s, t, u),
        }
    }

    /// `w(s, t)` for position-decomposable classes.
    #[inline]
    pub(crate) fn earlier_weight(&self, s: usize, t: usize) -> C {
        match &self.cells {
            Cells::Constant(c) => *c,
            Cells::Earlier(v) => v[s * self.n + t],
            _ => unreachable!("earlier_weight on a non-decomposable class"),
        }
    }

    #[inline]
    pub(crate) fn beats(&self, s: usize, a: usize, b: usize) -> bool {
        self.beats[s][a * self.n + b]
    }

    /// Cost of agent `a` at position `t` preceding agent `b` at `u`.
    #[inline]
    pub(crate) fn pair_cost(&self, t: usize, u: usize, a: usize, b: usize) -> C {
        let mut total = C::zero();
        for s in 0..self.m {
            if self.beats(s, b, a) {
                total = total + self.weight(s, t, u);
            }
        }
        total
    }

    pub(crate) fn objective(&self, order: &[usize]) -> C {
        let mut total = C::zero();
        for t in 0..order.len() {
            for u in t + 1..order.len() {
                total = total + self.pair_cost(t, u, order[t], order[u]);
            }
        }
        total
    }
}
