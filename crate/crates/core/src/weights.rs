//! Weight matrices for the weighted pairwise-disagreement objective.
//!
//! A weight `w(s, t, t')` (0-based positions, `t < t'`) prices the event
//! that the agent at position `t'` outranks the agent at position `t` at
//! object `s`. Each builder returns the probability that the agent at `t`
//! is matched to `s` *and* the agent at `t'` envies that match, under the
//! corresponding preference model, so the objective is the expected number
//! of justified-envy cases (up to [`WeightMatrix::envy_factor`]).

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::distributions::PositionMarginals;
use crate::error::{Error, Result};
use crate::exact::{ratio, Rational};
use crate::problem::Problem;

/// Full weights are stored densely up to this many agents and generated
/// per cell above it.
pub const DEFAULT_DENSE_CAP: usize = 64;

/// Which coordinates a weight depends on. Declared by the builder; solvers
/// pick fast paths from it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WeightClass {
    Constant,
    /// Depends on `(s, t)` only.
    EarlierPosition,
    /// Depends on `(t, t')` only.
    PairwisePosition,
    Full,
}

impl WeightClass {
    pub fn name(self) -> &'static str {
        match self {
            WeightClass::Constant => "constant",
            WeightClass::EarlierPosition => "earlier_position",
            WeightClass::PairwisePosition => "pairwise_position",
            WeightClass::Full => "full",
        }
    }

    /// The subset dynamic program is exact for these classes.
    pub fn is_decomposable(self) -> bool {
        matches!(self, WeightClass::Constant | WeightClass::EarlierPosition)
    }
}

/// The preference model a matrix was derived for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    /// Identical, uniformly drawn preferences; unit capacities.
    Kemeny,
    /// Identical preferences with known position marginals.
    Marginal,
    /// Independent uniform preferences; unit capacities.
    Independent,
    /// Identical uniform preferences; arbitrary capacities.
    Capacity,
    /// Hand-built matrix.
    Custom,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::Kemeny => "thm1",
            Scheme::Marginal => "prop1",
            Scheme::Independent => "prop2",
            Scheme::Capacity => "prop3",
            Scheme::Custom => "custom",
        }
    }
}

type CellFn = dyn Fn(usize, usize, usize) -> Rational + Send + Sync;

#[derive(Clone)]
enum Cells {
    Constant(Rational),
    /// `[s * n + t]`
    Earlier(Vec<Rational>),
    /// `[t * n + t']`
    Pairwise(Vec<Rational>),
    /// `[(s * n + t) * n + t']`
    Dense(Vec<Rational>),
    Generated(Arc<CellFn>),
}

impl fmt::Debug for Cells {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cells::Constant(c) => write!(f, "Constant({c})"),
            Cells::Earlier(v) => write!(f, "Earlier({} cells)", v.len()),
            Cells::Pairwise(v) => write!(f, "Pairwise({} cells)", v.len()),
            Cells::Dense(v) => write!(f, "Dense({} cells)", v.len()),
            Cells::Generated(_) => f.write_str("Generated"),
        }
    }
}

/// Nonnegative weights `w(s, t, t')` for every object and position pair.
#[derive(Debug, Clone)]
pub struct WeightMatrix {
    n: usize,
    m: usize,
    class: WeightClass,
    scheme: Scheme,
    envy_factor: Rational,
    cells: Cells,
}

impl WeightMatrix {
    /// The same weight for every cell.
    pub fn constant(n: usize, m: usize, weight: Rational) -> Result<Self> {
        if weight.is_negative() {
            return Err(Error::invalid("weights must be nonnegative"));
        }
        Ok(WeightMatrix {
            n,
            m,
            class: WeightClass::Constant,
            scheme: Scheme::Custom,
            envy_factor: Rational::one(),
            cells: Cells::Constant(weight),
        })
    }

    /// Builds a matrix from a cell function and a declared class. Every cell
    /// is checked for nonnegativity and for consistency with `class`.
    pub fn from_fn<F>(n: usize, m: usize, class: WeightClass, f: F) -> Result<Self>
    where
        F: Fn(usize, usize, usize) -> Rational,
    {
        let mut dense = Vec::with_capacity(m * n * n);
        for s in 0..m {
            for t in 0..n {
                for u in 0..n {
                    dense.push(if t < u { f(s, t, u) } else { Rational::zero() });
                }
            }
        }
        if dense.iter().any(Signed::is_negative) {
            return Err(Error::invalid("weights must be nonnegative"));
        }
        let at = |s: usize, t: usize, u: usize| &dense[(s * n + t) * n + u];
        let pairs = || (0..m).flat_map(move |s| (0..n).flat_map(move |t| (t + 1..n).map(move |u| (s, t, u))));
        let consistent = match class {
            WeightClass::Full => true,
            WeightClass::Constant => pairs().all(|(s, t, u)| at(s, t, u) == at(0, 0, 1)),
            WeightClass::EarlierPosition => pairs().all(|(s, t, u)| at(s, t, u) == at(s, t, t + 1)),
            WeightClass::PairwisePosition => pairs().all(|(s, t, u)| at(s, t, u) == at(0, t, u)),
        };
        if !consistent {
            return Err(Error::invalid(format!("cell values are inconsistent with declared class {class:?}")));
        }
        let cells = match class {
            WeightClass::Constant if n >= 2 => Cells::Constant(at(0, 0, 1).clone()),
            WeightClass::Constant => Cells::Constant(Rational::zero()),
            WeightClass::EarlierPosition => Cells::Earlier(
                (0..m)
                    .flat_map(|s| (0..n).map(move |t| (s, t)))
                    .map(|(s, t)| if t + 1 < n { at(s, t, t + 1).clone() } else { Rational::zero() })
                    .collect(),
            ),
            WeightClass::PairwisePosition => Cells::Pairwise(
                (0..n).flat_map(|t| (0..n).map(move |u| (t, u))).map(|(t, u)| at(0, t, u).clone()).collect(),
            ),
            WeightClass::Full => Cells::Dense(dense.clone()),
        };
        Ok(WeightMatrix { n, m, class, scheme: Scheme::Custom, envy_factor: Rational::one(), cells })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn class(&self) -> WeightClass {
        self.class
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    /// Multiplying an objective value by this factor gives the expected
    /// number of justified-envy cases (1 unless a constant was dropped).
    pub fn envy_factor(&self) -> &Rational {
        &self.envy_factor
    }

    /// Whether cells are materialized rather than generated on demand.
    pub fn is_dense(&self) -> bool {
        !matches!(self.cells, Cells::Generated(_))
    }

    /// `w(s, t, t')`, 0-based positions with `t < t'`.
    pub fn get(&self, s: usize, t: usize, later: usize) -> Rational {
        debug_assert!(t < later && later < self.n && s < self.m);
        match &self.cells {
            Cells::Constant(c) => c.clone(),
            Cells::Earlier(v) => v[s * self.n + t].clone(),
            Cells::Pairwise(v) => v[t * self.n + later].clone(),
            Cells::Dense(v) => v[(s * self.n + t) * self.n + later].clone(),
            Cells::Generated(f) => f(s, t, later),
        }
    }

    /// Multiplies every weight by a positive factor. The argmin over serial
    /// orders is unchanged.
    pub fn scaled(&self, factor: &Rational) -> Result<Self> {
        if !factor.is_positive() {
            return Err(Error::invalid("scale factor must be positive"));
        }
        let mul = |v: &[Rational]| v.iter().map(|x| x * factor).collect();
        let cells = match &self.cells {
            Cells::Constant(c) => Cells::Constant(c * factor),
            Cells::Earlier(v) => Cells::Earlier(mul(v)),
            Cells::Pairwise(v) => Cells::Pairwise(mul(v)),
            Cells::Dense(v) => Cells::Dense(mul(v)),
            Cells::Generated(f) => {
                let f = Arc::clone(f);
                let factor = factor.clone();
                Cells::Generated(Arc::new(move |s, t, u| f(s, t, u) * &factor))
            }
        };
        Ok(WeightMatrix { cells, envy_factor: &self.envy_factor / factor, scheme: Scheme::Custom, ..self.clone() })
    }

    /// Every cell as `(object, t, t', weight)` with 1-based positions.
    pub fn table(&self) -> Vec<(usize, usize, usize, Rational)> {
        let mut rows = Vec::with_capacity(self.m * self.n * self.n.saturating_sub(1) / 2);
        for s in 0..self.m {
            for t in 0..self.n {
                for u in t + 1..self.n {
                    rows.push((s, t + 1, u + 1, self.get(s, t, u)));
                }
            }
        }
        rows
    }
}

/// Constant weights `1/n`: identical, uniformly drawn preferences with unit
/// capacities. The objective is the Kendall-tau sum scaled by the match
/// probability `1/n`.
pub fn kemeny_weights(problem: &Problem) -> Result<WeightMatrix> {
    if !problem.is_unit() {
        return Err(Error::IncompatibleScheme(format!(
            "constant weights need unit capacities and m = n (got m = {}, n = {}); use the capacity-aware builder",
            problem.m(),
            problem.n()
        )));
    }
    let n = problem.n();
    Ok(WeightMatrix {
        n,
        m: n,
        class: WeightClass::Constant,
        scheme: Scheme::Kemeny,
        envy_factor: Rational::one(),
        cells: Cells::Constant(ratio(1, n as i64)),
    })
}

/// `w(s, t, t') = p(s, t)`: identical preferences whose common ranking puts
/// object `s` at position `t` with probability `p(s, t)`.
pub fn marginal_weights(marginals: &PositionMarginals) -> WeightMatrix {
    let n = marginals.size();
    let cells = (0..n).flat_map(|s| (0..n).map(move |t| (s, t))).map(|(s, t)| marginals.get(s, t).clone()).collect();
    WeightMatrix {
        n,
        m: n,
        class: WeightClass::EarlierPosition,
        scheme: Scheme::Marginal,
        envy_factor: Rational::one(),
        cells: Cells::Earlier(cells),
    }
}

/// Envy probability between positions under independent uniform
/// preferences with unit capacities, 1-based `earlier < later`:
///
/// `p(t', t) = (1/|S_t|) (1 + Σ_{k=1}^{t'-t-1} C(t'-t-1, k) k! / Π_{i=1}^{k} |S_{t+i}|)`
///
/// where `|S_t| = n - t + 1` objects remain when position `t` picks.
pub fn independent_envy_probability(n: usize, earlier: usize, later: usize) -> Rational {
    assert!(1 <= earlier && earlier < later && later <= n, "positions out of range");
    let remaining = |t: usize| BigInt::from(n - t + 1);
    let gap = later - earlier - 1;
    let mut sum = Rational::one();
    // C(gap, k) k! = gap! / (gap - k)!, accumulated incrementally
    let mut falling = BigInt::one();
    let mut product = BigInt::one();
    for k in 1..=gap {
        falling *= BigInt::from(gap - k + 1);
        product *= remaining(earlier + k);
        sum += Rational::new(falling.clone(), product.clone());
    }
    sum / Rational::from_integer(remaining(earlier))
}

/// Independent uniform preferences, unit capacities, `m = n`. Weights are
/// the envy probabilities `p(t', t)`; the match probability `1/n` common to
/// every cell is left out (see [`WeightMatrix::envy_factor`]).
pub fn independent_weights(n: usize) -> Result<WeightMatrix> {
    if n < 1 {
        return Err(Error::invalid("need at least one agent"));
    }
    let mut cells = vec![Rational::zero(); n * n];
    for t in 0..n {
        for u in t + 1..n {
            cells[t * n + u] = independent_envy_probability(n, t + 1, u + 1);
        }
    }
    Ok(WeightMatrix {
        n,
        m: n,
        class: WeightClass::PairwisePosition,
        scheme: Scheme::Independent,
        envy_factor: ratio(1, n as i64),
        cells: Cells::Pairwise(cells),
    })
}

/// Checks a problem against the independent-preference builder's domain.
pub fn independent_weights_for(problem: &Problem) -> Result<WeightMatrix> {
    if !problem.is_unit() {
        return Err(Error::IncompatibleScheme(
            "independent-preference weights are only derived for unit capacities with m = n".into(),
        ));
    }
    independent_weights(problem.n())
}

/// Per-object tables for the capacity-aware weights.
///
/// `mass[s][c]` is the probability that object `s` sits at some rank `k` of
/// the common ranking with the `k - 1` objects above it holding exactly `c`
/// seats in total, for `c < n`. Subsets are counted by (size, seat total)
/// with a knapsack-style dynamic program instead of being enumerated.
#[derive(Debug, Clone)]
pub struct CapacityTables {
    n: usize,
    capacities: Vec<usize>,
    mass: Vec<Vec<Rational>>,
}

impl CapacityTables {
    pub fn new(problem: &Problem) -> Result<Self> {
        let n = problem.n();
        let m = problem.m();
        let caps: Vec<usize> = problem.capacities().iter().map(|&q| q as usize).collect();
        let binom = binomial_row(m - 1)?;
        let mut mass = Vec::with_capacity(m);
        for s in 0..m {
            // count[j][c]: subsets of the other objects with j members and c seats (c < n)
            let mut count = vec![vec![0u128; n]; m];
            count[0][0] = 1;
            for (other, &q) in caps.iter().enumerate() {
                if other == s {
                    continue;
                }
                for j in (0..m - 1).rev() {
                    for c in (0..n.saturating_sub(q)).rev() {
                        let add = count[j][c];
                        if add != 0 {
                            let slot = &mut count[j + 1][c + q];
                            *slot = slot.checked_add(add).ok_or_else(overflow)?;
                        }
                    }
                }
            }
            let mut row = vec![Rational::zero(); n];
            for (j, counts) in count.iter().enumerate() {
                let denom = BigInt::from(m) * BigInt::from(binom[j]);
                for (c, &k) in counts.iter().enumerate() {
                    if k != 0 {
                        row[c] += Rational::new(BigInt::from(k), denom.clone());
                    }
                }
            }
            mass.push(row);
        }
        Ok(CapacityTables { n, capacities: caps, mass })
    }

    /// Weight of object `s` for 0-based positions `t < later`:
    /// Σ over seat totals `c` with `c < t+1 ≤ c + q_s` and `c + q_s < later+1`.
    pub fn weight(&self, s: usize, t: usize, later: usize) -> Rational {
        let q = self.capacities[s];
        let lo = (t + 1).saturating_sub(q);
        let mut total = Rational::zero();
        for c in lo..=t {
            if c + q <= later {
                total += &self.mass[s][c];
            }
        }
        total
    }

    /// `P[s(t) = s]` for 0-based position `t`, from the same tables.
    pub fn match_probability(&self, s: usize, t: usize) -> Rational {
        let q = self.capacities[s];
        let lo = (t + 1).saturating_sub(q);
        (lo..=t.min(self.n - 1)).map(|c| &self.mass[s][c]).sum()
    }
}

fn overflow() -> Error {
    Error::invalid("too many objects for exact subset counting")
}

/// `C(len, 0..=len)`.
fn binomial_row(len: usize) -> Result<Vec<u128>> {
    let mut row = vec![1u128; len + 1];
    for k in 1..=len {
        row[k] = row[k - 1].checked_mul((len - k + 1) as u128).map(|v| v / k as u128).ok_or_else(overflow)?;
    }
    Ok(row)
}

/// Capacity-aware weights under identical uniform preferences:
/// `w(s, t, t')` is the probability that the agent at `t` takes a seat at
/// `s` and `s` is full before position `t'`.
pub fn capacity_weights(problem: &Problem) -> Result<WeightMatrix> {
    capacity_weights_with_cap(problem, DEFAULT_DENSE_CAP)
}

pub fn capacity_weights_with_cap(problem: &Problem, dense_cap: usize) -> Result<WeightMatrix> {
    let tables = CapacityTables::new(problem)?;
    let (n, m) = (problem.n(), problem.m());
    let cells = if n <= dense_cap {
        let mut dense = vec![Rational::zero(); m * n * n];
        for s in 0..m {
            for t in 0..n {
                for u in t + 1..n {
                    dense[(s * n + t) * n + u] = tables.weight(s, t, u);
                }
            }
        }
        Cells::Dense(dense)
    } else {
        Cells::Generated(Arc::new(move |s, t, u| tables.weight(s, t, u)))
    };
    Ok(WeightMatrix { n, m, class: WeightClass::Full, scheme: Scheme::Capacity, envy_factor: Rational::one(), cells })
}
