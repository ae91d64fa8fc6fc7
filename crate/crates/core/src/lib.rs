//! Choosing the serial order for serial dictatorship so that the expected
//! number of justified-envy triplets is as small as possible.
//!
//! Objects have priority rankings over agents and seat counts; agents have
//! random preferences over objects. For several preference distributions
//! the expected envy of an order is a weighted count of pairwise
//! disagreements between the order and the priority rankings, so finding the
//! best order is a weighted linear ordering problem.
//!
//! * [`problem`] and [`mechanism`]: instances, serial dictatorship, envy.
//! * [`distributions`]: preference distributions, sampling, enumeration.
//! * [`weights`]: disagreement weights for each distribution family.
//! * [`solver`]: exact and heuristic minimization over orders.
//! * [`aggregation`]: classical rank-aggregation baselines.
//! * [`evaluation`] and [`verify`]: exact and simulated expected envy and
//!   the brute-force oracles that check everything else.
//!
//! ```
//! use envyorder::{solve_exact, kemeny_weights, Problem};
//!
//! // three objects a, b, c; priorities listed best first (0-based agents)
//! let problem = Problem::unit(vec![vec![1, 2, 0], vec![1, 0, 2], vec![1, 0, 2]]).unwrap();
//! let result = solve_exact(&problem, &kemeny_weights(&problem).unwrap()).unwrap();
//! assert_eq!(result.best().agents(), &[1, 0, 2]);
//! ```

pub mod aggregation;
pub mod distributions;
pub mod error;
pub mod evaluation;
pub mod exact;
pub mod mechanism;
pub mod perm;
pub mod problem;
pub mod solver;
pub mod verify;
pub mod weights;

pub use aggregation::{aggregate, AggregationMethod};
pub use distributions::{
    enumerate_support, marginals_of, sample_profile, trial_rng, DistributionSpec, PositionMarginals, Support,
};
pub use error::{Error, Result};
pub use evaluation::{
    auto_weights, envy_probability_oracle, expected_envy_exact, expected_envy_mc, match_probability_check,
    oracle_optimal_orders, select_scheme, weights_for, EnvyProbabilities, EvalMethod, ExpectationResult,
    MatchFrequencies, OracleReport,
};
pub use exact::{Rational, Value};
pub use mechanism::{count_justified_envy, non_dominated_agents, run_sd, EnvyReport, EnvyTriplet};
pub use problem::{Matching, PreferenceProfile, Problem, SerialOrder};
pub use solver::{
    evaluate_objective, known_ranking_order, solve_auto, solve_exact, solve_exact_with, solve_local_search,
    solve_subset_dp, solve_subset_dp_with, SolveResult, SolverKind, SolverOptions,
};
pub use verify::{verify, Suite, SuiteReport, VerifyConfig, VerifyReport};
pub use weights::{
    capacity_weights, independent_weights, kemeny_weights, marginal_weights, Scheme, WeightClass, WeightMatrix,
};
