//! JSON report shapes. Every real number is a [`Real`]: an exact fraction
//! when one exists, plus a decimal.

use envyorder::exact::{fraction_string, to_f64};
use envyorder::{Problem, Rational, SerialOrder, Value};
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Real {
    pub fraction: Option<String>,
    pub decimal: f64,
}

impl Real {
    pub fn exact(r: &Rational) -> Self {
        Real { fraction: Some(fraction_string(r)), decimal: to_f64(r) }
    }

    pub fn value(v: &Value) -> Self {
        Real { fraction: v.fraction(), decimal: v.to_f64() }
    }

    pub fn float(v: f64) -> Self {
        Real { fraction: None, decimal: v }
    }
}

pub fn order_names(problem: &Problem, order: &SerialOrder) -> Vec<String> {
    order.names(problem).into_iter().map(str::to_string).collect()
}

#[derive(Debug, Serialize)]
pub struct SolveReport {
    pub command: &'static str,
    pub distribution: &'static str,
    pub weights: &'static str,
    pub weight_class: &'static str,
    pub solver: &'static str,
    /// Whether the orders are proven optimal for the objective.
    pub certified: bool,
    pub best_orders: Vec<Vec<String>>,
    pub optimum_count: Option<u64>,
    pub truncated: bool,
    /// Weighted disagreement sum under the chosen weights.
    pub objective: Real,
    /// Factor turning the objective into expected justified envy.
    pub envy_factor: Real,
    pub expected_envy: Real,
    pub nodes_explored: u64,
}

#[derive(Debug, Serialize)]
pub struct Assignment {
    pub agent: String,
    pub object: String,
}

#[derive(Debug, Serialize)]
pub struct Triplet {
    pub envier: String,
    pub envied: String,
    pub object: String,
}

#[derive(Debug, Serialize)]
pub struct EnvySection {
    pub count: usize,
    pub triplets: Vec<Triplet>,
}

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub command: &'static str,
    pub order: Vec<String>,
    /// In serial-order sequence.
    pub matching: Vec<Assignment>,
    pub envy: EnvySection,
}

#[derive(Debug, Serialize)]
pub struct EvaluateReport {
    pub command: &'static str,
    pub distribution: &'static str,
    pub order: Vec<String>,
    pub method: &'static str,
    pub expected_envy: Real,
    pub standard_error: f64,
    /// Support size (exact) or number of trials (Monte Carlo), as a string
    /// because supports can exceed 64 bits.
    pub samples: String,
    pub seed: Option<u64>,
}

#[derive(Debug, Serialize)]
pub struct BaselineRow {
    pub method: &'static str,
    pub order: Vec<String>,
    pub expected_envy: Option<Real>,
}

#[derive(Debug, Serialize)]
pub struct BaselinesReport {
    pub command: &'static str,
    pub distribution: &'static str,
    pub baselines: Vec<BaselineRow>,
    /// Why expected envy is missing, when it is.
    pub expected_envy_unavailable: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct VerifyConfigReport {
    pub max_n: usize,
    pub trials: usize,
    pub seed: u64,
}

#[derive(Debug, Serialize)]
pub struct CounterexampleReport {
    pub trial: usize,
    pub detail: String,
    pub order: Option<Vec<String>>,
    /// Problem file (TOML) that replays the failure.
    pub problem_file: String,
}

#[derive(Debug, Serialize)]
pub struct SuiteRow {
    pub suite: &'static str,
    pub passed: bool,
    pub checks: usize,
    pub failures: usize,
    pub allowed_failures: usize,
    pub counterexample: Option<CounterexampleReport>,
}

#[derive(Debug, Serialize)]
pub struct VerifyReportOut {
    pub command: &'static str,
    pub config: VerifyConfigReport,
    pub passed: bool,
    pub suites: Vec<SuiteRow>,
}
