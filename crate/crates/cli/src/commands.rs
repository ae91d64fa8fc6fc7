use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use envyorder::distributions::DEFAULT_SUPPORT_CAP;
use envyorder::evaluation::expected_envy_exact_with_cap;
use envyorder::verify::verify_suites;
use envyorder::{
    aggregate, count_justified_envy, expected_envy_mc, run_sd, select_scheme, solve_auto, solve_exact_with,
    solve_local_search, solve_subset_dp_with, weights_for, AggregationMethod, DistributionSpec, EvalMethod,
    PreferenceProfile, Problem, Scheme, SerialOrder, SolveResult, SolverOptions, Suite, VerifyConfig,
};
use serde::Serialize;

use crate::error::{CliError, EXIT_VERIFY_FAILED};
use crate::file::{object_indices, profile_from_map, read_text, ProblemFile, ProfileFile};
use crate::report::*;

#[derive(Debug, Parser)]
#[command(name = "envyorder", version, about = "Serial orders that minimize expected justified envy")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Find the order minimizing expected justified envy.
    Solve(SolveArgs),
    /// Run serial dictatorship on one profile and list justified envy.
    Run(RunArgs),
    /// Expected justified envy of a given order.
    Evaluate(EvaluateArgs),
    /// The six rank-aggregation orders and their expected envy.
    Baselines(BaselinesArgs),
    /// Run the randomized oracle suites.
    Verify(VerifyArgs),
    /// Print the weight table as CSV.
    Weights(WeightsArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WeightsFlag {
    Thm1,
    Prop1,
    Prop2,
    Prop3,
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SolverFlag {
    Exact,
    Dp,
    Local,
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodFlag {
    Exact,
    Mc,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Problem file (TOML), or `-` for standard input.
    pub problem: PathBuf,
    #[arg(long, value_enum, default_value_t = WeightsFlag::Auto)]
    pub weights: WeightsFlag,
    #[arg(long, value_enum, default_value_t = SolverFlag::Auto)]
    pub solver: SolverFlag,
    /// Seed for local-search restarts.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Random restarts for local search.
    #[arg(long, default_value_t = 8)]
    pub restarts: usize,
    /// Write the report here instead of standard output.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    pub problem: PathBuf,
    /// Serial order as comma-separated agent names.
    #[arg(long, value_delimiter = ',', required = true)]
    pub order: Vec<String>,
    /// One ranking of object names shared by every agent.
    #[arg(long, value_delimiter = ',', conflicts_with = "profile")]
    pub ranking: Option<Vec<String>>,
    /// TOML file with a `[profiles]` table of agent rankings.
    #[arg(long)]
    pub profile: Option<PathBuf>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    pub problem: PathBuf,
    #[arg(long, value_delimiter = ',', required = true)]
    pub order: Vec<String>,
    #[arg(long, value_enum, default_value_t = MethodFlag::Exact)]
    pub method: MethodFlag,
    /// Monte Carlo trials (required with `--method mc`).
    #[arg(long)]
    pub samples: Option<u64>,
    /// Monte Carlo seed (required with `--method mc`).
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BaselinesArgs {
    pub problem: PathBuf,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 4)]
    pub max_n: usize,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Worker threads (default: all cores). Does not change the report.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Comma-separated subset of suites: thm1, prop1, prop2, prop3,
    /// match-probability, mc-calibration.
    #[arg(long, value_delimiter = ',')]
    pub suite: Vec<String>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct WeightsArgs {
    pub problem: PathBuf,
    #[arg(long, value_enum, default_value_t = WeightsFlag::Auto)]
    pub weights: WeightsFlag,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

/// Caps read from the environment.
#[derive(Debug, Clone, Copy)]
pub struct Limits {
    pub support_cap: u128,
    pub solver: SolverOptions,
}

impl Limits {
    pub fn from_env() -> Result<Self, CliError> {
        let mut solver = SolverOptions::default();
        let mut support_cap = DEFAULT_SUPPORT_CAP;
        if let Some(v) = env_number("ENVYORDER_SUPPORT_CAP")? {
            support_cap = v;
        }
        if let Some(v) = env_number("ENVYORDER_EXACT_CAP")? {
            solver.exact_cap = v as usize;
        }
        if let Some(v) = env_number("ENVYORDER_DP_CAP")? {
            solver.dp_cap = (v as usize).min(25);
        }
        if let Some(v) = env_number("ENVYORDER_ARGMIN_CAP")? {
            solver.argmin_cap = v as usize;
        }
        Ok(Limits { support_cap, solver })
    }
}

fn env_number(key: &str) -> Result<Option<u128>, CliError> {
    match std::env::var(key) {
        Ok(v) => v
            .trim()
            .parse::<u128>()
            .map(Some)
            .map_err(|_| CliError::invalid(format!("{key} must be a non-negative integer, got {v:?}"))),
        Err(_) => Ok(None),
    }
}

/// Runs a parsed command; returns the exit code.
pub fn execute(cli: Cli) -> Result<i32, CliError> {
    let limits = Limits::from_env()?;
    match cli.command {
        Command::Solve(a) => solve(a, &limits),
        Command::Run(a) => run(a),
        Command::Evaluate(a) => evaluate(a, &limits),
        Command::Baselines(a) => baselines(a, &limits),
        Command::Verify(a) => verify(a),
        Command::Weights(a) => weights_table(a),
    }
}

fn load(path: &Path) -> Result<(Problem, DistributionSpec), CliError> {
    ProblemFile::load(path)?.to_model()
}

fn emit_json<T: Serialize>(report: &T, output: Option<&Path>) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(report).expect("reports serialize");
    text.push('\n');
    emit_text(&text, output)
}

fn emit_text(text: &str, output: Option<&Path>) -> Result<(), CliError> {
    match output {
        Some(path) => {
            std::fs::write(path, text).map_err(|e| CliError::invalid(format!("cannot write {}: {e}", path.display())))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn scheme_of(flag: WeightsFlag, problem: &Problem, spec: &DistributionSpec) -> Result<Scheme, CliError> {
    Ok(match flag {
        WeightsFlag::Thm1 => Scheme::Kemeny,
        WeightsFlag::Prop1 => Scheme::Marginal,
        WeightsFlag::Prop2 => Scheme::Independent,
        WeightsFlag::Prop3 => Scheme::Capacity,
        WeightsFlag::Auto => select_scheme(problem, spec)?,
    })
}

fn solve(a: SolveArgs, limits: &Limits) -> Result<i32, CliError> {
    let (problem, spec) = load(&a.problem)?;
    let scheme = scheme_of(a.weights, &problem, &spec)?;
    let weights = weights_for(&problem, &spec, scheme)?;
    let options = limits.solver;
    let result: SolveResult = match a.solver {
        SolverFlag::Exact => solve_exact_with(&problem, &weights, &options)?,
        SolverFlag::Dp => solve_subset_dp_with(&problem, &weights, &options)?,
        SolverFlag::Local => solve_local_search(&problem, &weights, a.seed, a.restarts)?,
        SolverFlag::Auto => solve_auto(&problem, &weights, &options, a.seed)?,
    };
    let report = SolveReport {
        command: "solve",
        distribution: spec.kind_name(),
        weights: scheme.name(),
        weight_class: weights.class().name(),
        solver: result.solver.name(),
        certified: result.optimum_count.is_some(),
        best_orders: result.best_orders.iter().map(|o| order_names(&problem, o)).collect(),
        optimum_count: result.optimum_count,
        truncated: result.truncated,
        objective: Real::exact(&result.objective),
        envy_factor: Real::exact(weights.envy_factor()),
        expected_envy: Real::exact(&result.expected_envy(&weights)),
        nodes_explored: result.nodes_explored,
    };
    emit_json(&report, a.output.as_deref())?;
    Ok(0)
}

fn run(a: RunArgs) -> Result<i32, CliError> {
    let (problem, spec) = load(&a.problem)?;
    let order = SerialOrder::from_names(&problem, &a.order)?;
    let profile = if let Some(ranking) = &a.ranking {
        let ranking = object_indices(&problem, ranking).map_err(|e| CliError::invalid(format!("--ranking: {e}")))?;
        PreferenceProfile::identical(&problem, ranking)?
    } else if let Some(path) = &a.profile {
        let file: ProfileFile = toml::from_str(&read_text(path)?)
            .map_err(|e| CliError::invalid(format!("profile file: {}", e.message().trim())))?;
        profile_from_map(&problem, &file.profiles, "profiles")?
    } else if let DistributionSpec::Fixed(profile) = spec {
        profile
    } else {
        return Err(CliError::invalid(
            "run needs preferences: pass --ranking, --profile, or use a `fixed` distribution in the problem file",
        ));
    };
    let matching = run_sd(&problem, &profile, &order)?;
    let envy = count_justified_envy(&problem, &profile, &matching);
    let report = RunReport {
        command: "run",
        order: order_names(&problem, &order),
        matching: order
            .agents()
            .iter()
            .map(|&i| Assignment {
                agent: problem.agent_name(i).to_string(),
                object: problem.object_name(matching.object_of(i)).to_string(),
            })
            .collect(),
        envy: EnvySection {
            count: envy.count(),
            triplets: envy
                .triplets
                .iter()
                .map(|t| Triplet {
                    envier: problem.agent_name(t.envier).to_string(),
                    envied: problem.agent_name(t.envied).to_string(),
                    object: problem.object_name(t.object).to_string(),
                })
                .collect(),
        },
    };
    emit_json(&report, a.output.as_deref())?;
    Ok(0)
}

fn evaluate(a: EvaluateArgs, limits: &Limits) -> Result<i32, CliError> {
    let (problem, spec) = load(&a.problem)?;
    let order = SerialOrder::from_names(&problem, &a.order)?;
    let (result, seed) = match a.method {
        MethodFlag::Exact => {
            if a.samples.is_some() || a.seed.is_some() {
                return Err(CliError::incompatible("--samples and --seed only apply to --method mc"));
            }
            (expected_envy_exact_with_cap(&problem, &order, &spec, limits.support_cap)?, None)
        }
        MethodFlag::Mc => {
            let samples = a.samples.ok_or_else(|| CliError::invalid("--method mc requires --samples"))?;
            let seed = a.seed.ok_or_else(|| CliError::invalid("--method mc requires --seed"))?;
            (expected_envy_mc(&problem, &order, &spec, samples, seed)?, Some(seed))
        }
    };
    let report = EvaluateReport {
        command: "evaluate",
        distribution: spec.kind_name(),
        order: order_names(&problem, &order),
        method: match result.method {
            EvalMethod::Exact => "exact",
            EvalMethod::MonteCarlo => "mc",
        },
        expected_envy: Real::value(&result.mean),
        standard_error: result.standard_error,
        samples: result.samples.to_string(),
        seed,
    };
    emit_json(&report, a.output.as_deref())?;
    Ok(0)
}

fn baselines(a: BaselinesArgs, limits: &Limits) -> Result<i32, CliError> {
    let (problem, spec) = load(&a.problem)?;
    let mut rows = Vec::with_capacity(AggregationMethod::ALL.len());
    let mut unavailable = None;
    for method in AggregationMethod::ALL {
        let order = aggregate(method, &problem)?;
        let expected_envy = match expected_envy_exact_with_cap(&problem, &order, &spec, limits.support_cap) {
            Ok(r) => Some(Real::value(&r.mean)),
            Err(e) => {
                unavailable.get_or_insert_with(|| e.to_string());
                None
            }
        };
        rows.push(BaselineRow { method: method.name(), order: order_names(&problem, &order), expected_envy });
    }
    let report = BaselinesReport {
        command: "baselines",
        distribution: spec.kind_name(),
        baselines: rows,
        expected_envy_unavailable: unavailable,
    };
    emit_json(&report, a.output.as_deref())?;
    Ok(0)
}

fn verify(a: VerifyArgs) -> Result<i32, CliError> {
    let threads = a.threads.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let config = VerifyConfig { max_n: a.max_n, trials: a.trials, seed: a.seed, threads };
    let suites: Vec<Suite> = if a.suite.is_empty() {
        Suite::ALL.to_vec()
    } else {
        a.suite.iter().map(|s| s.parse::<Suite>()).collect::<Result<_, _>>()?
    };
    let report = verify_suites(&config, &suites)?;
    let out = VerifyReportOut {
        command: "verify",
        config: VerifyConfigReport { max_n: config.max_n, trials: config.trials, seed: config.seed },
        passed: report.passed(),
        suites: report
            .suites
            .iter()
            .map(|s| SuiteRow {
                suite: s.suite.name(),
                passed: s.passed(),
                checks: s.checks,
                failures: s.failures,
                allowed_failures: s.allowed_failures,
                counterexample: s.counterexample.as_ref().map(|c| CounterexampleReport {
                    trial: c.trial,
                    detail: c.detail.clone(),
                    order: c.order.as_ref().map(|o| order_names(&c.problem, o)),
                    problem_file: ProblemFile::from_model(&c.problem, &c.spec).to_toml(),
                }),
            })
            .collect(),
    };
    emit_json(&out, a.output.as_deref())?;
    Ok(if report.passed() { 0 } else { EXIT_VERIFY_FAILED })
}

fn weights_table(a: WeightsArgs) -> Result<i32, CliError> {
    let (problem, spec) = load(&a.problem)?;
    let scheme = scheme_of(a.weights, &problem, &spec)?;
    let weights = weights_for(&problem, &spec, scheme)?;
    let mut text = String::from("object,earlier,later,weight,decimal\n");
    for (s, t, u, w) in weights.table() {
        let r = Real::exact(&w);
        text.push_str(&format!(
            "{},{t},{u},{},{}\n",
            problem.object_name(s),
            r.fraction.unwrap_or_default(),
            r.decimal
        ));
    }
    emit_text(&text, a.output.as_deref())?;
    Ok(0)
}
