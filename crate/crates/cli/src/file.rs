//! TOML problem files.
//!
//! ```toml
//! agents = ["1", "2", "3"]
//! objects = [
//!     { name = "a", capacity = 1 },
//!     { name = "b", capacity = 1 },
//!     { name = "c", capacity = 1 },
//! ]
//!
//! [priorities]
//! a = ["2", "3", "1"]
//! b = ["2", "1", "3"]
//! c = ["2", "1", "3"]
//!
//! [distribution]
//! kind = "identical_uniform"
//! ```
//!
//! `distribution.kind` is one of `identical_uniform`, `identical_explicit`
//! (with `rankings = [{ ranking = [...], prob = "1/2" }, ...]`),
//! `independent_uniform`, or `fixed` (with a `profiles` table mapping every
//! agent to its ranking). Omitting `[distribution]` means identical uniform.

use std::collections::BTreeMap;
use std::fs;
use std::io::Read;
use std::path::Path;

use envyorder::exact::{fraction_string, from_f64_decimal, parse_rational};
use envyorder::{DistributionSpec, PreferenceProfile, Problem, Rational};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub agents: Vec<String>,
    pub objects: Vec<ObjectEntry>,
    pub priorities: BTreeMap<String, Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distribution: Option<DistributionEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectEntry {
    pub name: String,
    #[serde(default = "one")]
    pub capacity: u32,
}

fn one() -> u32 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistributionEntry {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rankings: Option<Vec<RankingEntry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profiles: Option<BTreeMap<String, Vec<String>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RankingEntry {
    pub ranking: Vec<String>,
    pub prob: Prob,
}

/// A probability written as `"1/3"`, `1`, or `0.25`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Prob {
    Text(String),
    Integer(i64),
    Decimal(f64),
}

impl Prob {
    fn to_rational(&self) -> Result<Rational, CliError> {
        match self {
            Prob::Text(t) => Ok(parse_rational(t)?),
            Prob::Integer(i) => Ok(Rational::from_integer((*i).into())),
            Prob::Decimal(d) => Ok(from_f64_decimal(*d)?),
        }
    }
}

/// Standalone preference profile for `run --profile`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileFile {
    pub profiles: BTreeMap<String, Vec<String>>,
}

/// Reads a file, or standard input for `-`.
pub fn read_text(path: &Path) -> Result<String, CliError> {
    if path.as_os_str() == "-" {
        let mut text = String::new();
        std::io::stdin()
            .read_to_string(&mut text)
            .map_err(|e| CliError::invalid(format!("cannot read standard input: {e}")))?;
        return Ok(text);
    }
    fs::read_to_string(path).map_err(|e| CliError::invalid(format!("cannot read {}: {e}", path.display())))
}

impl ProblemFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::invalid(format!("problem file: {}", e.message().trim())))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        Self::parse(&read_text(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("problem files always serialize")
    }

    /// Builds the problem and distribution, naming the offending field on
    /// failure.
    pub fn to_model(&self) -> Result<(Problem, DistributionSpec), CliError> {
        for key in self.priorities.keys() {
            if !self.objects.iter().any(|o| &o.name == key) {
                return Err(CliError::invalid(format!("priorities: `{key}` is not a listed object")));
            }
        }
        let mut priorities = Vec::with_capacity(self.objects.len());
        for o in &self.objects {
            let ranking = self
                .priorities
                .get(&o.name)
                .ok_or_else(|| CliError::invalid(format!("priorities: object `{}` has no priority ranking", o.name)))?;
            priorities.push(ranking.clone());
        }
        let objects: Vec<(String, u32)> = self.objects.iter().map(|o| (o.name.clone(), o.capacity)).collect();
        let problem = Problem::from_names(&self.agents, &objects, &priorities)?;
        let spec = match &self.distribution {
            None => DistributionSpec::IdenticalUniform,
            Some(d) => d.to_spec(&problem)?,
        };
        spec.validate(&problem)?;
        Ok((problem, spec))
    }

    /// Canonical file for a problem and distribution.
    pub fn from_model(problem: &Problem, spec: &DistributionSpec) -> Self {
        let names = |ranking: &[usize]| ranking.iter().map(|&s| problem.object_name(s).to_string()).collect();
        let distribution = match spec {
            DistributionSpec::IdenticalUniform => DistributionEntry::bare("identical_uniform"),
            DistributionSpec::IndependentUniform => DistributionEntry::bare("independent_uniform"),
            DistributionSpec::IdenticalExplicit(entries) => DistributionEntry {
                rankings: Some(
                    entries
                        .iter()
                        .map(|(r, p)| RankingEntry { ranking: names(r), prob: Prob::Text(fraction_string(p)) })
                        .collect(),
                ),
                ..DistributionEntry::bare("identical_explicit")
            },
            DistributionSpec::Fixed(profile) => DistributionEntry {
                profiles: Some(
                    (0..problem.n()).map(|i| (problem.agent_name(i).to_string(), names(profile.ranking(i)))).collect(),
                ),
                ..DistributionEntry::bare("fixed")
            },
        };
        ProblemFile {
            agents: problem.agents().to_vec(),
            objects: (0..problem.m())
                .map(|s| ObjectEntry { name: problem.object_name(s).to_string(), capacity: problem.capacity(s) })
                .collect(),
            priorities: (0..problem.m())
                .map(|s| {
                    let ranking = problem.priority(s).iter().map(|&i| problem.agent_name(i).to_string()).collect();
                    (problem.object_name(s).to_string(), ranking)
                })
                .collect(),
            distribution: Some(distribution),
        }
    }
}

impl DistributionEntry {
    fn bare(kind: &str) -> Self {
        DistributionEntry { kind: kind.to_string(), rankings: None, profiles: None }
    }

    fn to_spec(&self, problem: &Problem) -> Result<DistributionSpec, CliError> {
        let forbid = |present: bool, field: &str| {
            if present {
                Err(CliError::invalid(format!("distribution.{field} is not used by kind `{}`", self.kind)))
            } else {
                Ok(())
            }
        };
        match self.kind.as_str() {
            "identical_uniform" | "independent_uniform" => {
                forbid(self.rankings.is_some(), "rankings")?;
                forbid(self.profiles.is_some(), "profiles")?;
                Ok(if self.kind == "identical_uniform" {
                    DistributionSpec::IdenticalUniform
                } else {
                    DistributionSpec::IndependentUniform
                })
            }
            "identical_explicit" => {
                forbid(self.profiles.is_some(), "profiles")?;
                let rankings = self
                    .rankings
                    .as_ref()
                    .ok_or_else(|| CliError::invalid("distribution.rankings is required for kind `identical_explicit`"))?;
                let mut entries = Vec::with_capacity(rankings.len());
                for (k, entry) in rankings.iter().enumerate() {
                    let ranking = object_indices(problem, &entry.ranking)
                        .map_err(|e| CliError::invalid(format!("distribution.rankings[{k}].ranking: {e}")))?;
                    let prob = entry
                        .prob
                        .to_rational()
                        .map_err(|e| CliError::invalid(format!("distribution.rankings[{k}].prob: {}", e.message)))?;
                    entries.push((ranking, prob));
                }
                Ok(DistributionSpec::IdenticalExplicit(entries))
            }
            "fixed" => {
                forbid(self.rankings.is_some(), "rankings")?;
                let profiles = self
                    .profiles
                    .as_ref()
                    .ok_or_else(|| CliError::invalid("distribution.profiles is required for kind `fixed`"))?;
                Ok(DistributionSpec::Fixed(profile_from_map(problem, profiles, "distribution.profiles")?))
            }
            other => Err(CliError::invalid(format!(
                "distribution.kind `{other}` is not one of identical_uniform, identical_explicit, independent_uniform, fixed"
            ))),
        }
    }
}

/// Object names to indices; the list must be a permutation of the objects.
pub fn object_indices(problem: &Problem, names: &[String]) -> Result<Vec<usize>, String> {
    let mut out = Vec::with_capacity(names.len());
    for name in names {
        let s = problem.object_index(name).ok_or_else(|| format!("unknown object `{name}`"))?;
        if out.contains(&s) {
            return Err(format!("object `{name}` listed twice"));
        }
        out.push(s);
    }
    if out.len() != problem.m() {
        let missing = (0..problem.m()).find(|s| !out.contains(s)).expect("some object is missing");
        return Err(format!("missing object `{}`", problem.object_name(missing)));
    }
    Ok(out)
}

/// Agent name → ranking map into a profile covering every agent.
pub fn profile_from_map(
    problem: &Problem,
    map: &BTreeMap<String, Vec<String>>,
    field: &str,
) -> Result<PreferenceProfile, CliError> {
    for key in map.keys() {
        if problem.agent_index(key).is_none() {
            return Err(CliError::invalid(format!("{field}: `{key}` is not a listed agent")));
        }
    }
    let mut rankings = Vec::with_capacity(problem.n());
    for i in 0..problem.n() {
        let name = problem.agent_name(i);
        let names =
            map.get(name).ok_or_else(|| CliError::invalid(format!("{field}: agent `{name}` has no ranking")))?;
        rankings.push(object_indices(problem, names).map_err(|e| CliError::invalid(format!("{field}.{name}: {e}")))?);
    }
    Ok(PreferenceProfile::new(problem, rankings)?)
}
