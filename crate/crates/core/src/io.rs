//! Instance and outcome file formats.
//!
//! Instances are JSON (`{"agents", "edges", "scoring", "open", "labels"}`) or
//! edge-list text: an `n m` header followed by one `a b` pair per line. Edge
//! lists whose endpoints are not all integers below `n` are read as agent
//! names, numbered in order of first appearance.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Result, SdgError};
use crate::model::{Instance, Outcome, ScoringVector, Welfare};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub agents: usize,
    pub edges: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scoring: Option<Vec<i64>>,
    #[serde(default)]
    pub open: bool,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub labels: BTreeMap<usize, String>,
    /// Decision threshold `b` of generated reduction instances.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<i64>,
    /// Triangle cover of the graph a reduction instance was built from.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub triangles: Option<Vec<[usize; 3]>>,
}

impl InstanceFile {
    pub fn from_instance(instance: &Instance) -> Self {
        InstanceFile {
            agents: instance.n(),
            edges: instance.edges().iter().map(|&(a, b)| [a, b]).collect(),
            scoring: Some(instance.scoring().entries().to_vec()),
            open: instance.is_open(),
            labels: instance.labels().clone(),
            threshold: None,
            triangles: None,
        }
    }
}

/// Settings supplied outside the file; they take precedence over the file's.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct InstanceOverrides {
    pub scoring: Option<Vec<i64>>,
    pub open: Option<bool>,
}

/// Reads an instance in either format, choosing by the first character.
pub fn parse_instance(text: &str, overrides: &InstanceOverrides) -> Result<Instance> {
    if text.trim_start().starts_with('{') {
        parse_instance_json(text, overrides)
    } else {
        parse_edge_list(text, overrides)
    }
}

pub fn parse_instance_json(text: &str, overrides: &InstanceOverrides) -> Result<Instance> {
    let file: InstanceFile =
        serde_json::from_str(text).map_err(|e| SdgError::Parse(format!("instance JSON: {e}")))?;
    let scoring = overrides
        .scoring
        .clone()
        .or(file.scoring)
        .ok_or_else(|| SdgError::Parse("instance has no scoring vector".into()))?;
    let open = overrides.open.unwrap_or(file.open);
    let edges = file.edges.iter().map(|e| (e[0], e[1]));
    Instance::new(file.agents, edges, ScoringVector::new(scoring)?, open)?.with_labels(file.labels)
}

pub fn parse_edge_list(text: &str, overrides: &InstanceOverrides) -> Result<Instance> {
    let scoring = overrides
        .scoring
        .clone()
        .ok_or_else(|| SdgError::Parse("edge-list input needs a scoring vector".into()))?;
    let mut lines = text
        .lines()
        .map(str::trim)
        .enumerate()
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (_, header) = lines
        .next()
        .ok_or_else(|| SdgError::Parse("empty edge list".into()))?;
    let header: Vec<&str> = header.split_whitespace().collect();
    let parse_count = |s: &str| {
        s.parse::<usize>()
            .map_err(|_| SdgError::Parse(format!("edge-list header: {s:?} is not a count")))
    };
    let [n, m] = header[..] else {
        return Err(SdgError::Parse("edge-list header must be `n m`".into()));
    };
    let (n, m) = (parse_count(n)?, parse_count(m)?);
    let mut pairs: Vec<(&str, &str)> = Vec::with_capacity(m);
    for (lineno, line) in lines {
        let tokens: Vec<&str> = line.split_whitespace().collect();
        let [a, b] = tokens[..] else {
            return Err(SdgError::Parse(format!(
                "line {}: expected two endpoints",
                lineno + 1
            )));
        };
        pairs.push((a, b));
    }
    if pairs.len() != m {
        return Err(SdgError::Parse(format!(
            "header announces {m} edges, found {}",
            pairs.len()
        )));
    }
    let numeric = pairs
        .iter()
        .flat_map(|&(a, b)| [a, b])
        .all(|t| t.parse::<usize>().is_ok_and(|v| v < n));
    let mut labels = BTreeMap::new();
    let edges: Vec<(usize, usize)> = if numeric {
        pairs
            .iter()
            .map(|&(a, b)| (a.parse().expect("checked"), b.parse().expect("checked")))
            .collect()
    } else {
        let mut ids: HashMap<&str, usize> = HashMap::new();
        let mut edges = Vec::with_capacity(pairs.len());
        for &(a, b) in &pairs {
            let mut id = |t| {
                let next = ids.len();
                *ids.entry(t).or_insert(next)
            };
            let ia = id(a);
            edges.push((ia, id(b)));
        }
        if ids.len() > n {
            return Err(SdgError::Parse(format!(
                "{} distinct agents named, header says {n}",
                ids.len()
            )));
        }
        labels.extend(ids.into_iter().map(|(name, i)| (i, name.to_string())));
        edges
    };
    let open = overrides.open.unwrap_or(false);
    Instance::new(n, edges, ScoringVector::new(scoring)?, open)?.with_labels(labels)
}

pub fn instance_to_json(instance: &Instance) -> serde_json::Value {
    serde_json::to_value(InstanceFile::from_instance(instance)).expect("instance serializes")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutcomeFile {
    pub coalitions: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub welfare: Option<Welfare>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<Vec<String>>>,
}

impl OutcomeFile {
    /// Outcome with its welfare, plus agent names when the instance has any.
    pub fn from_outcome(instance: &Instance, outcome: &Outcome) -> Self {
        let coalitions = outcome.to_vecs();
        let labels = (!instance.labels().is_empty()).then(|| {
            coalitions
                .iter()
                .map(|c| c.iter().map(|&a| instance.label(a)).collect())
                .collect()
        });
        OutcomeFile {
            coalitions,
            welfare: Some(outcome.welfare()),
            labels,
        }
    }
}

/// Reads an outcome and checks it against `instance`. A stated welfare must
/// equal the recomputed one.
pub fn parse_outcome(text: &str, instance: &Instance) -> Result<Outcome> {
    let file: OutcomeFile =
        serde_json::from_str(text).map_err(|e| SdgError::Parse(format!("outcome JSON: {e}")))?;
    let outcome = Outcome::new(instance, file.coalitions)?;
    if let Some(stated) = file.welfare {
        if stated != outcome.welfare() {
            return Err(SdgError::Parse(format!(
                "stated welfare {stated} but the outcome has welfare {}",
                outcome.welfare()
            )));
        }
    }
    Ok(outcome)
}

pub fn outcome_to_json(instance: &Instance, outcome: &Outcome) -> serde_json::Value {
    serde_json::to_value(OutcomeFile::from_outcome(instance, outcome)).expect("outcome serializes")
}
