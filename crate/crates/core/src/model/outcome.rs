use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SdgError};
use crate::model::{welfare, Instance, Welfare};

/// Non-empty, sorted, duplicate-free set of agents.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct Coalition(Vec<usize>);

impl Coalition {
    pub fn new(mut members: Vec<usize>) -> Result<Self> {
        members.sort_unstable();
        if members.is_empty() {
            return Err(SdgError::InvalidCoalition("coalition is empty".into()));
        }
        if members.windows(2).any(|w| w[0] == w[1]) {
            return Err(SdgError::InvalidCoalition(format!(
                "duplicate member in {members:?}"
            )));
        }
        Ok(Coalition(members))
    }

    pub fn singleton(i: usize) -> Self {
        Coalition(vec![i])
    }

    pub fn members(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    pub fn min(&self) -> usize {
        self.0[0]
    }

    /// This coalition with `i` added (a no-op when already present).
    pub fn with(&self, i: usize) -> Coalition {
        let mut m = self.0.clone();
        if let Err(pos) = m.binary_search(&i) {
            m.insert(pos, i);
        }
        Coalition(m)
    }

    pub fn without(&self, i: usize) -> Option<Coalition> {
        let m: Vec<usize> = self.0.iter().copied().filter(|&j| j != i).collect();
        (!m.is_empty()).then_some(Coalition(m))
    }
}

impl<'de> Deserialize<'de> for Coalition {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let v = Vec::<usize>::deserialize(deserializer)?;
        Coalition::new(v).map_err(serde::de::Error::custom)
    }
}

impl fmt::Display for Coalition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, m) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{m}")?;
        }
        write!(f, "}}")
    }
}

/// A partition of all agents into coalitions, kept in canonical order
/// (sorted by minimum member), with its social welfare cached.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Outcome {
    coalitions: Vec<Coalition>,
    welfare: Welfare,
}

/// Checks that `coalitions` partition `0..n`, reporting every offending agent.
pub fn validate_partition(n: usize, coalitions: &[Vec<usize>]) -> Result<()> {
    let mut count = vec![0usize; n];
    let mut out_of_range = Vec::new();
    for &a in coalitions.iter().flatten() {
        match count.get_mut(a) {
            Some(c) => *c += 1,
            None => out_of_range.push(a),
        }
    }
    let missing: Vec<usize> = (0..n).filter(|&a| count[a] == 0).collect();
    let duplicated: Vec<usize> = (0..n).filter(|&a| count[a] > 1).collect();
    out_of_range.sort_unstable();
    out_of_range.dedup();
    if missing.is_empty() && duplicated.is_empty() && out_of_range.is_empty() {
        Ok(())
    } else {
        Err(SdgError::InvalidOutcome {
            missing,
            duplicated,
            out_of_range,
        })
    }
}

impl Outcome {
    /// Validates, canonicalizes and evaluates a partition.
    pub fn new(instance: &Instance, coalitions: Vec<Vec<usize>>) -> Result<Self> {
        validate_partition(instance.n(), &coalitions)?;
        let mut coalitions = coalitions
            .into_iter()
            .map(Coalition::new)
            .collect::<Result<Vec<_>>>()?;
        coalitions.sort_unstable_by_key(Coalition::min);
        let mut outcome = Outcome {
            coalitions,
            welfare: Welfare::ZERO,
        };
        outcome.welfare = welfare(instance, &outcome);
        Ok(outcome)
    }

    /// Builds an outcome from a block label per agent.
    pub fn from_assignment(instance: &Instance, block_of: &[usize]) -> Result<Self> {
        if block_of.len() != instance.n() {
            return Err(SdgError::Contract(format!(
                "assignment has {} entries for {} agents",
                block_of.len(),
                instance.n()
            )));
        }
        let blocks = block_of.iter().copied().max().map_or(0, |m| m + 1);
        let mut coalitions = vec![Vec::new(); blocks];
        for (agent, &b) in block_of.iter().enumerate() {
            coalitions[b].push(agent);
        }
        coalitions.retain(|c| !c.is_empty());
        Outcome::new(instance, coalitions)
    }

    pub fn singletons(instance: &Instance) -> Self {
        Outcome::new(instance, (0..instance.n()).map(|i| vec![i]).collect())
            .expect("singletons partition every instance")
    }

    pub fn grand(instance: &Instance) -> Self {
        Outcome::new(instance, vec![(0..instance.n()).collect()])
            .expect("grand coalition partitions every instance")
    }

    pub fn coalitions(&self) -> &[Coalition] {
        &self.coalitions
    }

    pub fn welfare(&self) -> Welfare {
        self.welfare
    }

    /// Index of the coalition containing agent `i`.
    pub fn coalition_index_of(&self, i: usize) -> usize {
        self.coalitions
            .iter()
            .position(|c| c.contains(i))
            .expect("outcome covers every agent")
    }

    pub fn coalition_of(&self, i: usize) -> &Coalition {
        &self.coalitions[self.coalition_index_of(i)]
    }

    /// Block label per agent, labels numbered by coalition order.
    pub fn assignment(&self) -> Vec<usize> {
        let n = self.coalitions.iter().map(Coalition::len).sum();
        let mut out = vec![0; n];
        for (k, c) in self.coalitions.iter().enumerate() {
            for &a in c.members() {
                out[a] = k;
            }
        }
        out
    }

    pub fn to_vecs(&self) -> Vec<Vec<usize>> {
        self.coalitions
            .iter()
            .map(|c| c.members().to_vec())
            .collect()
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, c) in self.coalitions.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ") welfare {}", self.welfare)
    }
}
