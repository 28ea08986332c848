use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use crate::error::{Result, SdgError};
use crate::model::Welfare;

/// Shortest-path length inside a coalition; `Infinite` when no path exists.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Distance {
    Finite(u32),
    Infinite,
}

impl Distance {
    pub fn finite(self) -> Option<u32> {
        match self {
            Distance::Finite(d) => Some(d),
            Distance::Infinite => None,
        }
    }
}

impl fmt::Display for Distance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Distance::Finite(d) => write!(f, "{d}"),
            Distance::Infinite => f.write_str("inf"),
        }
    }
}

/// Non-increasing integer scores `s_1 >= s_2 >= ... >= s_delta`, indexed by distance.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ScoringVector {
    entries: Vec<i64>,
}

impl ScoringVector {
    pub fn new(entries: Vec<i64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(SdgError::InvalidScoring("needs at least one entry".into()));
        }
        if let Some(pos) = entries.windows(2).position(|w| w[1] > w[0]) {
            return Err(SdgError::InvalidScoring(format!(
                "entries must be non-increasing, but s{} = {} < s{} = {}",
                pos + 1,
                entries[pos],
                pos + 2,
                entries[pos + 1]
            )));
        }
        if entries[0] <= 0 {
            log::warn!(
                "s1 = {} <= 0: the all-singletons outcome is optimal and stable",
                entries[0]
            );
        }
        Ok(ScoringVector { entries })
    }

    pub fn entries(&self) -> &[i64] {
        &self.entries
    }

    /// The distance horizon (length of the vector).
    pub fn delta(&self) -> usize {
        self.entries.len()
    }

    pub fn s1(&self) -> i64 {
        self.entries[0]
    }

    /// Entry `s_a` for `1 <= a <= delta`.
    pub fn get(&self, a: usize) -> Option<i64> {
        a.checked_sub(1).and_then(|i| self.entries.get(i).copied())
    }

    pub fn last(&self) -> i64 {
        *self.entries.last().expect("non-empty")
    }
}

/// A score-based social distance game: a simple undirected network on agents
/// `0..n` together with a scoring vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    n: usize,
    edges: Vec<(usize, usize)>,
    adj: Vec<Vec<usize>>,
    scoring: ScoringVector,
    open: bool,
    labels: BTreeMap<usize, String>,
}

impl Instance {
    /// Builds an instance, rejecting self-loops, duplicate edges and
    /// out-of-range endpoints.
    pub fn new(
        n: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
        scoring: ScoringVector,
        open: bool,
    ) -> Result<Self> {
        if n == 0 {
            return Err(SdgError::InvalidInstance(
                "at least one agent is required".into(),
            ));
        }
        let mut seen = BTreeSet::new();
        for (a, b) in edges {
            if a >= n || b >= n {
                return Err(SdgError::InvalidInstance(format!(
                    "edge ({a}, {b}) has an endpoint outside 0..{n}"
                )));
            }
            if a == b {
                return Err(SdgError::InvalidInstance(format!("self-loop at agent {a}")));
            }
            if !seen.insert((a.min(b), a.max(b))) {
                return Err(SdgError::InvalidInstance(format!(
                    "duplicate edge ({a}, {b})"
                )));
            }
        }
        let edges: Vec<(usize, usize)> = seen.into_iter().collect();
        let mut adj = vec![Vec::new(); n];
        for &(a, b) in &edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        Ok(Instance {
            n,
            edges,
            adj,
            scoring,
            open,
            labels: BTreeMap::new(),
        })
    }

    pub fn with_labels(mut self, labels: BTreeMap<usize, String>) -> Result<Self> {
        if let Some(&bad) = labels.keys().find(|&&k| k >= self.n) {
            return Err(SdgError::InvalidInstance(format!(
                "label for unknown agent {bad}"
            )));
        }
        self.labels = labels;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Edges as `(a, b)` with `a < b`, sorted.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adj[i]
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adj[a].binary_search(&b).is_ok()
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adj[i].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn scoring(&self) -> &ScoringVector {
        &self.scoring
    }

    pub fn is_open(&self) -> bool {
        self.open
    }

    pub fn labels(&self) -> &BTreeMap<usize, String> {
        &self.labels
    }

    /// Display name of an agent: its label when one was loaded, else its id.
    pub fn label(&self, i: usize) -> String {
        self.labels
            .get(&i)
            .cloned()
            .unwrap_or_else(|| i.to_string())
    }

    /// Same network and mode, different scoring vector.
    pub fn with_scoring(&self, scoring: ScoringVector) -> Instance {
        Instance {
            scoring,
            ..self.clone()
        }
    }

    pub fn with_open(&self, open: bool) -> Instance {
        Instance {
            open,
            ..self.clone()
        }
    }

    /// Score contributed by an agent at distance `d`.
    ///
    /// Closed mode: `s_d` up to the horizon, `NegInf` beyond it. Open mode
    /// clamps finite distances beyond the horizon to `s_delta`. Unreachable
    /// agents are inadmissible in both modes.
    pub fn score(&self, d: Distance) -> Result<Welfare> {
        match d {
            Distance::Finite(0) => Err(SdgError::Contract("score of distance 0".into())),
            Distance::Finite(d) => Ok(self.score_at(d)),
            Distance::Infinite => Ok(Welfare::NegInf),
        }
    }

    /// `score` for a finite distance known to be at least 1.
    pub(crate) fn score_at(&self, d: u32) -> Welfare {
        debug_assert!(d >= 1);
        let delta = self.scoring.delta();
        match self.scoring.get(d as usize) {
            Some(v) => Welfare::Finite(v),
            None if self.open => {
                debug_assert!(d as usize > delta);
                Welfare::Finite(self.scoring.last())
            }
            None => Welfare::NegInf,
        }
    }

    /// Score for an optional distance (`None` meaning unreachable).
    pub(crate) fn score_opt(&self, d: Option<u32>) -> Welfare {
        d.map_or(Welfare::NegInf, |d| self.score_at(d))
    }

    /// Connected components, each sorted, ordered by minimum agent.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.n];
        let mut out = Vec::new();
        for start in 0..self.n {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            let mut comp = vec![start];
            let mut queue = VecDeque::from([start]);
            while let Some(v) = queue.pop_front() {
                for &w in &self.adj[v] {
                    if !seen[w] {
                        seen[w] = true;
                        comp.push(w);
                        queue.push_back(w);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.components().len() == 1
    }

    /// The game restricted to `agents` (sorted, distinct), relabelled
    /// `0..agents.len()` in the given order.
    pub fn induced(&self, agents: &[usize]) -> Instance {
        let mut index = vec![usize::MAX; self.n];
        for (k, &a) in agents.iter().enumerate() {
            index[a] = k;
        }
        let edges = self
            .edges
            .iter()
            .filter(|&&(a, b)| index[a] != usize::MAX && index[b] != usize::MAX)
            .map(|&(a, b)| (index[a], index[b]));
        let labels = agents
            .iter()
            .enumerate()
            .filter_map(|(k, a)| self.labels.get(a).map(|l| (k, l.clone())))
            .collect();
        Instance::new(agents.len(), edges, self.scoring.clone(), self.open)
            .expect("induced subgraph of a valid instance is valid")
            .with_labels(labels)
            .expect("labels remapped in range")
    }
}
