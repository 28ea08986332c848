use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::model::Instance;
use crate::treewidth::elimination::best_ordering;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeKind {
    Leaf,
    Introduce(usize),
    Forget(usize),
    Join,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TdNode {
    pub kind: NodeKind,
    /// Sorted agents in the bag.
    pub bag: Vec<usize>,
    pub children: Vec<usize>,
}

/// Rooted tree of bags whose nodes are leaves, introduce, forget or join nodes,
/// with empty bags at the root and at every leaf.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NiceTreeDecomposition {
    pub nodes: Vec<TdNode>,
    pub root: usize,
}

impl NiceTreeDecomposition {
    /// Largest bag size minus one (0 for a decomposition of only empty bags).
    pub fn width(&self) -> usize {
        self.nodes
            .iter()
            .map(|n| n.bag.len())
            .max()
            .unwrap_or(0)
            .saturating_sub(1)
    }

    /// Node ids with every child before its parent.
    pub fn post_order(&self) -> Vec<usize> {
        let mut order = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![(self.root, false)];
        while let Some((x, expanded)) = stack.pop() {
            if expanded {
                order.push(x);
            } else {
                stack.push((x, true));
                for &c in self.nodes[x].children.iter().rev() {
                    stack.push((c, false));
                }
            }
        }
        order
    }

    /// `V^x` for every node: the union of the bags in the subtree below `x`.
    pub fn subtree_vertices(&self) -> Vec<BTreeSet<usize>> {
        let mut out = vec![BTreeSet::new(); self.nodes.len()];
        for x in self.post_order() {
            let mut set: BTreeSet<usize> = self.nodes[x].bag.iter().copied().collect();
            for &c in &self.nodes[x].children {
                set.extend(out[c].iter().copied());
            }
            out[x] = set;
        }
        out
    }
}

struct Builder {
    nodes: Vec<TdNode>,
}

impl Builder {
    fn push(&mut self, kind: NodeKind, bag: Vec<usize>, children: Vec<usize>) -> usize {
        self.nodes.push(TdNode {
            kind,
            bag,
            children,
        });
        self.nodes.len() - 1
    }

    fn leaf(&mut self) -> usize {
        self.push(NodeKind::Leaf, Vec::new(), Vec::new())
    }

    /// Forgets and introduces agents on top of `node` until its bag is `target`.
    fn morph(&mut self, mut node: usize, target: &[usize]) -> usize {
        let current = self.nodes[node].bag.clone();
        let mut bag = current.clone();
        for &v in current.iter().filter(|v| target.binary_search(v).is_err()) {
            bag.retain(|&u| u != v);
            node = self.push(NodeKind::Forget(v), bag.clone(), vec![node]);
        }
        for &v in target.iter().filter(|v| current.binary_search(v).is_err()) {
            let pos = bag.binary_search(&v).unwrap_err();
            bag.insert(pos, v);
            node = self.push(NodeKind::Introduce(v), bag.clone(), vec![node]);
        }
        node
    }

    fn join_all(&mut self, parts: Vec<usize>) -> usize {
        let mut iter = parts.into_iter();
        let mut acc = iter.next().expect("at least one part");
        for part in iter {
            let bag = self.nodes[acc].bag.clone();
            acc = self.push(NodeKind::Join, bag, vec![acc, part]);
        }
        acc
    }
}

/// Nice decomposition from an elimination order: each agent's bag holds it
/// and its neighbours eliminated later (in the filled graph); its parent is
/// the earliest eliminated of those neighbours.
pub fn from_ordering(instance: &Instance, order: &[usize]) -> NiceTreeDecomposition {
    let n = instance.n();
    let mut position = vec![0; n];
    for (k, &v) in order.iter().enumerate() {
        position[v] = k;
    }
    let mut adj: Vec<BTreeSet<usize>> = (0..n)
        .map(|v| instance.neighbors(v).iter().copied().collect())
        .collect();
    let mut bags: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut parent: Vec<Option<usize>> = vec![None; n];
    for &v in order {
        let later: Vec<usize> = adj[v].iter().copied().collect();
        for &a in &later {
            adj[a].remove(&v);
            for &b in &later {
                if a != b {
                    adj[a].insert(b);
                }
            }
        }
        parent[v] = later.iter().copied().min_by_key(|&u| position[u]);
        let mut bag = later;
        bag.push(v);
        bag.sort_unstable();
        bags[v] = bag;
    }
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut roots = Vec::new();
    for &v in order {
        match parent[v] {
            Some(p) => children[p].push(v),
            None => roots.push(v),
        }
    }

    let mut b = Builder { nodes: Vec::new() };
    // Post-order over the elimination forest without recursion.
    let mut built: Vec<usize> = vec![usize::MAX; n];
    let mut stack: Vec<(usize, bool)> = roots.iter().rev().map(|&r| (r, false)).collect();
    while let Some((v, expanded)) = stack.pop() {
        if !expanded {
            stack.push((v, true));
            for &c in children[v].iter().rev() {
                stack.push((c, false));
            }
            continue;
        }
        let node = if children[v].is_empty() {
            let leaf = b.leaf();
            b.morph(leaf, &bags[v])
        } else {
            let parts: Vec<usize> = children[v]
                .iter()
                .map(|&c| b.morph(built[c], &bags[v]))
                .collect();
            b.join_all(parts)
        };
        built[v] = node;
    }
    let tops: Vec<usize> = roots.iter().map(|&r| b.morph(built[r], &[])).collect();
    let root = if tops.is_empty() {
        b.leaf()
    } else {
        b.join_all(tops)
    };
    NiceTreeDecomposition {
        nodes: b.nodes,
        root,
    }
}

/// A valid nice decomposition with the best width this crate can find
/// (exact for small graphs, min-fill otherwise).
pub fn build_nice_decomposition(instance: &Instance) -> NiceTreeDecomposition {
    from_ordering(instance, &best_ordering(instance))
}

/// A broken decomposition condition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    NotATree(String),
    AgentOutOfRange { node: usize, agent: usize },
    UnsortedBag { node: usize },
    RootBagNotEmpty,
    LeafBagNotEmpty { node: usize },
    BadNode { node: usize, reason: String },
    EdgeUncovered { a: usize, b: usize },
    AgentMissing { agent: usize },
    SubtreeDisconnected { agent: usize },
    JoinCrossEdge { node: usize, a: usize, b: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NotATree(why) => write!(f, "not a rooted tree: {why}"),
            Violation::AgentOutOfRange { node, agent } => {
                write!(f, "node {node} holds unknown agent {agent}")
            }
            Violation::UnsortedBag { node } => write!(f, "bag of node {node} is not sorted"),
            Violation::RootBagNotEmpty => write!(f, "root bag is not empty"),
            Violation::LeafBagNotEmpty { node } => write!(f, "leaf {node} has a non-empty bag"),
            Violation::BadNode { node, reason } => write!(f, "node {node}: {reason}"),
            Violation::EdgeUncovered { a, b } => write!(f, "edge ({a}, {b}) is in no bag"),
            Violation::AgentMissing { agent } => write!(f, "agent {agent} is in no bag"),
            Violation::SubtreeDisconnected { agent } => {
                write!(f, "bags containing agent {agent} are not connected")
            }
            Violation::JoinCrossEdge { node, a, b } => write!(
                f,
                "join node {node}: edge ({a}, {b}) links agents forgotten in different children"
            ),
        }
    }
}

/// Checks every decomposition condition and the shape of every node,
/// returning all violations found (empty when valid).
pub fn validate_decomposition(instance: &Instance, td: &NiceTreeDecomposition) -> Vec<Violation> {
    let mut out = Vec::new();
    let count = td.nodes.len();
    if td.root >= count {
        out.push(Violation::NotATree(format!(
            "root {} out of range",
            td.root
        )));
        return out;
    }
    let mut parent: Vec<Option<usize>> = vec![None; count];
    for (x, node) in td.nodes.iter().enumerate() {
        for &c in &node.children {
            if c >= count {
                out.push(Violation::NotATree(format!(
                    "node {x} has unknown child {c}"
                )));
                return out;
            }
            if parent[c].replace(x).is_some() || c == td.root {
                out.push(Violation::NotATree(format!(
                    "node {c} has more than one parent"
                )));
                return out;
            }
        }
    }
    let reachable = td.post_order();
    if reachable.len() != count
        || parent
            .iter()
            .enumerate()
            .any(|(x, p)| p.is_none() && x != td.root)
    {
        out.push(Violation::NotATree(
            "some nodes are not reachable from the root".into(),
        ));
        return out;
    }

    let n = instance.n();
    for (x, node) in td.nodes.iter().enumerate() {
        if let Some(&agent) = node.bag.iter().find(|&&a| a >= n) {
            out.push(Violation::AgentOutOfRange { node: x, agent });
        }
        if node.bag.windows(2).any(|w| w[0] >= w[1]) {
            out.push(Violation::UnsortedBag { node: x });
        }
    }
    if !out.is_empty() {
        return out;
    }
    if !td.nodes[td.root].bag.is_empty() {
        out.push(Violation::RootBagNotEmpty);
    }
    for (x, node) in td.nodes.iter().enumerate() {
        check_node_shape(td, x, node, &mut out);
    }

    let mut covered = BTreeSet::new();
    let mut present = vec![false; n];
    for node in &td.nodes {
        for (k, &a) in node.bag.iter().enumerate() {
            present[a] = true;
            for &b in &node.bag[k + 1..] {
                covered.insert((a, b));
            }
        }
    }
    for &(a, b) in instance.edges() {
        if !covered.contains(&(a, b)) {
            out.push(Violation::EdgeUncovered { a, b });
        }
    }
    for (agent, &p) in present.iter().enumerate() {
        if !p {
            out.push(Violation::AgentMissing { agent });
        }
    }
    // Connected iff exactly one node holding the agent has a parent without it.
    let mut tops = vec![0usize; n];
    for (x, node) in td.nodes.iter().enumerate() {
        for &a in &node.bag {
            let parent_has = parent[x].is_some_and(|p| td.nodes[p].bag.binary_search(&a).is_ok());
            if !parent_has {
                tops[a] += 1;
            }
        }
    }
    for (agent, &t) in tops.iter().enumerate() {
        if t > 1 {
            out.push(Violation::SubtreeDisconnected { agent });
        }
    }

    let below = td.subtree_vertices();
    for (x, node) in td.nodes.iter().enumerate() {
        if node.kind != NodeKind::Join || node.children.len() != 2 {
            continue;
        }
        let bag: BTreeSet<usize> = node.bag.iter().copied().collect();
        let left: Vec<usize> = below[node.children[0]].difference(&bag).copied().collect();
        let right: BTreeSet<usize> = below[node.children[1]].difference(&bag).copied().collect();
        for &a in &left {
            for &b in instance.neighbors(a) {
                if right.contains(&b) {
                    out.push(Violation::JoinCrossEdge { node: x, a, b });
                }
            }
        }
    }
    out
}

fn check_node_shape(td: &NiceTreeDecomposition, x: usize, node: &TdNode, out: &mut Vec<Violation>) {
    let bad = |reason: String| Violation::BadNode { node: x, reason };
    let child_bag = |k: usize| &td.nodes[node.children[k]].bag;
    match node.kind {
        NodeKind::Leaf => {
            if !node.children.is_empty() {
                out.push(bad("leaf has children".into()));
            }
            if !node.bag.is_empty() {
                out.push(Violation::LeafBagNotEmpty { node: x });
            }
        }
        NodeKind::Introduce(v) | NodeKind::Forget(v) => {
            if node.children.len() != 1 {
                out.push(bad(format!(
                    "expected one child, found {}",
                    node.children.len()
                )));
                return;
            }
            let (big, small) = match node.kind {
                NodeKind::Introduce(_) => (&node.bag, child_bag(0)),
                _ => (child_bag(0), &node.bag),
            };
            let mut expected = small.clone();
            let fresh = expected.binary_search(&v).is_err();
            if fresh {
                expected.insert(expected.binary_search(&v).unwrap_err(), v);
            }
            if !fresh || &expected != big {
                let what = if matches!(node.kind, NodeKind::Introduce(_)) {
                    "introduce"
                } else {
                    "forget"
                };
                out.push(bad(format!(
                    "{what} of agent {v} does not match the child bag"
                )));
            }
        }
        NodeKind::Join => {
            if node.children.len() != 2 {
                out.push(bad(format!(
                    "join needs two children, found {}",
                    node.children.len()
                )));
                return;
            }
            if child_bag(0) != &node.bag || child_bag(1) != &node.bag {
                out.push(bad("join children bags differ from the join bag".into()));
            }
        }
    }
    if node.kind != NodeKind::Leaf && node.children.is_empty() {
        out.push(bad("a node without children must be a leaf".into()));
    }
}

#[derive(Serialize, Deserialize)]
struct NodeJson {
    id: usize,
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    agent: Option<usize>,
    bag: Vec<usize>,
    children: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct DecompositionJson {
    nodes: Vec<NodeJson>,
    root: usize,
}

impl Serialize for NiceTreeDecomposition {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let nodes = self
            .nodes
            .iter()
            .enumerate()
            .map(|(id, n)| {
                let (kind, agent) = match n.kind {
                    NodeKind::Leaf => ("leaf", None),
                    NodeKind::Introduce(v) => ("introduce", Some(v)),
                    NodeKind::Forget(v) => ("forget", Some(v)),
                    NodeKind::Join => ("join", None),
                };
                NodeJson {
                    id,
                    kind: kind.into(),
                    agent,
                    bag: n.bag.clone(),
                    children: n.children.clone(),
                }
            })
            .collect();
        DecompositionJson {
            nodes,
            root: self.root,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for NiceTreeDecomposition {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let raw = DecompositionJson::deserialize(deserializer)?;
        let count = raw.nodes.len();
        let mut nodes: Vec<Option<TdNode>> = vec![None; count];
        for n in raw.nodes {
            if n.id >= count {
                return Err(D::Error::custom(format!("node id {} out of range", n.id)));
            }
            let agent = |kind: &str| {
                n.agent
                    .ok_or_else(|| D::Error::custom(format!("{kind} node {} needs an agent", n.id)))
            };
            let kind = match n.kind.as_str() {
                "leaf" => NodeKind::Leaf,
                "join" => NodeKind::Join,
                "introduce" => NodeKind::Introduce(agent("introduce")?),
                "forget" => NodeKind::Forget(agent("forget")?),
                other => return Err(D::Error::custom(format!("unknown node kind {other:?}"))),
            };
            if nodes[n.id].is_some() {
                return Err(D::Error::custom(format!("duplicate node id {}", n.id)));
            }
            nodes[n.id] = Some(TdNode {
                kind,
                bag: n.bag,
                children: n.children,
            });
        }
        Ok(NiceTreeDecomposition {
            nodes: nodes
                .into_iter()
                .map(|n| n.expect("ids are a permutation"))
                .collect(),
            root: raw.root,
        })
    }
}
