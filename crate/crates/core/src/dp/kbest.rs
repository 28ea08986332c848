//! Lazy enumeration of derivations in descending welfare, in the style of
//! Huang and Chiang's k-best parsing: each record keeps a frontier of
//! (derivation, child ranks) candidates and expands the successors of a
//! candidate only once it has been taken.

use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, HashMap, HashSet};

use super::{Derivation, NodeTable, NO_CHILD};
use crate::treewidth::{NiceTreeDecomposition, NodeKind};

#[derive(Debug, PartialEq, Eq)]
struct Candidate {
    value: i64,
    deriv: u32,
    ranks: [usize; 2],
}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.value, Reverse(self.deriv), Reverse(self.ranks)).cmp(&(
            other.value,
            Reverse(other.deriv),
            Reverse(other.ranks),
        ))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Default)]
struct Lazy {
    found: Vec<(i64, u32, [usize; 2])>,
    heap: BinaryHeap<Candidate>,
    seen: HashSet<(u32, [usize; 2])>,
    started: bool,
    expanded: usize,
}

pub(crate) struct KBest<'a> {
    tables: &'a [NodeTable],
    td: &'a NiceTreeDecomposition,
    lazy: Vec<HashMap<u32, Lazy>>,
}

impl<'a> KBest<'a> {
    pub fn new(tables: &'a [NodeTable], td: &'a NiceTreeDecomposition) -> Self {
        KBest {
            tables,
            td,
            lazy: (0..tables.len()).map(|_| HashMap::new()).collect(),
        }
    }

    fn arity(&self, x: usize) -> usize {
        match self.td.nodes[x].kind {
            NodeKind::Leaf => 0,
            NodeKind::Introduce(_) | NodeKind::Forget(_) => 1,
            NodeKind::Join => 2,
        }
    }

    fn candidate_value(&mut self, x: usize, d: Derivation, ranks: [usize; 2]) -> Option<i64> {
        let mut value = d.delta;
        for (pos, child_rec) in [d.left, d.right].into_iter().enumerate() {
            if child_rec == NO_CHILD {
                continue;
            }
            let child = self.td.nodes[x].children[pos];
            value += self.value(child, child_rec, ranks[pos])?;
        }
        Some(value)
    }

    /// Welfare of the `k`-th best derivation (0-based) of record `rid` at
    /// node `x`, or `None` when it has fewer than `k + 1` derivations.
    pub fn value(&mut self, x: usize, rid: u32, k: usize) -> Option<i64> {
        let mut lazy = self.lazy[x].remove(&rid).unwrap_or_default();
        let rec = &self.tables[x].records[rid as usize];
        while lazy.found.len() <= k {
            if !lazy.started {
                lazy.started = true;
                for (di, &d) in rec.all.iter().enumerate() {
                    lazy.seen.insert((di as u32, [0, 0]));
                    if let Some(value) = self.candidate_value(x, d, [0, 0]) {
                        lazy.heap.push(Candidate {
                            value,
                            deriv: di as u32,
                            ranks: [0, 0],
                        });
                    }
                }
            } else if lazy.expanded < lazy.found.len() {
                let (_, di, ranks) = lazy.found[lazy.expanded];
                lazy.expanded += 1;
                for pos in 0..self.arity(x) {
                    let mut next = ranks;
                    next[pos] += 1;
                    if !lazy.seen.insert((di, next)) {
                        continue;
                    }
                    if let Some(value) = self.candidate_value(x, rec.all[di as usize], next) {
                        lazy.heap.push(Candidate {
                            value,
                            deriv: di,
                            ranks: next,
                        });
                    }
                }
            } else {
                match lazy.heap.pop() {
                    Some(c) => lazy.found.push((c.value, c.deriv, c.ranks)),
                    None => break,
                }
            }
        }
        let out = lazy.found.get(k).map(|f| f.0);
        self.lazy[x].insert(rid, lazy);
        out
    }

    /// The `k`-th best derivation of a record and the ranks it uses in its
    /// children; available once `value(x, rid, k)` has returned it.
    pub fn derivation(&self, x: usize, rid: u32, k: usize) -> Option<(Derivation, [usize; 2])> {
        let (_, di, ranks) = *self.lazy[x].get(&rid)?.found.get(k)?;
        Some((self.tables[x].records[rid as usize].all[di as usize], ranks))
    }
}
