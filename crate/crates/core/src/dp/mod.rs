//! Dynamic program over a nice tree decomposition for welfare maximization
//! with a cap on coalition size.
//!
//! A record at node `x` describes the coalitions of a partial outcome on the
//! agents `V^x` of the subtree below `x` that still contain bag agents. Each
//! such coalition is stored as its [`CoalitionTopology`]; coalitions without
//! bag agents are complete and have been credited to the record's welfare.

mod kbest;
pub mod topology;

use std::collections::HashMap;

use crate::bounds::{effective_size_cap, SizeCap};
use crate::error::{Result, SdgError};
use crate::model::{Instance, Outcome, Welfare};
use crate::solve::{solve_by_components, trivial_singletons, SolveMode, SolveResult};
use crate::stability::is_nash_stable;
use crate::treewidth::{
    build_nice_decomposition, validate_decomposition, NiceTreeDecomposition, NodeKind,
};

pub use topology::{canonical_order, CoalitionTopology, MAX_TOPOLOGY_SIZE};

/// Most candidate outcomes examined by the Nash-stability filter before the
/// solver gives up.
pub const NS_CANDIDATE_LIMIT: u64 = 1_000_000;

/// Record key: one topology per coalition meeting the bag, ordered by the
/// smallest labeled agent.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DpKey {
    blocks: Vec<CoalitionTopology>,
}

impl DpKey {
    fn new(mut blocks: Vec<CoalitionTopology>) -> Self {
        blocks.sort_by_key(|b| b.labeled()[0]);
        DpKey { blocks }
    }

    pub fn blocks(&self) -> &[CoalitionTopology] {
        &self.blocks
    }

    /// The partition of the bag induced by the key.
    pub fn bag_partition(&self) -> Vec<Vec<usize>> {
        self.blocks.iter().map(|b| b.labeled().to_vec()).collect()
    }

    /// Canonical byte string of the whole key.
    pub fn canon_key(&self) -> Vec<u8> {
        let mut key = (self.blocks.len() as u32).to_le_bytes().to_vec();
        for b in &self.blocks {
            let k = b.canon_key();
            key.extend((k.len() as u32).to_le_bytes());
            key.extend(k);
        }
        key
    }
}

const NO_CHILD: u32 = u32::MAX;

/// One way of producing a record from child records.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Derivation {
    /// Welfare credited at this node.
    pub delta: i64,
    pub left: u32,
    pub right: u32,
}

#[derive(Debug, Clone)]
pub(crate) struct Record {
    pub key: DpKey,
    pub value: i64,
    pub count: u64,
    pub best: Derivation,
    /// Every derivation; kept only when candidates must be enumerated.
    pub all: Vec<Derivation>,
}

#[derive(Debug, Default)]
pub(crate) struct NodeTable {
    pub records: Vec<Record>,
    index: HashMap<DpKey, u32>,
}

impl NodeTable {
    fn offer(&mut self, key: DpKey, value: i64, count: u64, deriv: Derivation, keep_all: bool) {
        if let Some(&idx) = self.index.get(&key) {
            let rec = &mut self.records[idx as usize];
            if value > rec.value {
                rec.value = value;
                rec.count = count;
                rec.best = deriv;
            } else if value == rec.value {
                rec.count = rec.count.saturating_add(count);
            }
            if keep_all {
                rec.all.push(deriv);
            }
            return;
        }
        self.index.insert(key.clone(), self.records.len() as u32);
        self.records.push(Record {
            key,
            value,
            count,
            best: deriv,
            all: if keep_all { vec![deriv] } else { Vec::new() },
        });
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }
}

/// Size statistics of a finished run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DpStats {
    pub cap: usize,
    /// Records per decomposition node.
    pub records: Vec<usize>,
    pub bag_sizes: Vec<usize>,
    /// `|V^x|` per node.
    pub subtree_sizes: Vec<usize>,
}

impl DpStats {
    pub fn total_records(&self) -> u64 {
        self.records.iter().map(|&r| r as u64).sum()
    }

    pub fn max_records(&self) -> usize {
        self.records.iter().copied().max().unwrap_or(0)
    }

    /// Upper bound on the records at `node`: every record has a distinct
    /// witness partition of `V^x` into blocks of at most `cap` agents.
    pub fn witness_bound(&self, node: usize) -> u128 {
        capped_partitions(self.subtree_sizes[node], self.cap)
    }

    /// Structural bound on the records at `node`: a partition of the bag
    /// times one topology on at most `cap` vertices per block.
    pub fn key_space_bound(&self, node: usize) -> u128 {
        key_space_bound(self.bag_sizes[node], self.cap)
    }
}

/// Set partitions of `m` elements with every block of size at most `cap`.
pub fn capped_partitions(m: usize, cap: usize) -> u128 {
    let mut binom = vec![vec![0u128; m + 1]; m + 1];
    for i in 0..=m {
        binom[i][0] = 1;
        for j in 1..=i {
            binom[i][j] = binom[i - 1][j - 1].saturating_add(binom[i - 1][j]);
        }
    }
    let mut p = vec![0u128; m + 1];
    p[0] = 1;
    for i in 1..=m {
        // block containing the first element has size k
        p[i] = (1..=cap.min(i)).fold(0u128, |acc, k| {
            acc.saturating_add(binom[i - 1][k - 1].saturating_mul(p[i - k]))
        });
    }
    p[m]
}

/// `Bell(bag) * (cap * 2^(cap choose 2))^bag`, saturating.
pub fn key_space_bound(bag: usize, cap: usize) -> u128 {
    let bell = capped_partitions(bag, bag.max(1));
    let edge_bits = cap * cap.saturating_sub(1) / 2;
    let per_block = if edge_bits >= 120 {
        u128::MAX
    } else {
        (cap as u128).saturating_mul(1u128 << edge_bits)
    };
    (0..bag).fold(bell, |acc, _| acc.saturating_mul(per_block))
}

/// Filled tables of one run of the program.
#[derive(Debug)]
pub struct DpRun<'a> {
    instance: &'a Instance,
    td: &'a NiceTreeDecomposition,
    mode: SolveMode,
    cap: usize,
    tables: Vec<NodeTable>,
}

/// Runs the program with a resolved cap `1 <= cap`. `td` must be a valid nice
/// tree decomposition of `instance`.
pub fn run_dp<'a>(
    instance: &'a Instance,
    mode: SolveMode,
    cap: usize,
    td: &'a NiceTreeDecomposition,
) -> Result<DpRun<'a>> {
    if cap < 1 {
        return Err(SdgError::Contract("size cap must be at least 1".into()));
    }
    let cap = cap.min(instance.n());
    if cap > MAX_TOPOLOGY_SIZE {
        return Err(SdgError::LimitExceeded {
            what: "dp size cap",
            actual: cap,
            limit: MAX_TOPOLOGY_SIZE,
        });
    }
    let violations = validate_decomposition(instance, td);
    if !violations.is_empty() {
        let text: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
        return Err(SdgError::InvalidDecomposition(text.join("; ")));
    }
    let require_ir = mode != SolveMode::Wf;
    let keep_all = mode == SolveMode::WfNs;
    let subtree = td.subtree_vertices();
    let mut tables: Vec<NodeTable> = (0..td.nodes.len()).map(|_| NodeTable::default()).collect();
    for x in td.post_order() {
        let node = &td.nodes[x];
        let mut table = NodeTable::default();
        match node.kind {
            NodeKind::Leaf => {
                let deriv = Derivation {
                    delta: 0,
                    left: NO_CHILD,
                    right: NO_CHILD,
                };
                table.offer(DpKey::new(Vec::new()), 0, 1, deriv, keep_all);
            }
            NodeKind::Introduce(v) => {
                let child = node.children[0];
                if let Some(&u) = subtree[child]
                    .iter()
                    .find(|&&u| !td.nodes[child].bag.contains(&u) && instance.has_edge(u, v))
                {
                    return Err(SdgError::InvalidDecomposition(format!(
                        "introduced agent {v} is adjacent to forgotten agent {u}"
                    )));
                }
                for (ci, rec) in tables[child].records.iter().enumerate() {
                    let deriv = Derivation {
                        delta: 0,
                        left: ci as u32,
                        right: NO_CHILD,
                    };
                    let mut blocks = rec.key.blocks.clone();
                    blocks.push(CoalitionTopology::singleton(v));
                    table.offer(DpKey::new(blocks), rec.value, rec.count, deriv, keep_all);
                    for bi in 0..rec.key.blocks.len() {
                        if rec.key.blocks[bi].size() + 1 > cap {
                            continue;
                        }
                        let mut blocks = rec.key.blocks.clone();
                        blocks[bi] = blocks[bi].introduce(v, instance);
                        table.offer(DpKey::new(blocks), rec.value, rec.count, deriv, keep_all);
                    }
                }
            }
            NodeKind::Forget(v) => {
                let child = node.children[0];
                for (ci, rec) in tables[child].records.iter().enumerate() {
                    let mut blocks = rec.key.blocks.clone();
                    let bi = blocks
                        .iter()
                        .position(|b| b.labeled().contains(&v))
                        .ok_or_else(|| {
                            SdgError::Internal(format!("agent {v} missing from record"))
                        })?;
                    let forgotten = blocks[bi].forget(v);
                    let mut delta = 0;
                    if forgotten.labeled().is_empty() {
                        match finalize(&forgotten, instance, require_ir) {
                            Some(w) => delta = w,
                            None => continue,
                        }
                        blocks.remove(bi);
                    } else {
                        blocks[bi] = forgotten;
                    }
                    let deriv = Derivation {
                        delta,
                        left: ci as u32,
                        right: NO_CHILD,
                    };
                    table.offer(
                        DpKey::new(blocks),
                        rec.value + delta,
                        rec.count,
                        deriv,
                        keep_all,
                    );
                }
            }
            NodeKind::Join => {
                let (l, r) = (node.children[0], node.children[1]);
                let mut by_partition: HashMap<Vec<Vec<usize>>, Vec<u32>> = HashMap::new();
                for (ri, rec) in tables[r].records.iter().enumerate() {
                    by_partition
                        .entry(rec.key.bag_partition())
                        .or_default()
                        .push(ri as u32);
                }
                for (li, lrec) in tables[l].records.iter().enumerate() {
                    let Some(matches) = by_partition.get(&lrec.key.bag_partition()) else {
                        continue;
                    };
                    'right: for &ri in matches {
                        let rrec = &tables[r].records[ri as usize];
                        let mut blocks = Vec::with_capacity(lrec.key.blocks.len());
                        for (a, b) in lrec.key.blocks.iter().zip(&rrec.key.blocks) {
                            if a.size() + b.anon_count() > cap {
                                continue 'right;
                            }
                            blocks.push(a.glue(b));
                        }
                        let deriv = Derivation {
                            delta: 0,
                            left: li as u32,
                            right: ri,
                        };
                        table.offer(
                            DpKey::new(blocks),
                            lrec.value + rrec.value,
                            lrec.count.saturating_mul(rrec.count),
                            deriv,
                            keep_all,
                        );
                    }
                }
            }
        }
        log::trace!("dp node {x}: {} records", table.len());
        tables[x] = table;
    }
    Ok(DpRun {
        instance,
        td,
        mode,
        cap,
        tables,
    })
}

/// Welfare of a complete coalition, or `None` when it is inadmissible
/// (disconnected, some pair beyond the horizon, or some member below zero
/// when `require_ir`).
fn finalize(t: &CoalitionTopology, instance: &Instance, require_ir: bool) -> Option<i64> {
    if !t.is_connected() {
        return None;
    }
    let mut total = 0i64;
    for u in t.utilities(instance) {
        let u = u.finite()?;
        if require_ir && u < 0 {
            return None;
        }
        total += u;
    }
    Some(total)
}

impl DpRun<'_> {
    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn stats(&self) -> DpStats {
        let subtree = self.td.subtree_vertices();
        DpStats {
            cap: self.cap,
            records: self.tables.iter().map(NodeTable::len).collect(),
            bag_sizes: self.td.nodes.iter().map(|n| n.bag.len()).collect(),
            subtree_sizes: subtree.iter().map(|s| s.len()).collect(),
        }
    }

    /// Records at `node` as (key, best welfare, number of optimal witnesses).
    pub fn records(&self, node: usize) -> impl Iterator<Item = (&DpKey, i64, u64)> {
        self.tables[node]
            .records
            .iter()
            .map(|r| (&r.key, r.value, r.count))
    }

    fn root_record(&self) -> Option<u32> {
        let table = &self.tables[self.td.root];
        debug_assert!(table.len() <= 1, "root bag is empty");
        (table.len() == 1).then_some(0)
    }

    /// Witness of a record: agents of `V^x` already in complete coalitions,
    /// grouped, plus the members of each open block in key order.
    pub fn witness(&self, node: usize, record: usize) -> Result<Vec<Vec<usize>>> {
        let key = &self.tables[node].records[record].key;
        let roots: Vec<Vec<usize>> = key.bag_partition();
        self.reconstruct_from(node, record as u32, 0, roots, &mut |_, rec| {
            Ok((rec.best, [0, 0]))
        })
    }

    /// Reconstructs the optimal outcome stored at the root.
    pub fn reconstruct(&self) -> Result<Option<Outcome>> {
        let Some(root) = self.root_record() else {
            return Ok(None);
        };
        let groups = self.reconstruct_from(self.td.root, root, 0, Vec::new(), &mut |_, rec| {
            Ok((rec.best, [0, 0]))
        })?;
        let outcome = Outcome::new(self.instance, groups)?;
        let expected = self.tables[self.td.root].records[root as usize].value;
        if outcome.welfare() != Welfare::Finite(expected) {
            return Err(SdgError::Internal(format!(
                "reconstructed welfare {} differs from table value {expected}",
                outcome.welfare()
            )));
        }
        Ok(Some(outcome))
    }

    /// Walks derivations top-down from `(node, record)`. `open` names the
    /// blocks of the record's key (by their labeled agents); the result lists
    /// their full member sets first, then every coalition completed below.
    fn reconstruct_from<F>(
        &self,
        node: usize,
        record: u32,
        rank: usize,
        open: Vec<Vec<usize>>,
        choose: &mut F,
    ) -> Result<Vec<Vec<usize>>>
    where
        F: FnMut((usize, u32, usize), &Record) -> Result<(Derivation, [usize; 2])>,
    {
        let mut groups: Vec<Vec<usize>> = open.to_vec();
        // labeled set at the current node -> group index
        let initial: HashMap<Vec<usize>, usize> =
            open.into_iter().enumerate().map(|(i, l)| (l, i)).collect();
        let mut stack = vec![(node, record, rank, initial)];
        let corrupt = |what: &str| SdgError::Internal(format!("corrupted dp backpointer: {what}"));
        while let Some((x, rid, rank, map)) = stack.pop() {
            let rec = self.tables[x]
                .records
                .get(rid as usize)
                .ok_or_else(|| corrupt("record out of range"))?;
            let (deriv, ranks) = choose((x, rid, rank), rec)?;
            let tnode = &self.td.nodes[x];
            match tnode.kind {
                NodeKind::Leaf => {}
                NodeKind::Introduce(v) => {
                    let child = tnode.children[0];
                    let crec = self.child_record(child, deriv.left)?;
                    let mut cmap = HashMap::new();
                    for l in crec.key.bag_partition() {
                        let mut with_v = l.clone();
                        with_v.push(v);
                        with_v.sort_unstable();
                        let id = map
                            .get(&with_v)
                            .or_else(|| map.get(&l))
                            .copied()
                            .ok_or_else(|| corrupt("introduce"))?;
                        cmap.insert(l, id);
                    }
                    stack.push((child, deriv.left, ranks[0], cmap));
                }
                NodeKind::Forget(v) => {
                    let child = tnode.children[0];
                    let crec = self.child_record(child, deriv.left)?;
                    let mut cmap = HashMap::new();
                    for l in crec.key.bag_partition() {
                        let id = if l.contains(&v) {
                            let rest: Vec<usize> = l.iter().copied().filter(|&a| a != v).collect();
                            let id = if rest.is_empty() {
                                groups.push(Vec::new());
                                groups.len() - 1
                            } else {
                                *map.get(&rest).ok_or_else(|| corrupt("forget"))?
                            };
                            groups[id].push(v);
                            id
                        } else {
                            *map.get(&l).ok_or_else(|| corrupt("forget"))?
                        };
                        cmap.insert(l, id);
                    }
                    stack.push((child, deriv.left, ranks[0], cmap));
                }
                NodeKind::Join => {
                    stack.push((tnode.children[1], deriv.right, ranks[1], map.clone()));
                    stack.push((tnode.children[0], deriv.left, ranks[0], map));
                }
            }
        }
        // open groups were seeded with their labeled agents, which are
        // forgotten only above `node`
        for g in groups.iter_mut() {
            g.sort_unstable();
            g.dedup();
        }
        Ok(groups)
    }

    fn child_record(&self, child: usize, idx: u32) -> Result<&Record> {
        self.tables[child]
            .records
            .get(idx as usize)
            .ok_or_else(|| SdgError::Internal("corrupted dp backpointer: child record".into()))
    }

    /// Final answer for the run's mode.
    pub fn result(&self) -> Result<SolveResult> {
        let explored = self.stats().total_records();
        let Some(root) = self.root_record() else {
            return Ok(SolveResult::none(explored));
        };
        if self.mode != SolveMode::WfNs {
            let rec = &self.tables[self.td.root].records[root as usize];
            let best = self.reconstruct()?.expect("root record exists");
            return Ok(SolveResult {
                welfare: Welfare::Finite(rec.value),
                best: Some(best),
                optimal_count: rec.count,
                explored,
            });
        }
        self.best_nash_stable(root, explored)
    }

    /// Enumerates individually rational candidates by descending welfare and
    /// keeps the first Nash stable one, counting all stable ones of equal
    /// welfare.
    fn best_nash_stable(&self, root: u32, explored: u64) -> Result<SolveResult> {
        let mut kb = kbest::KBest::new(&self.tables, self.td);
        let mut best: Option<Outcome> = None;
        let mut count = 0u64;
        let mut examined = 0u64;
        for k in 0.. {
            let Some(value) = kb.value(self.td.root, root, k) else {
                break;
            };
            if let Some(b) = &best {
                if Welfare::Finite(value) < b.welfare() {
                    break;
                }
            }
            examined += 1;
            if examined > NS_CANDIDATE_LIMIT {
                return Err(SdgError::LimitExceeded {
                    what: "nash stability candidates",
                    actual: examined as usize,
                    limit: NS_CANDIDATE_LIMIT as usize,
                });
            }
            let groups = self.reconstruct_from(
                self.td.root,
                root,
                k,
                Vec::new(),
                &mut |(x, rid, rank), _| {
                    kb.derivation(x, rid, rank)
                        .ok_or_else(|| SdgError::Internal("k-best derivation missing".into()))
                },
            )?;
            let outcome = Outcome::new(self.instance, groups)?;
            debug_assert_eq!(outcome.welfare(), Welfare::Finite(value), "k={k} {outcome}");
            if is_nash_stable(self.instance, &outcome) {
                count += 1;
                if best.is_none() {
                    best = Some(outcome);
                }
            }
        }
        Ok(match best {
            Some(best) => SolveResult {
                welfare: best.welfare(),
                best: Some(best),
                optimal_count: count,
                explored: explored.saturating_add(examined),
            },
            None => SolveResult::none(explored.saturating_add(examined)),
        })
    }
}

/// Solves with a given decomposition of the whole instance.
pub fn solve_dp(
    instance: &Instance,
    mode: SolveMode,
    size_cap: SizeCap,
    td: &NiceTreeDecomposition,
) -> Result<SolveResult> {
    if let SizeCap::Fixed(0) = size_cap {
        return Err(SdgError::Contract("size cap must be at least 1".into()));
    }
    if let Some(res) = trivial_singletons(instance) {
        return Ok(res);
    }
    let cap = effective_size_cap(instance, size_cap, td.width()).cap;
    run_dp(instance, mode, cap, td)?.result()
}

/// Solves each connected component with its own decomposition.
pub fn solve_dp_auto(
    instance: &Instance,
    mode: SolveMode,
    size_cap: SizeCap,
) -> Result<SolveResult> {
    if let SizeCap::Fixed(0) = size_cap {
        return Err(SdgError::Contract("size cap must be at least 1".into()));
    }
    solve_by_components(instance, |component| {
        let td = build_nice_decomposition(component);
        solve_dp(component, mode, size_cap, &td)
    })
}
