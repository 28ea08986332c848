//! Exhaustive search over all partitions of the agents. Ground truth for the
//! other solvers.

use std::cell::RefCell;
use std::collections::HashMap;

use crate::error::{Result, SdgError};
use crate::model::{mask, Instance, Outcome, Welfare};
use crate::solve::{solve_by_components, SolveMode, SolveResult};

pub const DEFAULT_LIMIT_N: usize = 12;

/// Subsets of at most this many agents get an eagerly filled utility table.
const DENSE_TABLE_MAX: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleOptions {
    /// Largest connected component the search accepts.
    pub limit_n: usize,
    /// Only consider outcomes whose coalitions have at most this many members.
    pub size_cap: Option<usize>,
    /// Cut branches that can only end in `NegInf` welfare.
    pub prune: bool,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions {
            limit_n: DEFAULT_LIMIT_N,
            size_cap: None,
            prune: true,
        }
    }
}

/// Exact optimum for `mode` by full enumeration of partitions.
pub fn solve_exact(instance: &Instance, mode: SolveMode, limit_n: usize) -> Result<SolveResult> {
    solve_exact_with(
        instance,
        mode,
        &OracleOptions {
            limit_n,
            ..OracleOptions::default()
        },
    )
}

pub fn solve_exact_with(
    instance: &Instance,
    mode: SolveMode,
    opts: &OracleOptions,
) -> Result<SolveResult> {
    if let Some(cap) = opts.size_cap {
        if cap == 0 {
            return Err(SdgError::Contract("size cap must be at least 1".into()));
        }
    }
    solve_by_components(instance, |component| solve_component(component, mode, opts))
}

fn solve_component(
    instance: &Instance,
    mode: SolveMode,
    opts: &OracleOptions,
) -> Result<SolveResult> {
    let space = PartitionSpace::new(instance, opts)?;
    let mut best: Option<(Welfare, Vec<u64>)> = None;
    let mut count: u64 = 0;
    let explored = space.for_each(|blocks, w| {
        if !w.is_finite() {
            return;
        }
        if let Some((bw, _)) = &best {
            if w < *bw {
                return;
            }
        }
        let admitted = match mode {
            SolveMode::Wf => true,
            SolveMode::WfIr => space.is_ir(blocks),
            SolveMode::WfNs => space.is_ns(blocks),
        };
        if !admitted {
            return;
        }
        match &best {
            Some((bw, _)) if w == *bw => count += 1,
            _ => {
                best = Some((w, blocks.to_vec()));
                count = 1;
            }
        }
    });
    match best {
        None => Ok(SolveResult::none(explored)),
        Some((w, blocks)) => {
            let outcome = space.to_outcome(&blocks)?;
            if outcome.welfare() != w {
                return Err(SdgError::Internal(format!(
                    "table welfare {w} disagrees with recomputed {}",
                    outcome.welfare()
                )));
            }
            Ok(SolveResult {
                best: Some(outcome),
                welfare: w,
                optimal_count: count,
                explored,
            })
        }
    }
}

/// The partitions of one instance (at most 64 agents), with cached per-subset
/// utilities so each visited partition is evaluated by table lookups.
pub struct PartitionSpace<'a> {
    instance: &'a Instance,
    n: usize,
    adj: Vec<u64>,
    /// Shortest-path distance in the whole network; a lower bound on any
    /// distance inside a coalition.
    graph_dist: Vec<Option<u32>>,
    opts: OracleOptions,
    dense: Option<Vec<Welfare>>,
    lazy: RefCell<HashMap<u64, Vec<Welfare>>>,
}

impl<'a> PartitionSpace<'a> {
    pub fn new(instance: &'a Instance, opts: &OracleOptions) -> Result<Self> {
        let n = instance.n();
        let largest = instance
            .components()
            .iter()
            .map(Vec::len)
            .max()
            .unwrap_or(0);
        if largest > opts.limit_n {
            return Err(SdgError::LimitExceeded {
                what: "connected component size for exhaustive search",
                actual: largest,
                limit: opts.limit_n,
            });
        }
        if n > 64 {
            return Err(SdgError::LimitExceeded {
                what: "agent count for exhaustive search",
                actual: n,
                limit: 64,
            });
        }
        let adj: Vec<u64> = (0..n)
            .map(|i| instance.neighbors(i).iter().fold(0u64, |m, &j| m | 1 << j))
            .collect();
        let all = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        let graph_dist = (0..n).flat_map(|i| mask::bfs(&adj, all, i)).collect();
        let mut space = PartitionSpace {
            instance,
            n,
            adj,
            graph_dist,
            opts: *opts,
            dense: None,
            lazy: RefCell::new(HashMap::new()),
        };
        if n <= DENSE_TABLE_MAX {
            let mut table = vec![Welfare::ZERO; (1usize << n) * n];
            for m in 1u64..(1u64 << n) {
                let row = space.compute_utilities(m);
                let base = m as usize * n;
                table[base..base + n].copy_from_slice(&row);
            }
            space.dense = Some(table);
        }
        Ok(space)
    }

    fn compute_utilities(&self, members: u64) -> Vec<Welfare> {
        let mut row = vec![Welfare::ZERO; self.n];
        for i in mask::bits(members) {
            let dist = mask::bfs(&self.adj, members, i);
            row[i] = mask::bits(members & !(1 << i))
                .map(|j| self.instance.score_opt(dist[j]))
                .sum();
        }
        row
    }

    /// Utility of agent `i` in the coalition `members` (which must contain `i`).
    pub fn utility(&self, i: usize, members: u64) -> Welfare {
        debug_assert!(members >> i & 1 == 1);
        if let Some(table) = &self.dense {
            return table[members as usize * self.n + i];
        }
        let mut lazy = self.lazy.borrow_mut();
        lazy.entry(members)
            .or_insert_with(|| self.compute_utilities(members))[i]
    }

    pub fn block_welfare(&self, members: u64) -> Welfare {
        mask::bits(members).map(|i| self.utility(i, members)).sum()
    }

    pub fn is_ir(&self, blocks: &[u64]) -> bool {
        blocks
            .iter()
            .all(|&b| mask::bits(b).all(|i| self.utility(i, b) >= Welfare::ZERO))
    }

    pub fn is_ns(&self, blocks: &[u64]) -> bool {
        blocks.iter().enumerate().all(|(k, &own)| {
            mask::bits(own).all(|i| {
                let before = self.utility(i, own);
                if own.count_ones() > 1 && before < Welfare::ZERO {
                    return false;
                }
                blocks
                    .iter()
                    .enumerate()
                    .filter(|&(t, _)| t != k)
                    .all(|(_, &other)| self.utility(i, other | 1 << i) <= before)
            })
        })
    }

    pub fn to_outcome(&self, blocks: &[u64]) -> Result<Outcome> {
        Outcome::new(
            self.instance,
            blocks.iter().map(|&b| mask::bits(b).collect()).collect(),
        )
    }

    /// Visits every partition in restricted-growth order, passing its blocks
    /// (ordered by minimum member) and welfare. With pruning enabled, branches
    /// that can only produce `NegInf` welfare are skipped. Returns the number
    /// of complete partitions visited.
    pub fn for_each<F: FnMut(&[u64], Welfare)>(&self, mut f: F) -> u64 {
        let mut blocks: Vec<u64> = Vec::with_capacity(self.n);
        let mut explored = 0;
        self.recurse(0, &mut blocks, &mut f, &mut explored);
        explored
    }

    fn recurse<F: FnMut(&[u64], Welfare)>(
        &self,
        k: usize,
        blocks: &mut Vec<u64>,
        f: &mut F,
        explored: &mut u64,
    ) {
        if k == self.n {
            *explored += 1;
            let w = blocks.iter().map(|&b| self.block_welfare(b)).sum();
            f(blocks, w);
            return;
        }
        for b in 0..=blocks.len() {
            if b == blocks.len() {
                blocks.push(1 << k);
            } else {
                if !self.may_join(k, blocks[b]) {
                    continue;
                }
                blocks[b] |= 1 << k;
            }
            if !self.opts.prune || self.blocks_can_connect(k + 1, blocks) {
                self.recurse(k + 1, blocks, f, explored);
            }
            if b == blocks.len() - 1 && blocks[b] == 1 << k {
                blocks.pop();
            } else {
                blocks[b] &= !(1 << k);
            }
        }
    }

    fn may_join(&self, k: usize, block: u64) -> bool {
        if let Some(cap) = self.opts.size_cap {
            if block.count_ones() as usize >= cap {
                return false;
            }
        }
        if self.opts.prune && !self.instance.is_open() {
            let delta = self.instance.scoring().delta() as u32;
            return mask::bits(block)
                .all(|j| self.graph_dist[k * self.n + j].is_some_and(|d| d <= delta));
        }
        true
    }

    /// Every block must be able to become connected using only agents that
    /// are still unassigned (ids `next..n`).
    fn blocks_can_connect(&self, next: usize, blocks: &[u64]) -> bool {
        let future = if next >= 64 { 0 } else { !0u64 << next } & self.full_mask();
        blocks.iter().all(|&b| {
            if b.count_ones() == 1 {
                return true;
            }
            let universe = b | future;
            let start = b.trailing_zeros() as usize;
            let reach = mask::bfs(&self.adj, universe, start);
            mask::bits(b).all(|j| reach[j].is_some())
        })
    }

    fn full_mask(&self) -> u64 {
        if self.n == 64 {
            u64::MAX
        } else {
            (1u64 << self.n) - 1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ScoringVector;

    fn inst(n: usize, edges: &[(usize, usize)], s: Vec<i64>) -> Instance {
        Instance::new(
            n,
            edges.iter().copied(),
            ScoringVector::new(s).unwrap(),
            false,
        )
        .unwrap()
    }

    #[test]
    fn single_agent_every_mode() {
        let g = inst(1, &[], vec![1]);
        for mode in SolveMode::ALL {
            let r = solve_exact(&g, mode, DEFAULT_LIMIT_N).unwrap();
            assert_eq!(r.welfare, Welfare::ZERO);
            assert_eq!(r.best.unwrap().to_vecs(), vec![vec![0]]);
            assert_eq!(r.optimal_count, 1);
        }
    }

    #[test]
    fn refuses_above_limit() {
        let edges: Vec<_> = (1..13).map(|i| (i - 1, i)).collect();
        let g = inst(13, &edges, vec![1]);
        let err = solve_exact(&g, SolveMode::Wf, 12).unwrap_err();
        assert!(matches!(
            err,
            SdgError::LimitExceeded {
                limit: 12,
                actual: 13,
                ..
            }
        ));
    }

    #[test]
    fn edgeless_graph_is_all_singletons() {
        let g = inst(4, &[], vec![1]);
        let r = solve_exact(&g, SolveMode::Wf, 12).unwrap();
        assert_eq!(r.welfare, Welfare::ZERO);
        assert_eq!(r.best.unwrap().coalitions().len(), 4);
    }

    #[test]
    fn unpruned_enumeration_visits_bell_number() {
        let g = inst(5, &[(0, 1), (1, 2), (2, 3), (3, 4)], vec![1, -1]);
        let opts = OracleOptions {
            prune: false,
            ..OracleOptions::default()
        };
        let space = PartitionSpace::new(&g, &opts).unwrap();
        assert_eq!(space.for_each(|_, _| {}), 52);
    }

    #[test]
    fn triangle_prefers_grand_coalition() {
        let g = inst(3, &[(0, 1), (1, 2), (0, 2)], vec![1]);
        let r = solve_exact(&g, SolveMode::WfNs, 12).unwrap();
        assert_eq!(r.welfare, Welfare::Finite(6));
        assert_eq!(r.optimal_count, 1);
    }

    #[test]
    fn size_cap_restricts_coalitions() {
        let g = inst(3, &[(0, 1), (1, 2), (0, 2)], vec![1]);
        let opts = OracleOptions {
            size_cap: Some(2),
            ..OracleOptions::default()
        };
        let r = solve_exact_with(&g, SolveMode::Wf, &opts).unwrap();
        assert_eq!(r.welfare, Welfare::Finite(2));
        assert_eq!(r.optimal_count, 3);
        assert_eq!(r.best.unwrap().to_vecs(), vec![vec![0, 1], vec![2]]);
    }
}
