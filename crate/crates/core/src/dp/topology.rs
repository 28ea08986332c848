//! Coalition topologies: the induced graph of a partially built coalition,
//! with members already forgotten by the decomposition kept only as
//! anonymous vertices.

use crate::model::{mask, Instance};

/// Vertices `0..labeled.len()` are the bag agents in `labeled` (sorted);
/// the remaining `anon` vertices are anonymous and stored in canonical order,
/// so two topologies compare equal exactly when they are isomorphic under a
/// bijection that fixes every labeled agent.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CoalitionTopology {
    labeled: Vec<usize>,
    anon: usize,
    adj: Vec<u64>,
}

/// Most vertices a topology can hold.
pub const MAX_TOPOLOGY_SIZE: usize = 64;

impl CoalitionTopology {
    /// Builds and canonicalizes a topology. `adj` rows index labeled vertices
    /// first, then anonymous ones, in any order.
    pub fn new(labeled: Vec<usize>, anon: usize, adj: Vec<u64>) -> Self {
        assert!(
            labeled.windows(2).all(|w| w[0] < w[1]),
            "labeled agents must be sorted"
        );
        assert_eq!(labeled.len() + anon, adj.len());
        assert!(adj.len() <= MAX_TOPOLOGY_SIZE);
        let mut t = CoalitionTopology { labeled, anon, adj };
        t.canonicalize();
        t
    }

    pub fn singleton(agent: usize) -> Self {
        CoalitionTopology {
            labeled: vec![agent],
            anon: 0,
            adj: vec![0],
        }
    }

    pub fn labeled(&self) -> &[usize] {
        &self.labeled
    }

    pub fn anon_count(&self) -> usize {
        self.anon
    }

    pub fn size(&self) -> usize {
        self.adj.len()
    }

    pub fn adjacency(&self) -> &[u64] {
        &self.adj
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u] >> v & 1 == 1
    }

    /// Canonical byte string: labeled agents, anonymous count, then the upper
    /// triangle of the canonical adjacency matrix.
    pub fn canon_key(&self) -> Vec<u8> {
        let mut key =
            Vec::with_capacity(4 * self.labeled.len() + 8 + self.size() * self.size() / 16);
        key.extend((self.labeled.len() as u32).to_le_bytes());
        for &a in &self.labeled {
            key.extend((a as u32).to_le_bytes());
        }
        key.extend((self.anon as u32).to_le_bytes());
        let mut byte = 0u8;
        let mut filled = 0;
        for u in 0..self.size() {
            for v in u + 1..self.size() {
                byte |= (self.has_edge(u, v) as u8) << filled;
                filled += 1;
                if filled == 8 {
                    key.push(byte);
                    byte = 0;
                    filled = 0;
                }
            }
        }
        if filled > 0 {
            key.push(byte);
        }
        key
    }

    /// Adds bag agent `v` with its network edges to the labeled agents and no
    /// edges to anonymous members.
    pub fn introduce(&self, v: usize, instance: &Instance) -> Self {
        let pos = self
            .labeled
            .binary_search(&v)
            .expect_err("introduced agent is new to the topology");
        let mut labeled = self.labeled.clone();
        labeled.insert(pos, v);
        // old vertex k maps to k (k < pos) or k + 1
        let shift = |row: u64| -> u64 {
            let low = row & ((1u64 << pos) - 1);
            let high = if pos >= 63 {
                0
            } else {
                (row >> pos) << (pos + 1)
            };
            low | high
        };
        let mut adj: Vec<u64> = Vec::with_capacity(self.size() + 1);
        for (k, &row) in self.adj.iter().enumerate() {
            if k == pos {
                adj.push(0);
            }
            adj.push(shift(row));
        }
        if pos == self.adj.len() {
            adj.push(0);
        }
        for (k, &a) in labeled.iter().enumerate() {
            if k != pos && instance.has_edge(a, v) {
                adj[k] |= 1 << pos;
                adj[pos] |= 1 << k;
            }
        }
        let anon = self.anon;
        let mut t = CoalitionTopology { labeled, anon, adj };
        t.canonicalize();
        t
    }

    /// Turns labeled agent `v` into an anonymous member.
    pub fn forget(&self, v: usize) -> Self {
        let pos = self
            .labeled
            .binary_search(&v)
            .expect("forgotten agent is labeled");
        let mut order: Vec<usize> = (0..self.size()).filter(|&k| k != pos).collect();
        order.insert(self.labeled.len() - 1, pos);
        let mut labeled = self.labeled.clone();
        labeled.remove(pos);
        let adj = permute(&self.adj, &order);
        CoalitionTopology::new(labeled, self.anon + 1, adj)
    }

    /// Union of two topologies over the same labeled agents whose anonymous
    /// members are disjoint and mutually non-adjacent.
    pub fn glue(&self, other: &CoalitionTopology) -> Self {
        assert_eq!(
            self.labeled, other.labeled,
            "glued topologies share their labeled agents"
        );
        let l = self.labeled.len();
        let size = l + self.anon + other.anon;
        assert!(size <= MAX_TOPOLOGY_SIZE);
        let mut adj = vec![0u64; size];
        adj[..self.size()].copy_from_slice(&self.adj);
        // other's vertex k maps to k (labeled) or k + self.anon (anonymous)
        let remap = |k: usize| if k < l { k } else { k + self.anon };
        for (k, &row) in other.adj.iter().enumerate() {
            for j in mask::bits(row) {
                adj[remap(k)] |= 1 << remap(j);
            }
        }
        CoalitionTopology::new(self.labeled.clone(), self.anon + other.anon, adj)
    }

    /// Whether the topology's graph is connected.
    pub fn is_connected(&self) -> bool {
        mask::is_connected(&self.adj, self.full())
    }

    fn full(&self) -> u64 {
        if self.size() == 64 {
            u64::MAX
        } else {
            (1u64 << self.size()) - 1
        }
    }

    /// Utility of every vertex when the topology is a complete coalition.
    pub fn utilities(&self, instance: &Instance) -> Vec<crate::model::Welfare> {
        let full = self.full();
        (0..self.size())
            .map(|v| {
                let dist = mask::bfs(&self.adj, full, v);
                (0..self.size())
                    .filter(|&u| u != v)
                    .map(|u| instance.score_opt(dist[u]))
                    .sum()
            })
            .collect()
    }

    fn canonicalize(&mut self) {
        if self.anon <= 1 {
            return;
        }
        let order = canonical_order(self.labeled.len(), &self.adj);
        self.adj = permute(&self.adj, &order);
    }
}

/// Relabels so that new vertex `k` is old vertex `order[k]`.
fn permute(adj: &[u64], order: &[usize]) -> Vec<u64> {
    let mut inverse = vec![0usize; order.len()];
    for (k, &old) in order.iter().enumerate() {
        inverse[old] = k;
    }
    order
        .iter()
        .map(|&old| mask::bits(adj[old]).fold(0u64, |row, j| row | 1 << inverse[j]))
        .collect()
}

/// Vertex order (labeled `0..l` fixed, anonymous vertices after) minimizing
/// the permuted adjacency rows lexicographically over all orders reachable by
/// colour refinement and individualization.
pub fn canonical_order(l: usize, adj: &[u64]) -> Vec<usize> {
    let n = adj.len();
    let mut colors: Vec<u32> = (0..n).map(|v| v.min(l) as u32).collect();
    refine(adj, &mut colors);
    let mut best: Option<(Vec<u64>, Vec<usize>)> = None;
    search(l, adj, colors, &mut best);
    best.expect("search reaches at least one leaf").1
}

fn search(l: usize, adj: &[u64], colors: Vec<u32>, best: &mut Option<(Vec<u64>, Vec<usize>)>) {
    let n = adj.len();
    // Smallest colour class of size > 1; labeled vertices have unique colours.
    let mut cell_size = vec![0usize; n];
    for &c in &colors {
        cell_size[c as usize] += 1;
    }
    let target = (0..n).find(|&c| cell_size[c] > 1);
    let Some(target) = target else {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&v| colors[v]);
        debug_assert!(order[..l].iter().enumerate().all(|(k, &v)| k == v));
        let enc = permute(adj, &order);
        if best.as_ref().is_none_or(|(b, _)| enc < *b) {
            *best = Some((enc, order));
        }
        return;
    };
    let cell: Vec<usize> = (0..n).filter(|&v| colors[v] as usize == target).collect();
    let mut reps: Vec<usize> = Vec::new();
    for &v in &cell {
        let twin_of_rep = reps.iter().any(|&r| {
            let bv = 1u64 << v;
            let br = 1u64 << r;
            adj[v] & !br == adj[r] & !bv
        });
        if !twin_of_rep {
            reps.push(v);
        }
    }
    for v in reps {
        let mut next: Vec<u32> = colors
            .iter()
            .enumerate()
            .map(|(u, &c)| {
                let c = c * 2;
                if c as usize == 2 * target && u != v {
                    c + 1
                } else {
                    c
                }
            })
            .collect();
        compress(&mut next);
        refine(adj, &mut next);
        search(l, adj, next, best);
    }
}

/// Renumbers colours to `0..k` preserving order.
fn compress(colors: &mut [u32]) {
    let mut distinct: Vec<u32> = colors.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    for c in colors.iter_mut() {
        *c = distinct.binary_search(c).expect("present") as u32;
    }
}

/// Colour refinement to the coarsest equitable partition refining `colors`;
/// new colours are ranks of (old colour, sorted neighbour colours), so the
/// result depends only on the coloured graph's isomorphism class.
fn refine(adj: &[u64], colors: &mut [u32]) {
    compress(colors);
    loop {
        let before = colors.iter().copied().max().map_or(0, |m| m + 1);
        let sigs: Vec<(u32, Vec<u32>)> = (0..adj.len())
            .map(|v| {
                let mut nb: Vec<u32> = mask::bits(adj[v]).map(|u| colors[u]).collect();
                nb.sort_unstable();
                (colors[v], nb)
            })
            .collect();
        let mut distinct = sigs.clone();
        distinct.sort();
        distinct.dedup();
        for (v, sig) in sigs.iter().enumerate() {
            colors[v] = distinct.binary_search(sig).expect("present") as u32;
        }
        if distinct.len() as u32 == before {
            return;
        }
    }
}
