//! Bitmask graph routines for graphs with at most 64 vertices.

/// Distances from `src` to every vertex inside `members`, by frontier BFS over
/// adjacency rows. Unreached vertices (and non-members) get `None`.
pub fn bfs(adj: &[u64], members: u64, src: usize) -> Vec<Option<u32>> {
    let mut dist = vec![None; adj.len()];
    debug_assert!(members >> src & 1 == 1);
    let mut seen = 1u64 << src;
    let mut frontier = seen;
    let mut d = 0u32;
    while frontier != 0 {
        let mut f = frontier;
        let mut next = 0u64;
        while f != 0 {
            let v = f.trailing_zeros() as usize;
            f &= f - 1;
            dist[v] = Some(d);
            next |= adj[v];
        }
        next &= members & !seen;
        seen |= next;
        frontier = next;
        d += 1;
    }
    dist
}

/// Whether `members` induces a connected subgraph (the empty set counts as connected).
pub fn is_connected(adj: &[u64], members: u64) -> bool {
    if members == 0 {
        return true;
    }
    let start = members.trailing_zeros() as usize;
    let mut seen = 1u64 << start;
    let mut frontier = seen;
    while frontier != 0 {
        let mut f = frontier;
        let mut next = 0u64;
        while f != 0 {
            let v = f.trailing_zeros() as usize;
            f &= f - 1;
            next |= adj[v];
        }
        next &= members & !seen;
        seen |= next;
        frontier = next;
    }
    seen == members
}

/// Iterates over the set bits of a mask.
pub fn bits(mut mask: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if mask == 0 {
            None
        } else {
            let v = mask.trailing_zeros() as usize;
            mask &= mask - 1;
            Some(v)
        }
    })
}
