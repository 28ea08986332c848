use std::collections::BTreeSet;

use crate::model::{mask, Instance};

/// Largest graph for which the elimination order is searched exhaustively.
pub const EXACT_MAX_N: usize = 12;

/// Greedy min-fill elimination order (ties: smaller degree, then smaller id).
pub fn min_fill_ordering(instance: &Instance) -> Vec<usize> {
    let n = instance.n();
    let mut adj: Vec<BTreeSet<usize>> = (0..n)
        .map(|v| instance.neighbors(v).iter().copied().collect())
        .collect();
    let mut alive = vec![true; n];
    let mut order = Vec::with_capacity(n);
    for _ in 0..n {
        let v = (0..n)
            .filter(|&v| alive[v])
            .min_by_key(|&v| (fill_in(&adj, v), adj[v].len(), v))
            .expect("an uneliminated vertex remains");
        eliminate(&mut adj, v);
        alive[v] = false;
        order.push(v);
    }
    order
}

fn fill_in(adj: &[BTreeSet<usize>], v: usize) -> usize {
    let nb: Vec<usize> = adj[v].iter().copied().collect();
    let mut missing = 0;
    for (k, &a) in nb.iter().enumerate() {
        for &b in &nb[k + 1..] {
            if !adj[a].contains(&b) {
                missing += 1;
            }
        }
    }
    missing
}

fn eliminate(adj: &mut [BTreeSet<usize>], v: usize) {
    let nb: Vec<usize> = adj[v].iter().copied().collect();
    for &a in &nb {
        adj[a].remove(&v);
        for &b in &nb {
            if a != b {
                adj[a].insert(b);
            }
        }
    }
    adj[v].clear();
}

/// Width of the decomposition induced by eliminating in `order`.
pub fn ordering_width(instance: &Instance, order: &[usize]) -> usize {
    let mut adj: Vec<BTreeSet<usize>> = (0..instance.n())
        .map(|v| instance.neighbors(v).iter().copied().collect())
        .collect();
    let mut width = 0;
    for &v in order {
        width = width.max(adj[v].len());
        eliminate(&mut adj, v);
    }
    width
}

/// Optimal elimination order by dynamic programming over vertex subsets
/// (`n <= 64`; exponential, intended for `n <= EXACT_MAX_N`).
///
/// `best[S]` is the least achievable width when the vertices of `S` are
/// eliminated first; eliminating `v` after `S` costs the number of vertices
/// outside `S + v` reachable from `v` through `S`.
pub fn exact_ordering(instance: &Instance) -> Vec<usize> {
    let n = instance.n();
    assert!(
        n <= 20,
        "exhaustive elimination search is limited to 20 vertices"
    );
    let adj: Vec<u64> = (0..n)
        .map(|v| instance.neighbors(v).iter().fold(0u64, |m, &u| m | 1 << u))
        .collect();
    let full = (1usize << n) - 1;
    let mut best = vec![usize::MAX; 1 << n];
    let mut choice = vec![usize::MAX; 1 << n];
    best[0] = 0;
    for s in 1..=full {
        for v in mask::bits(s as u64) {
            let rest = s & !(1 << v);
            let cost = reach_count(&adj, rest as u64, v, n);
            let w = best[rest].max(cost);
            if w < best[s] {
                best[s] = w;
                choice[s] = v;
            }
        }
    }
    let mut order = Vec::with_capacity(n);
    let mut s = full;
    while s != 0 {
        let v = choice[s];
        order.push(v);
        s &= !(1 << v);
    }
    order.reverse();
    order
}

fn reach_count(adj: &[u64], eliminated: u64, v: usize, n: usize) -> usize {
    let full = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let mut seen = 1u64 << v;
    let mut frontier = seen;
    let mut reached = 0u64;
    while frontier != 0 {
        let mut next = 0u64;
        for u in mask::bits(frontier) {
            next |= adj[u];
        }
        next &= full & !seen;
        seen |= next;
        reached |= next & !eliminated;
        frontier = next & eliminated;
    }
    reached.count_ones() as usize
}

/// The better of the exact order (small graphs) and min-fill.
pub fn best_ordering(instance: &Instance) -> Vec<usize> {
    if instance.n() <= EXACT_MAX_N {
        exact_ordering(instance)
    } else {
        min_fill_ordering(instance)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ScoringVector;

    fn graph(n: usize, edges: &[(usize, usize)]) -> Instance {
        Instance::new(
            n,
            edges.iter().copied(),
            ScoringVector::new(vec![1]).unwrap(),
            false,
        )
        .unwrap()
    }

    #[test]
    fn exact_width_of_small_families() {
        let path = graph(4, &[(0, 1), (1, 2), (2, 3)]);
        assert_eq!(ordering_width(&path, &exact_ordering(&path)), 1);
        let cycle = graph(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (0, 4)]);
        assert_eq!(ordering_width(&cycle, &exact_ordering(&cycle)), 2);
        let k5: Vec<_> = (0..5)
            .flat_map(|a| (a + 1..5).map(move |b| (a, b)))
            .collect();
        let k5 = graph(5, &k5);
        assert_eq!(ordering_width(&k5, &exact_ordering(&k5)), 4);
        let empty = graph(3, &[]);
        assert_eq!(ordering_width(&empty, &exact_ordering(&empty)), 0);
    }

    #[test]
    fn exact_never_worse_than_min_fill() {
        // 3x3 grid has treewidth 3
        let mut edges = Vec::new();
        for r in 0..3 {
            for c in 0..3 {
                let v = r * 3 + c;
                if c < 2 {
                    edges.push((v, v + 1));
                }
                if r < 2 {
                    edges.push((v, v + 3));
                }
            }
        }
        let g = graph(9, &edges);
        let exact = ordering_width(&g, &exact_ordering(&g));
        assert_eq!(exact, 3);
        assert!(ordering_width(&g, &min_fill_ordering(&g)) >= exact);
    }
}
