use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{Instance, ScoringVector};

/// Post-filter applied to sampled graphs; rejected samples are redrawn from
/// the same seeded stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GraphFilter {
    #[default]
    None,
    NoIsolated,
    Connected,
}

const MAX_REDRAWS: usize = 10_000;

/// Erdős–Rényi graph `G(n, p)`, deterministic in `seed`.
///
/// If no sample passes `filter` within a fixed number of redraws the last
/// sample is returned unfiltered.
pub fn random_instance(
    n: usize,
    edge_prob: f64,
    seed: u64,
    scoring: ScoringVector,
    open: bool,
    filter: GraphFilter,
) -> Instance {
    let p = edge_prob.clamp(0.0, 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut last = None;
    for _ in 0..MAX_REDRAWS {
        let edges: Vec<(usize, usize)> = (0..n)
            .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
            .filter(|_| rng.gen_bool(p))
            .collect();
        let inst = Instance::new(n, edges, scoring.clone(), open).expect("sampled graph is simple");
        let ok = match filter {
            GraphFilter::None => true,
            GraphFilter::NoIsolated => (0..n).all(|i| inst.degree(i) > 0) || n == 1,
            GraphFilter::Connected => inst.is_connected(),
        };
        if ok {
            return inst;
        }
        last = Some(inst);
    }
    last.expect("at least one sample drawn")
}

/// Uniform random recursive tree: agent `i` attaches to a uniform earlier agent.
pub fn random_tree(n: usize, seed: u64, scoring: ScoringVector, open: bool) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let edges: Vec<(usize, usize)> = (1..n).map(|i| (rng.gen_range(0..i), i)).collect();
    Instance::new(n, edges, scoring, open).expect("tree is simple")
}

/// Connected graph with maximum degree at most `max_degree` (>= 2): a random
/// spanning tree respecting the degree limit, plus `extra` attempted random
/// edges that keep it.
pub fn random_bounded_degree(
    n: usize,
    max_degree: usize,
    extra: usize,
    seed: u64,
    scoring: ScoringVector,
) -> Instance {
    assert!(
        max_degree >= 2 || n <= 2,
        "a connected graph needs max degree 2"
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut degree = vec![0usize; n];
    let mut edges = std::collections::BTreeSet::new();
    for i in 1..n {
        let open: Vec<usize> = (0..i).filter(|&j| degree[j] < max_degree).collect();
        let j = *open
            .choose(&mut rng)
            .expect("a path always leaves an open endpoint");
        edges.insert((j, i));
        degree[i] += 1;
        degree[j] += 1;
    }
    for _ in 0..extra {
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        let e = (a.min(b), a.max(b));
        if a != b && degree[a] < max_degree && degree[b] < max_degree && edges.insert(e) {
            degree[a] += 1;
            degree[b] += 1;
        }
    }
    Instance::new(n, edges, scoring, false).expect("sampled graph is simple")
}

/// Random partial `k`-tree: a `k`-tree grown by attaching each new agent to a
/// random existing `k`-clique, with each edge then kept with probability
/// `keep`. Treewidth is at most `k`.
pub fn random_partial_ktree(
    n: usize,
    k: usize,
    keep: f64,
    seed: u64,
    scoring: ScoringVector,
) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base = (k + 1).min(n);
    let mut edges = Vec::new();
    for a in 0..base {
        for b in a + 1..base {
            edges.push((a, b));
        }
    }
    let mut cliques: Vec<Vec<usize>> = Vec::new();
    if base == k + 1 {
        for skip in 0..base {
            cliques.push((0..base).filter(|&v| v != skip).collect());
        }
    }
    for v in base..n {
        let clique = cliques[rng.gen_range(0..cliques.len())].clone();
        for &u in &clique {
            edges.push((u, v));
        }
        for skip in 0..clique.len() {
            let mut c: Vec<usize> = clique
                .iter()
                .copied()
                .filter(|&u| u != clique[skip])
                .collect();
            c.push(v);
            cliques.push(c);
        }
    }
    let keep = keep.clamp(0.0, 1.0);
    let edges: Vec<(usize, usize)> = edges.into_iter().filter(|_| rng.gen_bool(keep)).collect();
    Instance::new(n, edges, scoring, false).expect("k-tree edges are simple")
}
