use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Result, SdgError};
use crate::model::{Instance, ScoringVector};

/// A graph on `3n` vertices together with `n` vertex-disjoint triangles
/// covering it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TriangleCoveredGraph {
    pub vertices: usize,
    pub edges: Vec<(usize, usize)>,
    pub triangles: Vec<[usize; 3]>,
}

impl TriangleCoveredGraph {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(SdgError::InvalidReduction(msg));
        if self.vertices == 0 || !self.vertices.is_multiple_of(3) {
            return bad(format!(
                "{} vertices is not a positive multiple of 3",
                self.vertices
            ));
        }
        if self.triangles.len() * 3 != self.vertices {
            return bad(format!(
                "{} triangles cannot cover {} vertices",
                self.triangles.len(),
                self.vertices
            ));
        }
        let edges: BTreeSet<(usize, usize)> = self
            .edges
            .iter()
            .map(|&(a, b)| (a.min(b), a.max(b)))
            .collect();
        let mut covered = vec![false; self.vertices];
        for t in &self.triangles {
            for &v in t {
                if v >= self.vertices {
                    return bad(format!("triangle vertex {v} out of range"));
                }
                if std::mem::replace(&mut covered[v], true) {
                    return bad(format!("vertex {v} lies in two triangles"));
                }
            }
            for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[0], t[2])] {
                if !edges.contains(&(a.min(b), a.max(b))) {
                    return bad(format!("triangle {t:?} misses edge ({a}, {b})"));
                }
            }
        }
        Ok(())
    }
}

/// Maps a triangle-covered graph to its complement with scoring `(s1)` and the
/// welfare threshold `3n * s1 * (n - 1)`.
pub fn reduce_3ctcg(g: &TriangleCoveredGraph, s1: i64) -> Result<(Instance, i64)> {
    g.validate()?;
    let present: BTreeSet<(usize, usize)> =
        g.edges.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
    let complement = (0..g.vertices)
        .flat_map(|a| (a + 1..g.vertices).map(move |b| (a, b)))
        .filter(|e| !present.contains(e));
    let instance = Instance::new(g.vertices, complement, ScoringVector::new(vec![s1])?, false)?;
    let n = (g.vertices / 3) as i64;
    Ok((instance, 3 * n * s1 * (n - 1)))
}

/// Brute-force 3-colourability by backtracking in vertex order.
pub fn is_three_colorable(vertices: usize, edges: &[(usize, usize)]) -> bool {
    let mut adj = vec![Vec::new(); vertices];
    for &(a, b) in edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut color = vec![u8::MAX; vertices];
    fn go(v: usize, adj: &[Vec<usize>], color: &mut [u8]) -> bool {
        if v == adj.len() {
            return true;
        }
        for c in 0..3 {
            if adj[v].iter().all(|&u| color[u] != c) {
                color[v] = c;
                if go(v + 1, adj, color) {
                    return true;
                }
            }
        }
        color[v] = u8::MAX;
        false
    }
    go(0, &adj, &mut color)
}

/// `n` triangles on consecutive vertex triples plus each cross-triangle edge
/// independently with probability `p`.
pub fn random_triangle_covered(n: usize, p: f64, seed: u64) -> TriangleCoveredGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vertices = 3 * n;
    let triangles: Vec<[usize; 3]> = (0..n).map(|t| [3 * t, 3 * t + 1, 3 * t + 2]).collect();
    let mut edges = Vec::new();
    for a in 0..vertices {
        for b in a + 1..vertices {
            if a / 3 == b / 3 || rng.gen_bool(p) {
                edges.push((a, b));
            }
        }
    }
    TriangleCoveredGraph {
        vertices,
        edges,
        triangles,
    }
}

/// Every triangle-covered graph on two fixed triangles `{0,1,2}`, `{3,4,5}`:
/// one per subset of the nine cross edges.
pub fn all_two_triangle_graphs() -> Vec<TriangleCoveredGraph> {
    let cross: Vec<(usize, usize)> = (0..3).flat_map(|a| (3..6).map(move |b| (a, b))).collect();
    (0u32..1 << cross.len())
        .map(|subset| {
            let mut edges = vec![(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5)];
            edges.extend(
                cross
                    .iter()
                    .enumerate()
                    .filter(|&(k, _)| subset >> k & 1 == 1)
                    .map(|(_, &e)| e),
            );
            TriangleCoveredGraph {
                vertices: 6,
                edges,
                triangles: vec![[0, 1, 2], [3, 4, 5]],
            }
        })
        .collect()
}
