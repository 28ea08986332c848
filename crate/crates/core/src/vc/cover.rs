//! Minimum vertex covers and neighbourhood groups of the agents outside one.

use crate::error::{Result, SdgError};
use crate::model::Instance;

/// Vertex cover of at most `k` agents, if one exists, by a bounded search
/// tree: for a vertex `v` of maximum uncovered degree, either `v` or all its
/// uncovered neighbours join the cover.
pub fn vertex_cover_at_most(instance: &Instance, k: usize) -> Option<Vec<usize>> {
    let mut in_cover = vec![false; instance.n()];
    if search(instance, &mut in_cover, k) {
        Some((0..instance.n()).filter(|&v| in_cover[v]).collect())
    } else {
        None
    }
}

fn uncovered_neighbors(instance: &Instance, in_cover: &[bool], v: usize) -> Vec<usize> {
    instance
        .neighbors(v)
        .iter()
        .copied()
        .filter(|&u| !in_cover[u])
        .collect()
}

fn search(instance: &Instance, in_cover: &mut [bool], k: usize) -> bool {
    let pick = (0..instance.n())
        .filter(|&v| !in_cover[v])
        .map(|v| (uncovered_neighbors(instance, in_cover, v).len(), v))
        .filter(|&(d, _)| d > 0)
        .max_by_key(|&(d, v)| (d, std::cmp::Reverse(v)));
    let Some((_, v)) = pick else {
        return true;
    };
    if k == 0 {
        return false;
    }
    in_cover[v] = true;
    if search(instance, in_cover, k - 1) {
        return true;
    }
    in_cover[v] = false;
    let nb = uncovered_neighbors(instance, in_cover, v);
    if nb.len() <= k {
        for &u in &nb {
            in_cover[u] = true;
        }
        if search(instance, in_cover, k - nb.len()) {
            return true;
        }
        for &u in &nb {
            in_cover[u] = false;
        }
    }
    false
}

/// A minimum vertex cover, found component by component.
pub fn compute_vertex_cover(instance: &Instance) -> Vec<usize> {
    let mut cover = Vec::new();
    for comp in instance.components() {
        let sub = instance.induced(&comp);
        let c = (0..=sub.n())
            .find_map(|k| vertex_cover_at_most(&sub, k))
            .expect("all agents form a cover");
        cover.extend(c.into_iter().map(|v| comp[v]));
    }
    cover.sort_unstable();
    cover
}

pub fn is_vertex_cover(instance: &Instance, cover: &[usize]) -> bool {
    instance
        .edges()
        .iter()
        .all(|&(a, b)| cover.contains(&a) || cover.contains(&b))
}

/// Agents outside the cover sharing one neighbourhood `signature`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Group {
    /// Neighbourhood, a sorted subset of the cover.
    pub signature: Vec<usize>,
    /// Same neighbourhood as a bitmask over cover positions.
    pub signature_mask: u64,
    pub members: Vec<usize>,
}

impl Group {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// A vertex cover `U` and the agents outside it grouped by neighbourhood.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverStructure {
    pub cover: Vec<usize>,
    /// Ordered by signature mask.
    pub groups: Vec<Group>,
}

impl CoverStructure {
    /// Position of agent `a` in the cover.
    pub fn cover_index(&self, a: usize) -> Option<usize> {
        self.cover.binary_search(&a).ok()
    }

    pub fn k(&self) -> usize {
        self.cover.len()
    }
}

/// Buckets every agent outside `cover` by its neighbourhood.
pub fn group_signatures(instance: &Instance, cover: &[usize]) -> Result<CoverStructure> {
    let mut cover = cover.to_vec();
    cover.sort_unstable();
    cover.dedup();
    if cover.len() > 64 {
        return Err(SdgError::LimitExceeded {
            what: "vertex cover size",
            actual: cover.len(),
            limit: 64,
        });
    }
    if !is_vertex_cover(instance, &cover) {
        return Err(SdgError::Contract(
            "agents do not form a vertex cover".into(),
        ));
    }
    let mut groups: Vec<Group> = Vec::new();
    for a in 0..instance.n() {
        if cover.binary_search(&a).is_ok() {
            continue;
        }
        let signature = instance.neighbors(a).to_vec();
        let mask = signature.iter().fold(0u64, |m, b| {
            m | 1 << cover.binary_search(b).expect("neighbour in cover")
        });
        match groups.iter_mut().find(|g| g.signature_mask == mask) {
            Some(g) => g.members.push(a),
            None => groups.push(Group {
                signature,
                signature_mask: mask,
                members: vec![a],
            }),
        }
    }
    groups.sort_by_key(|g| g.signature_mask);
    Ok(CoverStructure { cover, groups })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ScoringVector;

    fn inst(n: usize, edges: &[(usize, usize)]) -> Instance {
        Instance::new(
            n,
            edges.iter().copied(),
            ScoringVector::new(vec![1]).unwrap(),
            false,
        )
        .unwrap()
    }

    #[test]
    fn star_and_clique() {
        let star = inst(6, &[(0, 1), (0, 2), (0, 3), (0, 4), (0, 5)]);
        assert_eq!(compute_vertex_cover(&star), vec![0]);
        let s = group_signatures(&star, &[0]).unwrap();
        assert_eq!(s.groups.len(), 1);
        assert_eq!(s.groups[0].len(), 5);

        let k5: Vec<(usize, usize)> = (0..5)
            .flat_map(|a| (a + 1..5).map(move |b| (a, b)))
            .collect();
        let c = compute_vertex_cover(&inst(5, &k5));
        assert_eq!(c.len(), 4);
    }

    #[test]
    fn path_groups() {
        let p4 = inst(4, &[(0, 1), (1, 2), (2, 3)]);
        let s = group_signatures(&p4, &[1, 2]).unwrap();
        assert_eq!(s.groups.len(), 2);
        assert_eq!(
            (s.groups[0].signature.clone(), s.groups[0].members.clone()),
            (vec![1], vec![0])
        );
        assert_eq!(
            (s.groups[1].signature.clone(), s.groups[1].members.clone()),
            (vec![2], vec![3])
        );
        assert!(group_signatures(&p4, &[1]).is_err());
    }

    #[test]
    fn isolated_agents_form_the_empty_group() {
        let g = inst(4, &[(0, 1)]);
        let c = compute_vertex_cover(&g);
        assert_eq!(c.len(), 1);
        let s = group_signatures(&g, &c).unwrap();
        let empty = s.groups.iter().find(|g| g.signature.is_empty()).unwrap();
        assert_eq!(empty.members, vec![2, 3]);
    }
}
