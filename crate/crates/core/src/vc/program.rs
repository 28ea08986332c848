//! Branches over the cover and the count program each branch induces.

#![allow(clippy::needless_range_loop)]

use std::collections::VecDeque;

use super::cover::CoverStructure;
use crate::model::{Instance, Welfare};
use crate::solve::SolveMode;

/// Distances between the agent types of one coalition: its cover agents and
/// one representative per present group. Agents of one group are
/// interchangeable and never adjacent to each other, so these distances do
/// not depend on how many agents of each group are present.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeDistances {
    /// Cover positions in the coalition.
    pub cover: Vec<usize>,
    /// Indices of the present groups.
    pub groups: Vec<usize>,
    /// Neighbours in the representative graph; cover vertices first.
    adj: Vec<Vec<usize>>,
    dist: Vec<Vec<Option<u32>>>,
}

impl TypeDistances {
    pub fn vertex_count(&self) -> usize {
        self.adj.len()
    }

    pub fn cover_cover(&self, i: usize, j: usize) -> Option<u32> {
        self.dist[i][j]
    }

    pub fn cover_group(&self, i: usize, g: usize) -> Option<u32> {
        self.dist[i][self.cover.len() + g]
    }

    /// Distance between agents of present groups at positions `g` and `h`;
    /// two distinct agents of the same group are at distance 2.
    pub fn group_group(&self, g: usize, h: usize) -> Option<u32> {
        if g == h {
            Some(2)
        } else {
            self.dist[self.cover.len() + g][self.cover.len() + h]
        }
    }

    /// Distances from an extra agent adjacent to `neighbors` (vertex indices)
    /// to every vertex.
    pub fn from_new_vertex(&self, neighbors: &[usize]) -> Vec<Option<u32>> {
        (0..self.vertex_count())
            .map(|v| {
                neighbors
                    .iter()
                    .filter_map(|&nb| self.dist[nb][v])
                    .min()
                    .map(|d| d + 1)
            })
            .collect()
    }
}

fn bfs_all(adj: &[Vec<usize>]) -> Vec<Vec<Option<u32>>> {
    (0..adj.len())
        .map(|src| {
            let mut dist = vec![None; adj.len()];
            dist[src] = Some(0);
            let mut queue = VecDeque::from([src]);
            while let Some(v) = queue.pop_front() {
                let d = dist[v].expect("queued vertices have distances");
                for &u in &adj[v] {
                    if dist[u].is_none() {
                        dist[u] = Some(d + 1);
                        queue.push_back(u);
                    }
                }
            }
            dist
        })
        .collect()
}

/// Builds the representative graph of a coalition with cover positions
/// `cover` and present groups `present`. `None` if it is disconnected.
pub fn type_distances(
    instance: &Instance,
    structure: &CoverStructure,
    cover: &[usize],
    present: &[usize],
) -> Option<TypeDistances> {
    let k = cover.len();
    let mut adj = vec![Vec::new(); k + present.len()];
    for i in 0..k {
        for j in i + 1..k {
            if instance.has_edge(structure.cover[cover[i]], structure.cover[cover[j]]) {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
    }
    for (g, &group) in present.iter().enumerate() {
        let mask = structure.groups[group].signature_mask;
        for (i, &pos) in cover.iter().enumerate() {
            if mask >> pos & 1 == 1 {
                adj[i].push(k + g);
                adj[k + g].push(i);
            }
        }
    }
    let dist = bfs_all(&adj);
    if dist[0].iter().any(Option::is_none) {
        return None;
    }
    Some(TypeDistances {
        cover: cover.to_vec(),
        groups: present.to_vec(),
        adj,
        dist,
    })
}

/// Which cover agents form each coalition, and which groups have at least
/// one agent in it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Branch {
    /// Blocks of cover positions.
    pub cover_partition: Vec<Vec<usize>>,
    /// Present group indices per block.
    pub presence: Vec<Vec<usize>>,
}

/// Integer program of a branch: variable `x[v]` is the number of agents of
/// group `variables()[v].1` in block `variables()[v].0`, at least 1; the
/// remaining agents of each group stay singletons.
#[derive(Debug, Clone)]
pub struct CountProgram<'a> {
    instance: &'a Instance,
    structure: &'a CoverStructure,
    branch: Branch,
    blocks: Vec<TypeDistances>,
    variables: Vec<(usize, usize)>,
    offsets: Vec<usize>,
    /// `[block][cover position]`: distances from that cover agent joining
    /// the block (`None` for members).
    join_cover: Vec<Vec<Option<Vec<Option<u32>>>>>,
    /// `[block][group]`: distances from an agent of that group joining.
    join_group: Vec<Vec<Vec<Option<u32>>>>,
    block_of_cover: Vec<usize>,
}

impl<'a> CountProgram<'a> {
    /// `None` when some block is disconnected, has a present group with no
    /// neighbour in it, or (closed mode) has two types beyond the horizon.
    pub fn new(
        instance: &'a Instance,
        structure: &'a CoverStructure,
        branch: Branch,
    ) -> Option<Self> {
        let delta = instance.scoring().delta() as u32;
        let mut blocks = Vec::with_capacity(branch.cover_partition.len());
        for (cover, present) in branch.cover_partition.iter().zip(&branch.presence) {
            let cover_mask = cover.iter().fold(0u64, |m, &p| m | 1 << p);
            if present
                .iter()
                .any(|&g| structure.groups[g].signature_mask & cover_mask == 0)
            {
                return None;
            }
            let td = type_distances(instance, structure, cover, present)?;
            if !instance.is_open()
                && td
                    .dist
                    .iter()
                    .flatten()
                    .any(|d| d.is_some_and(|d| d > delta))
            {
                return None;
            }
            blocks.push(td);
        }
        let mut variables = Vec::new();
        let mut offsets = vec![0];
        for (b, present) in branch.presence.iter().enumerate() {
            variables.extend(present.iter().map(|&g| (b, g)));
            offsets.push(variables.len());
        }
        let k = structure.k();
        let mut block_of_cover = vec![0; k];
        for (b, cover) in branch.cover_partition.iter().enumerate() {
            for &p in cover {
                block_of_cover[p] = b;
            }
        }
        let mut join_cover = Vec::with_capacity(blocks.len());
        let mut join_group = Vec::with_capacity(blocks.len());
        for td in &blocks {
            let nc = td.cover.len();
            join_cover.push(
                (0..k)
                    .map(|p| {
                        if td.cover.contains(&p) {
                            return None;
                        }
                        let agent = structure.cover[p];
                        let mut nbs: Vec<usize> = (0..nc)
                            .filter(|&i| instance.has_edge(agent, structure.cover[td.cover[i]]))
                            .collect();
                        nbs.extend(
                            (0..td.groups.len())
                                .filter(|&g| {
                                    structure.groups[td.groups[g]].signature_mask >> p & 1 == 1
                                })
                                .map(|g| nc + g),
                        );
                        Some(td.from_new_vertex(&nbs))
                    })
                    .collect(),
            );
            join_group.push(
                structure
                    .groups
                    .iter()
                    .map(|group| {
                        let nbs: Vec<usize> = (0..nc)
                            .filter(|&i| group.signature_mask >> td.cover[i] & 1 == 1)
                            .collect();
                        td.from_new_vertex(&nbs)
                    })
                    .collect(),
            );
        }
        Some(CountProgram {
            instance,
            structure,
            branch,
            blocks,
            variables,
            offsets,
            join_cover,
            join_group,
            block_of_cover,
        })
    }

    pub fn branch(&self) -> &Branch {
        &self.branch
    }

    pub fn blocks(&self) -> &[TypeDistances] {
        &self.blocks
    }

    /// `(block, group)` per variable.
    pub fn variables(&self) -> &[(usize, usize)] {
        &self.variables
    }

    fn xs<'x>(&self, x: &'x [usize], b: usize) -> &'x [usize] {
        &x[self.offsets[b]..self.offsets[b + 1]]
    }

    fn s(&self, d: Option<u32>) -> Welfare {
        self.instance.score_opt(d)
    }

    pub fn group_sizes(&self) -> Vec<usize> {
        self.structure.groups.iter().map(|g| g.len()).collect()
    }

    /// Agents of each group left as singletons.
    pub fn leftovers(&self, x: &[usize]) -> Vec<usize> {
        let mut left = self.group_sizes();
        for (v, &(_, g)) in self.variables.iter().enumerate() {
            left[g] = left[g].saturating_sub(x[v]);
        }
        left
    }

    /// Whether `x` respects the lower bounds and the group sizes.
    pub fn is_feasible(&self, x: &[usize]) -> bool {
        if x.len() != self.variables.len() || x.contains(&0) {
            return false;
        }
        let mut used = vec![0usize; self.structure.groups.len()];
        for (v, &(_, g)) in self.variables.iter().enumerate() {
            used[g] += x[v];
        }
        used.iter()
            .zip(&self.structure.groups)
            .all(|(&u, g)| u <= g.len())
    }

    /// Welfare of the outcome described by `x`, as a quadratic form.
    pub fn objective(&self, x: &[usize]) -> Welfare {
        let s2 = self.s(Some(2));
        let mut total = Welfare::ZERO;
        for (b, td) in self.blocks.iter().enumerate() {
            let xs = self.xs(x, b);
            let nc = td.cover.len();
            let ng = td.groups.len();
            let mut half = Welfare::ZERO;
            for i in 0..nc {
                for j in i + 1..nc {
                    half = half + self.s(td.cover_cover(i, j));
                }
                for g in 0..ng {
                    half = half + self.s(td.cover_group(i, g)).times(xs[g] as u64);
                }
            }
            for g in 0..ng {
                for h in g + 1..ng {
                    half = half + self.s(td.group_group(g, h)).times((xs[g] * xs[h]) as u64);
                }
                half = half + s2.times((xs[g] * (xs[g] - 1) / 2) as u64);
            }
            total = total + half + half;
        }
        total
    }

    fn cover_utility(&self, b: usize, i: usize, x: &[usize]) -> Welfare {
        let td = &self.blocks[b];
        let xs = self.xs(x, b);
        let mut u = Welfare::ZERO;
        for j in (0..td.cover.len()).filter(|&j| j != i) {
            u = u + self.s(td.cover_cover(i, j));
        }
        for g in 0..td.groups.len() {
            u = u + self.s(td.cover_group(i, g)).times(xs[g] as u64);
        }
        u
    }

    fn group_utility(&self, b: usize, g: usize, x: &[usize]) -> Welfare {
        let td = &self.blocks[b];
        let xs = self.xs(x, b);
        let mut u = Welfare::ZERO;
        for i in 0..td.cover.len() {
            u = u + self.s(td.cover_group(i, g));
        }
        for h in 0..td.groups.len() {
            let others = if h == g { xs[h] - 1 } else { xs[h] };
            u = u + self.s(td.group_group(g, h)).times(others as u64);
        }
        u
    }

    /// Utility of an agent joining block `d`, from its distances `dist` to
    /// the block's type vertices.
    fn join_utility(&self, d: usize, dist: &[Option<u32>], x: &[usize]) -> Welfare {
        let td = &self.blocks[d];
        let xs = self.xs(x, d);
        let nc = td.cover.len();
        let mut u = Welfare::ZERO;
        for &di in &dist[..nc] {
            u = u + self.s(di);
        }
        for g in 0..td.groups.len() {
            u = u + self.s(dist[nc + g]).times(xs[g] as u64);
        }
        u
    }

    /// Whether the outcome described by a feasible `x` meets `mode`'s
    /// stability requirement.
    pub fn satisfies(&self, x: &[usize], mode: SolveMode) -> bool {
        if mode == SolveMode::Wf {
            return true;
        }
        let ns = mode == SolveMode::WfNs;
        let s1 = Welfare::Finite(self.instance.scoring().s1());
        let left = self.leftovers(x);
        let nb = self.blocks.len();
        for b in 0..nb {
            let td = &self.blocks[b];
            for i in 0..td.cover.len() {
                let u = self.cover_utility(b, i, x);
                if u < Welfare::ZERO {
                    return false;
                }
                if !ns {
                    continue;
                }
                let pos = td.cover[i];
                for d in (0..nb).filter(|&d| d != b) {
                    let dist = self.join_cover[d][pos]
                        .as_ref()
                        .expect("agent outside block");
                    if self.join_utility(d, dist, x) > u {
                        return false;
                    }
                }
                // joining a leftover neighbour yields s_1
                let lonely_neighbor = self
                    .structure
                    .groups
                    .iter()
                    .zip(&left)
                    .any(|(g, &l)| l > 0 && g.signature_mask >> pos & 1 == 1);
                if lonely_neighbor && s1 > u {
                    return false;
                }
            }
            for g in 0..td.groups.len() {
                let u = self.group_utility(b, g, x);
                if u < Welfare::ZERO {
                    return false;
                }
                if !ns {
                    continue;
                }
                let group = td.groups[g];
                for d in (0..nb).filter(|&d| d != b) {
                    if self.join_utility(d, &self.join_group[d][group], x) > u {
                        return false;
                    }
                }
            }
        }
        if ns {
            for (group, &l) in left.iter().enumerate() {
                if l == 0 {
                    continue;
                }
                for d in 0..nb {
                    if self.join_utility(d, &self.join_group[d][group], x) > Welfare::ZERO {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// The outcome of a feasible `x`: group agents are handed out in id
    /// order, block by block; leftovers become singletons.
    pub fn materialize(&self, x: &[usize]) -> Vec<Vec<usize>> {
        let mut next = vec![0usize; self.structure.groups.len()];
        let mut out: Vec<Vec<usize>> = Vec::new();
        for (b, cover) in self.branch.cover_partition.iter().enumerate() {
            let mut members: Vec<usize> = cover.iter().map(|&p| self.structure.cover[p]).collect();
            for (g, &group) in self.blocks[b].groups.iter().enumerate() {
                let take = self.xs(x, b)[g];
                let agents = &self.structure.groups[group].members;
                members.extend_from_slice(&agents[next[group]..next[group] + take]);
                next[group] += take;
            }
            out.push(members);
        }
        for (group, g) in self.structure.groups.iter().enumerate() {
            out.extend(g.members[next[group]..].iter().map(|&a| vec![a]));
        }
        out
    }

    /// Outcomes described by `x`: ways to choose which agents of each group
    /// go where.
    pub fn multiplicity(&self, x: &[usize]) -> u128 {
        let mut remaining: Vec<usize> = self.structure.groups.iter().map(|g| g.len()).collect();
        let mut total: u128 = 1;
        for (v, &(_, g)) in self.variables.iter().enumerate() {
            total = total.saturating_mul(binomial(remaining[g], x[v]));
            remaining[g] -= x[v];
        }
        total
    }

    /// Block of a cover position.
    pub fn block_of_cover(&self, pos: usize) -> usize {
        self.block_of_cover[pos]
    }
}

/// `n choose k`, saturating.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}
