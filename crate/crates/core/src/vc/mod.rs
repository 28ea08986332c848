//! Welfare maximization parameterized by the vertex cover number.
//!
//! Every coalition with two or more agents contains a cover agent, so an
//! outcome is described by a partition of the cover, the groups present in
//! each block, and how many agents of each group each block takes. The first
//! two are enumerated; the counts are optimized exactly per branch.

pub mod cover;
pub mod program;

use rayon::prelude::*;

use crate::error::{Result, SdgError};
use crate::model::{Instance, Outcome, Welfare};
use crate::solve::{solve_by_components, trivial_singletons, SolveMode, SolveResult};

pub use cover::{
    compute_vertex_cover, group_signatures, is_vertex_cover, vertex_cover_at_most, CoverStructure,
    Group,
};
pub use program::{binomial, type_distances, Branch, CountProgram, TypeDistances};

/// Largest vertex cover (per component) the solver accepts by default.
pub const DEFAULT_MAX_COVER: usize = 8;

/// Most groups a single block may choose its present groups from.
pub const MAX_CANDIDATE_GROUPS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VcOptions {
    pub max_cover: usize,
}

impl Default for VcOptions {
    fn default() -> Self {
        VcOptions {
            max_cover: DEFAULT_MAX_COVER,
        }
    }
}

pub fn solve_vc(instance: &Instance, mode: SolveMode) -> Result<SolveResult> {
    solve_vc_with(instance, mode, &VcOptions::default())
}

pub fn solve_vc_with(
    instance: &Instance,
    mode: SolveMode,
    opts: &VcOptions,
) -> Result<SolveResult> {
    if let Some(res) = trivial_singletons(instance) {
        return Ok(res);
    }
    solve_by_components(instance, |component| {
        let cover =
            vertex_cover_at_most(component, opts.max_cover).ok_or(SdgError::LimitExceeded {
                what: "vertex cover size",
                actual: opts.max_cover + 1,
                limit: opts.max_cover,
            })?;
        let structure = group_signatures(component, &cover)?;
        solve_structure(component, &structure, mode)
    })
}

/// Restricted growth strings of length `k`: every set partition once.
pub fn cover_partitions(k: usize) -> Vec<Vec<Vec<usize>>> {
    fn rec(i: usize, k: usize, blocks: &mut Vec<Vec<usize>>, out: &mut Vec<Vec<Vec<usize>>>) {
        if i == k {
            out.push(blocks.clone());
            return;
        }
        for b in 0..blocks.len() {
            blocks[b].push(i);
            rec(i + 1, k, blocks, out);
            blocks[b].pop();
        }
        blocks.push(vec![i]);
        rec(i + 1, k, blocks, out);
        blocks.pop();
    }
    let mut out = Vec::new();
    rec(0, k, &mut Vec::new(), &mut out);
    out
}

#[derive(Debug, Default)]
struct PartitionResult {
    best: Option<(Welfare, Branch, Vec<usize>)>,
    count: u128,
    explored: u64,
}

impl PartitionResult {
    fn offer(&mut self, w: Welfare, multiplicity: u128, program: &CountProgram<'_>, x: &[usize]) {
        match &self.best {
            Some((b, _, _)) if w < *b => {}
            Some((b, _, _)) if w == *b => self.count = self.count.saturating_add(multiplicity),
            _ => {
                self.best = Some((w, program.branch().clone(), x.to_vec()));
                self.count = multiplicity;
            }
        }
    }

    fn threshold(&self) -> Welfare {
        self.best.as_ref().map_or(Welfare::NegInf, |b| b.0)
    }
}

/// Solves a connected instance given its cover structure.
pub fn solve_structure(
    instance: &Instance,
    structure: &CoverStructure,
    mode: SolveMode,
) -> Result<SolveResult> {
    let partitions = cover_partitions(structure.k());
    let results: Vec<Result<PartitionResult>> = partitions
        .par_iter()
        .map(|blocks| solve_partition(instance, structure, blocks, mode))
        .collect();
    let mut best: Option<(Welfare, Branch, Vec<usize>)> = None;
    let mut count: u128 = 0;
    let mut explored: u64 = 0;
    for r in results {
        let r = r?;
        explored = explored.saturating_add(r.explored);
        let Some(cand) = r.best else { continue };
        match &best {
            Some(b) if cand.0 < b.0 => {}
            Some(b) if cand.0 == b.0 => count = count.saturating_add(r.count),
            _ => {
                best = Some(cand);
                count = r.count;
            }
        }
    }
    let Some((welfare, branch, x)) = best else {
        return Ok(SolveResult::none(explored));
    };
    let program = CountProgram::new(instance, structure, branch)
        .ok_or_else(|| SdgError::Internal("optimal branch became infeasible".into()))?;
    let outcome = Outcome::new(instance, program.materialize(&x))?;
    if outcome.welfare() != welfare {
        return Err(SdgError::Internal(format!(
            "materialized welfare {} differs from objective {welfare}",
            outcome.welfare()
        )));
    }
    Ok(SolveResult {
        best: Some(outcome),
        welfare,
        optimal_count: u64::try_from(count).unwrap_or(u64::MAX),
        explored,
    })
}

/// Presence sets a block with cover positions `cover` can take.
fn block_presence_options(
    instance: &Instance,
    structure: &CoverStructure,
    cover: &[usize],
) -> Result<Vec<Vec<usize>>> {
    let mask = cover.iter().fold(0u64, |m, &p| m | 1 << p);
    let candidates: Vec<usize> = (0..structure.groups.len())
        .filter(|&g| structure.groups[g].signature_mask & mask != 0)
        .collect();
    if candidates.len() > MAX_CANDIDATE_GROUPS {
        return Err(SdgError::LimitExceeded {
            what: "groups adjacent to one cover block",
            actual: candidates.len(),
            limit: MAX_CANDIDATE_GROUPS,
        });
    }
    let delta = instance.scoring().delta() as u32;
    let mut out = Vec::new();
    for subset in 0u32..1 << candidates.len() {
        let present: Vec<usize> = (0..candidates.len())
            .filter(|&i| subset >> i & 1 == 1)
            .map(|i| candidates[i])
            .collect();
        let Some(td) = type_distances(instance, structure, cover, &present) else {
            continue;
        };
        if !instance.is_open() {
            let n = td.vertex_count();
            let nc = td.cover.len();
            let dist = |a: usize, b: usize| {
                if a < nc && b < nc {
                    td.cover_cover(a, b)
                } else if a < nc {
                    td.cover_group(a, b - nc)
                } else if b < nc {
                    td.cover_group(b, a - nc)
                } else {
                    td.group_group(a - nc, b - nc)
                }
            };
            let far = (0..n).any(|a| (a + 1..n).any(|b| dist(a, b).is_some_and(|d| d > delta)));
            if far {
                continue;
            }
        }
        out.push(present);
    }
    Ok(out)
}

fn solve_partition(
    instance: &Instance,
    structure: &CoverStructure,
    blocks: &[Vec<usize>],
    mode: SolveMode,
) -> Result<PartitionResult> {
    let options: Vec<Vec<Vec<usize>>> = blocks
        .iter()
        .map(|cover| block_presence_options(instance, structure, cover))
        .collect::<Result<_>>()?;
    let mut result = PartitionResult::default();
    let mut used = vec![0usize; structure.groups.len()];
    let mut chosen: Vec<Vec<usize>> = Vec::with_capacity(blocks.len());
    choose_presence(
        instance,
        structure,
        blocks,
        &options,
        mode,
        &mut used,
        &mut chosen,
        &mut result,
    );
    Ok(result)
}

#[allow(clippy::too_many_arguments)]
fn choose_presence(
    instance: &Instance,
    structure: &CoverStructure,
    blocks: &[Vec<usize>],
    options: &[Vec<Vec<usize>>],
    mode: SolveMode,
    used: &mut [usize],
    chosen: &mut Vec<Vec<usize>>,
    result: &mut PartitionResult,
) {
    let b = chosen.len();
    if b == blocks.len() {
        let branch = Branch {
            cover_partition: blocks.to_vec(),
            presence: chosen.clone(),
        };
        if let Some(program) = CountProgram::new(instance, structure, branch) {
            optimize_counts(instance, &program, mode, result);
        }
        return;
    }
    for present in &options[b] {
        if present
            .iter()
            .any(|&g| used[g] >= structure.groups[g].len())
        {
            continue;
        }
        for &g in present {
            used[g] += 1;
        }
        chosen.push(present.clone());
        choose_presence(
            instance, structure, blocks, options, mode, used, chosen, result,
        );
        chosen.pop();
        for &g in present {
            used[g] -= 1;
        }
    }
}

/// Exhaustive search over count vectors of one branch.
fn optimize_counts(
    instance: &Instance,
    program: &CountProgram<'_>,
    mode: SolveMode,
    result: &mut PartitionResult,
) {
    let vars = program.variables();
    let sizes = program.group_sizes();
    // same-group pairs sit at distance 2; with nothing scored there, at most
    // one agent per group and block
    let pair_cap = if instance.score_opt(Some(2)).is_finite() {
        usize::MAX
    } else {
        1
    };
    let mut later = vec![0usize; vars.len()];
    for v in (0..vars.len()).rev() {
        later[v] = vars[v + 1..].iter().filter(|w| w.1 == vars[v].1).count();
    }
    let mut used = vec![0usize; sizes.len()];
    let mut x = vec![0usize; vars.len()];
    #[allow(clippy::too_many_arguments)]
    fn rec(
        v: usize,
        program: &CountProgram<'_>,
        mode: SolveMode,
        sizes: &[usize],
        later: &[usize],
        pair_cap: usize,
        used: &mut [usize],
        x: &mut [usize],
        result: &mut PartitionResult,
    ) {
        let vars = program.variables();
        if v == vars.len() {
            result.explored += 1;
            let w = program.objective(x);
            if !w.is_finite() || w < result.threshold() {
                return;
            }
            if program.satisfies(x, mode) {
                result.offer(w, program.multiplicity(x), program, x);
            }
            return;
        }
        let g = vars[v].1;
        let max = (sizes[g] - used[g] - later[v]).min(pair_cap);
        for c in 1..=max {
            x[v] = c;
            used[g] += c;
            rec(
                v + 1,
                program,
                mode,
                sizes,
                later,
                pair_cap,
                used,
                x,
                result,
            );
            used[g] -= c;
        }
        x[v] = 0;
    }
    rec(
        0, program, mode, &sizes, &later, pair_cap, &mut used, &mut x, result,
    );
}
