use std::collections::VecDeque;

use crate::error::{Result, SdgError};
use crate::model::{Coalition, Distance, Instance, Outcome, Welfare};

/// Pairwise distances inside `G[C]`, indexed by position in `members`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceMatrix {
    members: Vec<usize>,
    dist: Vec<Distance>,
}

impl DistanceMatrix {
    pub fn members(&self) -> &[usize] {
        &self.members
    }

    /// Distance between the members at positions `p` and `q`.
    pub fn at(&self, p: usize, q: usize) -> Distance {
        self.dist[p * self.members.len() + q]
    }

    /// Distance between agents `i` and `j` (both members).
    pub fn between(&self, i: usize, j: usize) -> Option<Distance> {
        let p = self.members.binary_search(&i).ok()?;
        let q = self.members.binary_search(&j).ok()?;
        Some(self.at(p, q))
    }

    /// Largest pairwise distance (`Infinite` for a disconnected coalition).
    pub fn diameter(&self) -> Distance {
        self.dist
            .iter()
            .copied()
            .max()
            .unwrap_or(Distance::Finite(0))
    }
}

/// Shortest paths between members of `coalition` using only edges of `G[C]`.
pub fn distances_within(instance: &Instance, coalition: &Coalition) -> DistanceMatrix {
    let members = coalition.members().to_vec();
    let k = members.len();
    let mut dist = vec![Distance::Infinite; k * k];
    let pos = |a: usize| members.binary_search(&a).ok();
    for src in 0..k {
        let row = &mut dist[src * k..(src + 1) * k];
        row[src] = Distance::Finite(0);
        let mut queue = VecDeque::from([(src, 0u32)]);
        while let Some((p, d)) = queue.pop_front() {
            for &nb in instance.neighbors(members[p]) {
                if let Some(q) = pos(nb) {
                    if row[q] == Distance::Infinite {
                        row[q] = Distance::Finite(d + 1);
                        queue.push_back((q, d + 1));
                    }
                }
            }
        }
    }
    DistanceMatrix { members, dist }
}

/// Utility of agent `i` in coalition `C`: the sum of scores of its distances
/// to every other member inside `G[C]`.
pub fn utility(instance: &Instance, i: usize, coalition: &Coalition) -> Result<Welfare> {
    let p = coalition
        .members()
        .binary_search(&i)
        .map_err(|_| SdgError::Contract(format!("agent {i} is not in coalition {coalition}")))?;
    let dm = distances_within(instance, coalition);
    Ok(row_utility(instance, &dm, p))
}

fn row_utility(instance: &Instance, dm: &DistanceMatrix, p: usize) -> Welfare {
    (0..dm.members.len())
        .filter(|&q| q != p)
        .map(|q| {
            instance
                .score(dm.at(p, q))
                .expect("off-diagonal distances are positive")
        })
        .sum()
}

/// Utility of every member, in member order.
pub fn member_utilities(instance: &Instance, coalition: &Coalition) -> Vec<Welfare> {
    let dm = distances_within(instance, coalition);
    (0..dm.members.len())
        .map(|p| row_utility(instance, &dm, p))
        .collect()
}

/// Total utility of the members of one coalition.
pub fn coalition_welfare(instance: &Instance, coalition: &Coalition) -> Welfare {
    member_utilities(instance, coalition).into_iter().sum()
}

/// Social welfare of an outcome, recomputed from scratch.
pub fn welfare(instance: &Instance, outcome: &Outcome) -> Welfare {
    outcome
        .coalitions()
        .iter()
        .map(|c| coalition_welfare(instance, c))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ScoringVector;

    fn two_paths() -> Instance {
        // 0-1-2   3-4
        let s = ScoringVector::new(vec![2, -1]).unwrap();
        Instance::new(5, [(0, 1), (1, 2), (3, 4)], s, false).unwrap()
    }

    #[test]
    fn singleton_has_zero_utility_and_no_off_diagonal() {
        let g = two_paths();
        let c = Coalition::singleton(4);
        assert_eq!(utility(&g, 4, &c).unwrap(), Welfare::ZERO);
        let dm = distances_within(&g, &c);
        assert_eq!(dm.members(), &[4]);
        assert_eq!(dm.at(0, 0), Distance::Finite(0));
    }

    #[test]
    fn disconnected_coalition_is_infinite_across_components() {
        let g = two_paths();
        let c = Coalition::new(vec![0, 1, 3, 4]).unwrap();
        let dm = distances_within(&g, &c);
        assert_eq!(dm.between(0, 3), Some(Distance::Infinite));
        assert_eq!(dm.between(3, 4), Some(Distance::Finite(1)));
        assert_eq!(utility(&g, 0, &c).unwrap(), Welfare::NegInf);
    }

    #[test]
    fn induced_distances_ignore_outside_shortcuts() {
        let g = two_paths();
        let c = Coalition::new(vec![0, 2]).unwrap();
        assert_eq!(
            distances_within(&g, &c).between(0, 2),
            Some(Distance::Infinite)
        );
        let c = Coalition::new(vec![0, 1, 2]).unwrap();
        assert_eq!(utility(&g, 0, &c).unwrap(), Welfare::Finite(1));
        assert_eq!(utility(&g, 1, &c).unwrap(), Welfare::Finite(4));
        assert_eq!(coalition_welfare(&g, &c), Welfare::Finite(6));
    }

    #[test]
    fn utility_outside_coalition_is_a_contract_violation() {
        let g = two_paths();
        let c = Coalition::new(vec![0, 1]).unwrap();
        assert!(matches!(utility(&g, 2, &c), Err(SdgError::Contract(_))));
    }
}
