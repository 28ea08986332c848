//! IR- and NS-deviation detection.

use serde::{Deserialize, Serialize};

use crate::model::{member_utilities, utility, Instance, Outcome, Welfare};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DeviationKind {
    Ir,
    Ns,
}

/// Where a deviating agent goes: an existing coalition (index in canonical
/// outcome order) or a new singleton.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    Coalition(usize),
    Singleton,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Deviation {
    pub agent: usize,
    pub kind: DeviationKind,
    pub target: Target,
    pub utility_before: Welfare,
    pub utility_after: Welfare,
}

/// Utility of each agent in its own coalition, indexed by agent.
pub fn agent_utilities(instance: &Instance, outcome: &Outcome) -> Vec<Welfare> {
    let mut out = vec![Welfare::ZERO; instance.n()];
    for c in outcome.coalitions() {
        for (&a, u) in c.members().iter().zip(member_utilities(instance, c)) {
            out[a] = u;
        }
    }
    out
}

/// The lowest-id agent with negative utility, or `None` if the outcome is
/// individually rational.
pub fn find_ir_deviation(instance: &Instance, outcome: &Outcome) -> Option<Deviation> {
    agent_utilities(instance, outcome)
        .into_iter()
        .enumerate()
        .find(|&(_, u)| u < Welfare::ZERO)
        .map(|(agent, u)| Deviation {
            agent,
            kind: DeviationKind::Ir,
            target: Target::Singleton,
            utility_before: u,
            utility_after: Welfare::ZERO,
        })
}

/// Utility agent `i` would get after joining `target`, evaluated on
/// `target ∪ {i}` from scratch.
pub fn utility_after_move(
    instance: &Instance,
    outcome: &Outcome,
    i: usize,
    target: Target,
) -> Welfare {
    match target {
        Target::Singleton => Welfare::ZERO,
        Target::Coalition(k) => {
            let joined = outcome.coalitions()[k].with(i);
            utility(instance, i, &joined).expect("agent is a member after joining")
        }
    }
}

/// The improving move with the smallest `(agent, target)` pair, where targets
/// order as coalition indices first and the new singleton last; `None` if the
/// outcome is Nash stable.
pub fn find_ns_deviation(instance: &Instance, outcome: &Outcome) -> Option<Deviation> {
    let before = agent_utilities(instance, outcome);
    let count = outcome.coalitions().len();
    for (i, &u_before) in before.iter().enumerate() {
        let own = outcome.coalition_index_of(i);
        let own_is_singleton = outcome.coalitions()[own].len() == 1;
        let targets = (0..count)
            .filter(|&k| k != own)
            .map(Target::Coalition)
            .chain((!own_is_singleton).then_some(Target::Singleton));
        for target in targets {
            let after = utility_after_move(instance, outcome, i, target);
            if after > u_before {
                return Some(Deviation {
                    agent: i,
                    kind: DeviationKind::Ns,
                    target,
                    utility_before: u_before,
                    utility_after: after,
                });
            }
        }
    }
    None
}

pub fn is_individually_rational(instance: &Instance, outcome: &Outcome) -> bool {
    find_ir_deviation(instance, outcome).is_none()
}

pub fn is_nash_stable(instance: &Instance, outcome: &Outcome) -> bool {
    find_ns_deviation(instance, outcome).is_none()
}
