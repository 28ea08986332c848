//! Shared solver vocabulary: modes, results and per-component assembly.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SdgError};
use crate::model::{Instance, Outcome, Welfare};
use crate::stability::{is_individually_rational, is_nash_stable};

/// Which outcomes compete: all, individually rational ones, or Nash stable ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SolveMode {
    #[serde(rename = "wf")]
    Wf,
    #[serde(rename = "wf-ir")]
    WfIr,
    #[serde(rename = "wf-ns")]
    WfNs,
}

impl SolveMode {
    pub const ALL: [SolveMode; 3] = [SolveMode::Wf, SolveMode::WfIr, SolveMode::WfNs];

    /// Whether `outcome` satisfies this mode's stability requirement.
    pub fn admits(self, instance: &Instance, outcome: &Outcome) -> bool {
        match self {
            SolveMode::Wf => true,
            SolveMode::WfIr => is_individually_rational(instance, outcome),
            SolveMode::WfNs => is_nash_stable(instance, outcome),
        }
    }
}

impl fmt::Display for SolveMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolveMode::Wf => "wf",
            SolveMode::WfIr => "wf-ir",
            SolveMode::WfNs => "wf-ns",
        })
    }
}

impl FromStr for SolveMode {
    type Err = SdgError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "wf" => Ok(SolveMode::Wf),
            "wf-ir" => Ok(SolveMode::WfIr),
            "wf-ns" => Ok(SolveMode::WfNs),
            other => Err(SdgError::Parse(format!("unknown mode {other:?}"))),
        }
    }
}

/// Best outcome found, its welfare, how many outcomes attain it, and how much
/// of the search space was visited.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SolveResult {
    pub best: Option<Outcome>,
    pub welfare: Welfare,
    pub optimal_count: u64,
    pub explored: u64,
}

impl SolveResult {
    pub fn none(explored: u64) -> Self {
        SolveResult {
            best: None,
            welfare: Welfare::NegInf,
            optimal_count: 0,
            explored,
        }
    }
}

/// Solves each connected component with `solve_one` and stitches the
/// per-component optima into one outcome. Welfare adds, optimal counts
/// multiply; a component without a feasible outcome makes the whole instance
/// infeasible.
pub fn solve_by_components<F>(instance: &Instance, mut solve_one: F) -> Result<SolveResult>
where
    F: FnMut(&Instance) -> Result<SolveResult>,
{
    let components = instance.components();
    if components.len() == 1 {
        return solve_one(instance);
    }
    let mut coalitions = Vec::new();
    let mut count: u64 = 1;
    let mut explored: u64 = 0;
    let mut feasible = true;
    for comp in &components {
        let sub = instance.induced(comp);
        let res = solve_one(&sub)?;
        explored = explored.saturating_add(res.explored);
        match res.best {
            Some(best) => {
                count = count.saturating_mul(res.optimal_count);
                coalitions.extend(
                    best.coalitions()
                        .iter()
                        .map(|c| c.members().iter().map(|&a| comp[a]).collect::<Vec<_>>()),
                );
            }
            None => feasible = false,
        }
    }
    if !feasible {
        return Ok(SolveResult::none(explored));
    }
    let best = Outcome::new(instance, coalitions)?;
    Ok(SolveResult {
        welfare: best.welfare(),
        best: Some(best),
        optimal_count: count,
        explored,
    })
}

/// Result for `s_1 <= 0`: no coalition can have positive welfare, so the
/// all-singletons outcome is optimal in every mode. The count reports only
/// this witness.
pub(crate) fn trivial_singletons(instance: &Instance) -> Option<SolveResult> {
    if instance.scoring().s1() > 0 {
        return None;
    }
    let best = Outcome::singletons(instance);
    debug_assert!(is_nash_stable(instance, &best));
    Some(SolveResult {
        welfare: best.welfare(),
        best: Some(best),
        optimal_count: 1,
        explored: 1,
    })
}
