//! Closed-form bounds on coalition size and diameter, used as solver caps.

use serde::{Serialize, Serializer};

use crate::model::{Instance, ScoringVector};
use crate::treewidth::build_nice_decomposition;

/// A bound that may be absent for a given instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bound {
    Value(u64),
    Unbounded,
    NotApplicable,
}

impl Bound {
    pub fn value(self) -> Option<u64> {
        match self {
            Bound::Value(v) => Some(v),
            _ => None,
        }
    }
}

impl Serialize for Bound {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Bound::Value(v) => serializer.serialize_u64(*v),
            Bound::Unbounded => serializer.serialize_str("unbounded"),
            Bound::NotApplicable => serializer.serialize_str("not_applicable"),
        }
    }
}

fn saturate(v: i128) -> u64 {
    v.clamp(0, u64::MAX as i128) as u64
}

fn pow_sat(base: i128, exp: usize) -> i128 {
    let mut acc: i128 = 1;
    for _ in 0..exp {
        acc = acc.saturating_mul(base);
    }
    acc
}

/// `(s1 + 1) * Δ * (Δ - 1)^(δ - 1)`; 1 when `Δ = 0`.
///
/// This is the degree-based size bound exactly as usually stated. It counts
/// only the agents at distance exactly `δ`, so it is not a sound coalition
/// size cap for `Δ <= 2` (a 6-cycle with `s = (1,1,-1,-1,-1,-1)` has bound 4
/// while its grand coalition gives everyone utility 3). Caps use
/// [`degree_ball_bound`] instead.
pub fn degree_size_bound(scoring: &ScoringVector, max_degree: usize) -> u64 {
    if max_degree == 0 {
        return 1;
    }
    let d = max_degree as i128;
    let v = (scoring.s1() as i128 + 1)
        .saturating_mul(d)
        .saturating_mul(pow_sat(d - 1, scoring.delta() - 1));
    saturate(v)
}

/// Largest number of other agents within distance `δ` of one agent in a graph
/// of maximum degree `Δ`: `Δ * sum_{t < δ} (Δ - 1)^t`.
pub fn ball_size(delta: usize, max_degree: usize) -> u64 {
    let d = max_degree as i128;
    let mut total: i128 = 0;
    for t in 0..delta {
        total = total.saturating_add(d.saturating_mul(pow_sat(d - 1, t)));
    }
    saturate(total)
}

/// Closed-mode size cap from the maximum degree: in a coalition larger than
/// `1 + ball_size` every member has some other member beyond distance `δ`,
/// so every utility is `-inf`.
pub fn degree_ball_bound(scoring: &ScoringVector, max_degree: usize) -> u64 {
    ball_size(scoring.delta(), max_degree).saturating_add(1)
}

/// `2 (s1 + 1) tw + 1` when `s2 < 0` (or `δ = 1`, where distance 2 is
/// already inadmissible): larger coalitions have negative total utility.
pub fn treewidth_size_bound(scoring: &ScoringVector, tw: usize) -> Bound {
    let applicable = scoring.get(2).is_none_or(|s2| s2 < 0);
    if !applicable {
        return Bound::NotApplicable;
    }
    let v = 2i128
        .saturating_mul(scoring.s1() as i128 + 1)
        .saturating_mul(tw as i128)
        .saturating_add(1);
    Bound::Value(saturate(v))
}

/// `2 * s1 * δ`: with an open scoring vector, no coalition of larger diameter
/// survives in an individually rational or Nash stable outcome.
pub fn ns_ir_diameter_bound(scoring: &ScoringVector) -> u64 {
    saturate(2 * scoring.s1() as i128 * scoring.delta() as i128)
}

/// Requested coalition size cap.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SizeCap {
    Auto,
    Fixed(usize),
}

/// Which argument produced an effective cap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CapSource {
    Requested,
    AgentCount,
    DegreeBall,
    Treewidth,
    NonPositiveS1,
    /// Open scoring vector: no size bound is known, so the cap is `n`.
    Unbounded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CapChoice {
    pub cap: usize,
    pub source: CapSource,
}

/// Resolves a requested cap. `Auto` yields the smallest size bound that
/// provably keeps every welfare-optimal outcome (and every optimal IR or NS
/// outcome); `tw_upper` is any upper bound on the treewidth.
pub fn effective_size_cap(instance: &Instance, requested: SizeCap, tw_upper: usize) -> CapChoice {
    let n = instance.n();
    if let SizeCap::Fixed(k) = requested {
        return CapChoice {
            cap: k,
            source: CapSource::Requested,
        };
    }
    if instance.is_open() {
        log::warn!("no coalition size bound is known for open scoring vectors; using n");
        return CapChoice {
            cap: n,
            source: CapSource::Unbounded,
        };
    }
    let scoring = instance.scoring();
    if scoring.s1() <= 0 {
        return CapChoice {
            cap: 1,
            source: CapSource::NonPositiveS1,
        };
    }
    let mut choice = CapChoice {
        cap: n,
        source: CapSource::AgentCount,
    };
    let candidates = [
        (
            Some(degree_ball_bound(scoring, instance.max_degree())),
            CapSource::DegreeBall,
        ),
        (
            treewidth_size_bound(scoring, tw_upper).value(),
            CapSource::Treewidth,
        ),
    ];
    for (bound, source) in candidates {
        if let Some(b) = bound {
            let b = usize::try_from(b).unwrap_or(usize::MAX).max(1);
            if b < choice.cap {
                choice = CapChoice { cap: b, source };
            }
        }
    }
    choice
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BoundsReport {
    pub degree_size_bound: Bound,
    pub tw_size_bound: Bound,
    pub wf_diameter_bound: Bound,
    pub ns_ir_diameter_bound: Bound,
    pub max_degree: usize,
    pub treewidth_upper: usize,
    pub effective_cap: CapChoice,
}

pub fn bounds_report(instance: &Instance) -> BoundsReport {
    let scoring = instance.scoring();
    let max_degree = instance.max_degree();
    let tw = build_nice_decomposition(instance).width();
    let open = instance.is_open();
    BoundsReport {
        degree_size_bound: if open {
            Bound::Unbounded
        } else {
            Bound::Value(degree_size_bound(scoring, max_degree))
        },
        tw_size_bound: if open {
            Bound::NotApplicable
        } else {
            treewidth_size_bound(scoring, tw)
        },
        wf_diameter_bound: if open {
            Bound::NotApplicable
        } else {
            Bound::Value(scoring.delta() as u64)
        },
        ns_ir_diameter_bound: if open {
            Bound::Value(ns_ir_diameter_bound(scoring))
        } else {
            Bound::NotApplicable
        },
        max_degree,
        treewidth_upper: tw,
        effective_cap: effective_size_cap(instance, SizeCap::Auto, tw),
    }
}
