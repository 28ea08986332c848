//! Instances shared by the benchmarks.

use sdg_core::instances::{random_instance, random_partial_ktree, GraphFilter};
use sdg_core::{Instance, ScoringVector};

/// Partial 3-tree on 40 agents, the smoke instance for the dynamic program.
pub fn partial_3tree_40() -> Instance {
    random_partial_ktree(
        40,
        3,
        0.8,
        11,
        ScoringVector::new(vec![1, 1, -1]).expect("valid scoring"),
    )
}

/// Connected random graph on `n` agents.
pub fn connected(n: usize, seed: u64, scoring: &[i64]) -> Instance {
    let s = ScoringVector::new(scoring.to_vec()).expect("valid scoring");
    random_instance(n, 0.4, seed, s, false, GraphFilter::Connected)
}
