use std::collections::VecDeque;

use proptest::prelude::*;

use sdg_core::model::{distances_within, member_utilities, utility, Coalition};
use sdg_core::oracle::{solve_exact_with, OracleOptions};
use sdg_core::stability::{is_individually_rational, is_nash_stable};
use sdg_core::treewidth::{
    build_nice_decomposition, validate_decomposition, NiceTreeDecomposition,
};
use sdg_core::{Distance, Instance, Outcome, ScoringVector, SolveMode, Welfare};

fn scoring_strategy() -> impl Strategy<Value = ScoringVector> {
    (-2i64..5, prop::collection::vec(0i64..4, 0..4)).prop_map(|(s1, drops)| {
        let mut entries = vec![s1];
        for d in drops {
            let last = *entries.last().unwrap();
            entries.push(last - d);
        }
        ScoringVector::new(entries).unwrap()
    })
}

fn instance_strategy(max_n: usize) -> impl Strategy<Value = Instance> {
    (1..=max_n)
        .prop_flat_map(|n| {
            let pairs = n * (n - 1) / 2;
            (
                Just(n),
                prop::collection::vec(any::<bool>(), pairs),
                scoring_strategy(),
                any::<bool>(),
            )
        })
        .prop_map(|(n, keep, s, open)| {
            let pairs = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b)));
            let edges: Vec<_> = pairs
                .zip(keep)
                .filter(|&(_, k)| k)
                .map(|(e, _)| e)
                .collect();
            Instance::new(n, edges, s, open).unwrap()
        })
}

fn with_assignment(max_n: usize) -> impl Strategy<Value = (Instance, Outcome)> {
    instance_strategy(max_n).prop_flat_map(|inst| {
        let n = inst.n();
        (Just(inst), prop::collection::vec(0..n, n)).prop_map(|(inst, labels)| {
            let out = Outcome::from_assignment(&inst, &labels).unwrap();
            (inst, out)
        })
    })
}

/// Breadth-first distances from `src` inside `members`, by plain adjacency
/// lookups.
fn naive_bfs(inst: &Instance, members: &[usize], src: usize) -> Vec<Option<u32>> {
    let mut dist = vec![None; inst.n()];
    dist[src] = Some(0);
    let mut queue = VecDeque::from([src]);
    while let Some(a) = queue.pop_front() {
        for &b in members {
            if dist[b].is_none() && inst.has_edge(a, b) {
                dist[b] = Some(dist[a].unwrap() + 1);
                queue.push_back(b);
            }
        }
    }
    dist
}

fn naive_utility(inst: &Instance, i: usize, members: &[usize]) -> Welfare {
    let dist = naive_bfs(inst, members, i);
    let s = inst.scoring().entries();
    let mut total = Welfare::ZERO;
    for &j in members.iter().filter(|&&j| j != i) {
        let d = dist[j].map(|d| d as usize);
        let score = match d {
            None => Welfare::NegInf,
            Some(d) if d <= s.len() => Welfare::Finite(s[d - 1]),
            Some(_) if inst.is_open() => Welfare::Finite(*s.last().unwrap()),
            Some(_) => Welfare::NegInf,
        };
        total = total + score;
    }
    total
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn welfare_is_even_and_sums_utilities((inst, out) in with_assignment(9)) {
        let w = out.welfare();
        if let Some(v) = w.finite() {
            prop_assert_eq!(v % 2, 0);
        }
        let sum = out
            .coalitions()
            .iter()
            .flat_map(|c| member_utilities(&inst, c))
            .fold(Welfare::ZERO, |a, b| a + b);
        prop_assert_eq!(sum, w);
    }

    #[test]
    fn nash_stable_implies_individually_rational((inst, out) in with_assignment(8)) {
        if is_nash_stable(&inst, &out) {
            prop_assert!(is_individually_rational(&inst, &out));
        }
    }

    #[test]
    fn distances_are_symmetric_and_match_bfs((inst, out) in with_assignment(9)) {
        for c in out.coalitions() {
            let m = distances_within(&inst, c);
            let members = c.members();
            for (p, &a) in members.iter().enumerate() {
                let naive = naive_bfs(&inst, members, a);
                for (q, &b) in members.iter().enumerate() {
                    prop_assert_eq!(m.at(p, q), m.at(q, p));
                    let expected = naive[b].map_or(Distance::Infinite, Distance::Finite);
                    prop_assert_eq!(m.at(p, q), expected);
                }
            }
        }
    }

    #[test]
    fn utility_matches_naive_evaluation((inst, out) in with_assignment(9)) {
        for c in out.coalitions() {
            for &i in c.members() {
                prop_assert_eq!(utility(&inst, i, c).unwrap(), naive_utility(&inst, i, c.members()));
            }
        }
    }

    #[test]
    fn pruning_does_not_change_optima(inst in instance_strategy(7)) {
        for mode in SolveMode::ALL {
            let pruned = solve_exact_with(&inst, mode, &OracleOptions::default()).unwrap();
            let full = solve_exact_with(
                &inst,
                mode,
                &OracleOptions { prune: false, ..OracleOptions::default() },
            )
            .unwrap();
            prop_assert_eq!(pruned.welfare, full.welfare);
            prop_assert_eq!(pruned.optimal_count, full.optimal_count);
        }
    }

    #[test]
    fn open_grand_coalition_is_optimal_for_non_negative_scores(inst in instance_strategy(7)) {
        let s = inst.scoring().entries().iter().map(|&v| v.max(0)).collect();
        let inst = inst.with_scoring(ScoringVector::new(s).unwrap()).with_open(true);
        prop_assume!(inst.is_connected());
        let best = solve_exact_with(&inst, SolveMode::Wf, &OracleOptions::default()).unwrap();
        let grand = Coalition::new((0..inst.n()).collect()).unwrap();
        let grand_welfare = member_utilities(&inst, &grand)
            .into_iter()
            .fold(Welfare::ZERO, |a, b| a + b);
        prop_assert_eq!(best.welfare, grand_welfare);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn decompositions_are_valid_and_round_trip(inst in instance_strategy(16)) {
        let td = build_nice_decomposition(&inst);
        prop_assert!(validate_decomposition(&inst, &td).is_empty());
        let json = serde_json::to_string(&td).unwrap();
        let back: NiceTreeDecomposition = serde_json::from_str(&json).unwrap();
        prop_assert!(validate_decomposition(&inst, &back).is_empty());
        prop_assert_eq!(back.width(), td.width());
        prop_assert_eq!(serde_json::to_string(&back).unwrap(), json);
    }
}
