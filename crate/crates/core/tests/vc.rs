use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sdg_core::instances::{make_lemma2, make_lemma3, random_instance, GraphFilter};
use sdg_core::model::{Instance, Outcome, ScoringVector, Welfare};
use sdg_core::oracle::{solve_exact, DEFAULT_LIMIT_N};
use sdg_core::vc::{
    compute_vertex_cover, cover_partitions, group_signatures, is_vertex_cover, solve_vc,
    type_distances, Branch, CountProgram,
};
use sdg_core::SolveMode;

fn scoring(s: &[i64]) -> ScoringVector {
    ScoringVector::new(s.to_vec()).unwrap()
}

fn star(m: usize, s: &[i64]) -> Instance {
    Instance::new(m + 1, (1..=m).map(|i| (0, i)), scoring(s), false).unwrap()
}

#[test]
fn lemma3_cover_is_minimum() {
    let f = make_lemma3();
    let c = compute_vertex_cover(&f.instance);
    assert!(c.len() <= 6);
    let n = f.instance.n();
    let smaller = (0u32..1 << n)
        .filter(|m| (m.count_ones() as usize) < c.len())
        .any(|m| {
            is_vertex_cover(
                &f.instance,
                &(0..n).filter(|&v| m >> v & 1 == 1).collect::<Vec<_>>(),
            )
        });
    assert!(!smaller);
}

#[test]
fn fixtures_match_known_optima() {
    let l2 = make_lemma2();
    let r = solve_vc(&l2.instance, SolveMode::Wf).unwrap();
    assert_eq!(r.welfare, Welfare::Finite(62));
    assert_eq!(r.optimal_count, 1);
    let l3 = make_lemma3();
    assert_eq!(
        solve_vc(&l3.instance, SolveMode::WfIr).unwrap().welfare,
        Welfare::Finite(48)
    );
    assert_eq!(
        solve_vc(&l3.instance, SolveMode::WfNs).unwrap().welfare,
        Welfare::Finite(46)
    );
}

#[test]
fn stars() {
    for m in 1..=20 {
        let inst = star(m, &[1, -1]);
        let r = solve_vc(&inst, SolveMode::Wf).unwrap();
        // one block: centre plus t leaves, welfare 2(t - t(t-1)/2)
        let closed_form = (0..=m as i64)
            .map(|t| 2 * (t - t * (t - 1) / 2))
            .max()
            .unwrap();
        assert_eq!(r.welfare, Welfare::Finite(closed_form), "m = {m}");
        if m <= 8 {
            for mode in SolveMode::ALL {
                let o = solve_exact(&inst, mode, DEFAULT_LIMIT_N).unwrap();
                let v = solve_vc(&inst, mode).unwrap();
                assert_eq!(
                    (v.welfare, v.optimal_count),
                    (o.welfare, o.optimal_count),
                    "m = {m} {mode}"
                );
            }
        }
    }
}

#[test]
fn matches_oracle_on_small_graphs() {
    let pool: [&[i64]; 4] = [&[1], &[1, -1], &[2, 1, -1], &[1, 1, -1, -1, -1, -1]];
    let mut checked = 0;
    for seed in 0..400u64 {
        let n = 3 + (seed % 6) as usize;
        let p = [0.25, 0.4, 0.6][(seed % 3) as usize];
        let open = seed % 5 == 2;
        let inst = random_instance(
            n,
            p,
            seed,
            scoring(pool[(seed % 4) as usize]),
            open,
            GraphFilter::None,
        );
        if compute_vertex_cover(&inst).len() > 4 {
            continue;
        }
        checked += 1;
        for mode in SolveMode::ALL {
            let o = solve_exact(&inst, mode, DEFAULT_LIMIT_N).unwrap();
            let v = solve_vc(&inst, mode).unwrap();
            assert_eq!(
                v.welfare,
                o.welfare,
                "seed {seed} {mode} {:?}",
                inst.edges()
            );
            if inst.scoring().s1() > 0 {
                assert_eq!(v.optimal_count, o.optimal_count, "seed {seed} {mode}");
            }
            if let Some(best) = &v.best {
                assert!(mode.admits(&inst, best));
            }
        }
    }
    assert!(checked > 100, "{checked}");
}

/// Random branch of a random instance, with a random feasible count vector.
fn random_program_case(
    seed: u64,
) -> Option<(Instance, sdg_core::vc::CoverStructure, Branch, Vec<usize>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s: &[i64] = [&[2, 1, -1][..], &[1, -1], &[3, 1, 0, -2]][rng.gen_range(0..3)];
    let open = rng.gen_bool(0.3);
    let inst = random_instance(
        rng.gen_range(4..10),
        0.35,
        seed,
        scoring(s),
        open,
        GraphFilter::None,
    );
    let cover = compute_vertex_cover(&inst);
    if cover.is_empty() || cover.len() > 5 {
        return None;
    }
    let structure = group_signatures(&inst, &cover).unwrap();
    let partitions = cover_partitions(cover.len());
    let blocks = partitions[rng.gen_range(0..partitions.len())].clone();
    let mut used = vec![0usize; structure.groups.len()];
    let mut presence = Vec::new();
    for block in &blocks {
        let mask = block.iter().fold(0u64, |m, &p| m | 1 << p);
        let mut present = Vec::new();
        for (g, group) in structure.groups.iter().enumerate() {
            if group.signature_mask & mask != 0 && used[g] < group.len() && rng.gen_bool(0.6) {
                used[g] += 1;
                present.push(g);
            }
        }
        presence.push(present);
    }
    let branch = Branch {
        cover_partition: blocks,
        presence,
    };
    let program = CountProgram::new(&inst, &structure, branch.clone())?;
    // spread spare agents of each group at random
    let mut spare: Vec<usize> = structure
        .groups
        .iter()
        .zip(&used)
        .map(|(g, &u)| g.len() - u)
        .collect();
    let x: Vec<usize> = program
        .variables()
        .iter()
        .map(|&(_, g)| {
            let extra = rng.gen_range(0..=spare[g]);
            spare[g] -= extra;
            1 + extra
        })
        .collect();
    assert!(program.is_feasible(&x));
    Some((inst, structure, branch, x))
}

#[test]
fn objective_and_constraints_agree_with_materialized_outcomes() {
    let mut cases = 0;
    for seed in 0..600u64 {
        let Some((inst, structure, branch, x)) = random_program_case(seed) else {
            continue;
        };
        let program = CountProgram::new(&inst, &structure, branch).unwrap();
        let outcome = Outcome::new(&inst, program.materialize(&x)).unwrap();
        assert_eq!(program.objective(&x), outcome.welfare(), "seed {seed}");
        for mode in SolveMode::ALL {
            assert_eq!(
                program.satisfies(&x, mode),
                mode.admits(&inst, &outcome),
                "seed {seed} {mode} {outcome}"
            );
        }
        cases += 1;
    }
    assert!(cases > 150, "{cases}");
}

#[test]
fn type_distances_are_count_independent() {
    let mut cases = 0;
    for seed in 0..600u64 {
        let Some((inst, structure, branch, x)) = random_program_case(seed) else {
            continue;
        };
        let program = CountProgram::new(&inst, &structure, branch.clone()).unwrap();
        let groups = program.materialize(&x);
        for (b, td) in program.blocks().iter().enumerate() {
            let coalition = &groups[b];
            let sub = inst.induced(coalition);
            let local = |a: usize| coalition.iter().position(|&c| c == a).unwrap();
            let dist = sdg_core::model::distances_within(
                &sub,
                &sdg_core::model::Coalition::new((0..sub.n()).collect()).unwrap(),
            );
            let d = |a: usize, c: usize| dist.at(local(a), local(c)).finite();
            let rebuilt = type_distances(&inst, &structure, &td.cover, &td.groups).unwrap();
            assert_eq!(&rebuilt, td);
            for (i, &pi) in td.cover.iter().enumerate() {
                for (j, &pj) in td.cover.iter().enumerate() {
                    if i != j {
                        assert_eq!(
                            td.cover_cover(i, j),
                            d(structure.cover[pi], structure.cover[pj])
                        );
                    }
                }
                for (g, &group) in td.groups.iter().enumerate() {
                    for &a in coalition
                        .iter()
                        .filter(|a| structure.groups[group].members.contains(a))
                    {
                        assert_eq!(td.cover_group(i, g), d(structure.cover[pi], a));
                    }
                }
            }
            for (g, &gg) in td.groups.iter().enumerate() {
                for (h, &hh) in td.groups.iter().enumerate() {
                    for &a in coalition
                        .iter()
                        .filter(|a| structure.groups[gg].members.contains(a))
                    {
                        for &c in coalition
                            .iter()
                            .filter(|c| structure.groups[hh].members.contains(c))
                        {
                            if a != c {
                                assert_eq!(td.group_group(g, h), d(a, c), "seed {seed}");
                            }
                        }
                    }
                }
            }
        }
        cases += 1;
    }
    assert!(cases > 150);
}

#[test]
fn cover_guard_is_enforced() {
    let k6: Vec<(usize, usize)> = (0..10)
        .flat_map(|a| (a + 1..10).map(move |b| (a, b)))
        .collect();
    let inst = Instance::new(10, k6, scoring(&[1]), false).unwrap();
    let err = solve_vc(&inst, SolveMode::Wf).unwrap_err();
    assert!(err.to_string().contains("vertex cover"), "{err}");
}
