//! Acceptance suite. Runs as a plain binary and prints one PASS/FAIL line per
//! criterion; exits non-zero if any criterion fails.

use std::cell::RefCell;
use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sdg_core::bounds::{degree_size_bound, ns_ir_diameter_bound, treewidth_size_bound, SizeCap};
use sdg_core::dp::{solve_dp, solve_dp_auto};
use sdg_core::instances::{
    all_two_triangle_graphs, is_three_colorable, make_lemma2, make_lemma3, random_bounded_degree,
    random_instance, random_partial_ktree, random_tree, reduce_3ctcg, GraphFilter,
};
use sdg_core::model::{distances_within, member_utilities, utility, Coalition};
use sdg_core::oracle::{solve_exact, OracleOptions, PartitionSpace, DEFAULT_LIMIT_N};
use sdg_core::stability::{
    find_ir_deviation, is_individually_rational, is_nash_stable, utility_after_move, Target,
};
use sdg_core::treewidth::{build_nice_decomposition, validate_decomposition};
use sdg_core::vc::solve_vc;
use sdg_core::{Instance, Outcome, ScoringVector, SdgError, SolveMode, SolveResult, Welfare};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

/// Tally for the parity and NS-implies-IR invariants over every outcome the
/// suite looks at.
#[derive(Default)]
struct Invariants {
    touched: u64,
    violations: Vec<String>,
}

thread_local! {
    static INVARIANTS: RefCell<Invariants> = RefCell::new(Invariants::default());
}

fn note_violation(msg: String) {
    INVARIANTS.with(|inv| {
        let mut inv = inv.borrow_mut();
        if inv.violations.len() < 10 {
            inv.violations.push(msg);
        }
    });
}

fn touch_outcome(instance: &Instance, outcome: &Outcome) {
    let w = outcome.welfare();
    if let Some(v) = w.finite() {
        if v % 2 != 0 {
            note_violation(format!("odd welfare {v} for {:?}", outcome.to_vecs()));
        }
    }
    if is_nash_stable(instance, outcome) && !is_individually_rational(instance, outcome) {
        note_violation(format!("NS but not IR: {:?}", outcome.to_vecs()));
    }
    INVARIANTS.with(|inv| inv.borrow_mut().touched += 1);
}

fn touch_result(instance: &Instance, res: &SolveResult) {
    if let Some(best) = &res.best {
        touch_outcome(instance, best);
    }
}

fn touch_blocks(space: &PartitionSpace, blocks: &[u64], w: Welfare) {
    if let Some(v) = w.finite() {
        if v % 2 != 0 {
            note_violation(format!("odd welfare {v} for blocks {blocks:?}"));
        }
    }
    if space.is_ns(blocks) && !space.is_ir(blocks) {
        note_violation(format!("NS but not IR: blocks {blocks:?}"));
    }
    INVARIANTS.with(|inv| inv.borrow_mut().touched += 1);
}

fn scoring(v: &[i64]) -> ScoringVector {
    ScoringVector::new(v.to_vec()).expect("valid scoring vector")
}

fn outcome(instance: &Instance, coalitions: Vec<Vec<usize>>) -> Outcome {
    Outcome::new(instance, coalitions).expect("valid partition")
}

fn within(elapsed: Duration, limit: Duration, what: &str) -> Result<(), String> {
    ensure!(elapsed < limit, "{what} took {elapsed:?}, limit {limit:?}");
    Ok(())
}

fn lemma2() -> Check {
    let fx = make_lemma2();
    let inst = &fx.instance;
    let x = fx.agent("x");
    let start = Instant::now();
    let res = solve_exact(inst, SolveMode::Wf, DEFAULT_LIMIT_N).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    touch_result(inst, &res);
    ensure!(res.welfare == Welfare::Finite(62), "WF = {:?}", res.welfare);
    ensure!(
        res.optimal_count == 1,
        "optimal_count = {}",
        res.optimal_count
    );
    let grand = Outcome::grand(inst);
    ensure!(
        res.best.as_ref() == Some(&grand),
        "optimum is not the grand coalition"
    );
    let ux = utility(inst, x, &grand.coalitions()[0]).map_err(|e| e.to_string())?;
    ensure!(ux == Welfare::Finite(-1), "utility(x, grand) = {ux:?}");
    let rest: Vec<usize> = (0..inst.n()).filter(|&a| a != x).collect();
    let split = outcome(inst, vec![vec![x], rest]);
    touch_outcome(inst, &split);
    touch_outcome(inst, &grand);
    ensure!(
        split.welfare() == Welfare::Finite(60),
        "welfare({{x}}, rest) = {:?}",
        split.welfare()
    );
    let dev = find_ir_deviation(inst, &grand);
    ensure!(
        dev.as_ref().map(|d| d.agent) == Some(x),
        "grand coalition IR deviation: {dev:?}"
    );
    ensure!(
        res.explored <= 115_975,
        "explored {} partitions",
        res.explored
    );
    within(elapsed, Duration::from_secs(10), "oracle")?;
    Ok(format!(
        "WF 62 (count 1, grand), u(x) = -1, ({{x}}, rest) = 60, IR fails at x, {} partitions in {elapsed:.2?}",
        res.explored
    ))
}

fn lemma3() -> Check {
    let fx = make_lemma3();
    let inst = &fx.instance;
    let (x, y) = (fx.agent("x"), fx.agent("y"));
    let start = Instant::now();
    let res = solve_exact(inst, SolveMode::WfIr, DEFAULT_LIMIT_N).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    touch_result(inst, &res);
    let c: Vec<usize> = (0..inst.n()).filter(|&a| a != y).collect();
    let ir_opt = outcome(inst, vec![c.clone(), vec![y]]);
    ensure!(
        res.welfare == Welfare::Finite(48),
        "WF_IR = {:?}",
        res.welfare
    );
    ensure!(
        res.optimal_count == 1,
        "optimal_count = {}",
        res.optimal_count
    );
    ensure!(
        res.best.as_ref() == Some(&ir_opt),
        "optimum is not ({{y}}, C)"
    );
    let to_y = Target::Coalition(ir_opt.coalition_index_of(y));
    let before = utility(inst, x, ir_opt.coalition_of(x)).map_err(|e| e.to_string())?;
    let after = utility_after_move(inst, &ir_opt, x, to_y);
    ensure!(
        after == Welfare::Finite(1) && after > before,
        "x moving to y: before {before:?}, after {after:?}"
    );
    ensure!(
        !is_nash_stable(inst, &ir_opt),
        "({{y}}, C) reported Nash stable"
    );
    let c_minus_x: Vec<usize> = c.iter().copied().filter(|&a| a != x).collect();
    let pair = outcome(inst, vec![vec![x, y], c_minus_x]);
    touch_outcome(inst, &pair);
    ensure!(
        is_nash_stable(inst, &pair),
        "({{x,y}}, C - x) is not Nash stable"
    );
    ensure!(
        pair.welfare() == Welfare::Finite(46),
        "welfare({{x,y}}, C - x) = {:?}",
        pair.welfare()
    );
    let grand = Outcome::grand(inst);
    touch_outcome(inst, &grand);
    let uy = utility(inst, y, &grand.coalitions()[0]).map_err(|e| e.to_string())?;
    ensure!(uy == Welfare::Finite(-3), "utility(y, grand) = {uy:?}");
    within(elapsed, Duration::from_secs(10), "oracle")?;
    Ok(format!(
        "WF_IR 48 (count 1, ({{y}}, C)), x -> y gives 1, ({{x,y}}, C - x) NS at 46, u(y, grand) = -3, {elapsed:.2?}"
    ))
}

fn separations() -> Check {
    let solve = |inst: &Instance, mode| -> Result<Welfare, String> {
        let res = solve_exact(inst, mode, DEFAULT_LIMIT_N).map_err(|e| e.to_string())?;
        touch_result(inst, &res);
        Ok(res.welfare)
    };
    let l2 = make_lemma2().instance;
    let l3 = make_lemma3().instance;
    let (wf, wf_ir) = (solve(&l2, SolveMode::Wf)?, solve(&l2, SolveMode::WfIr)?);
    let (ir3, ns3) = (solve(&l3, SolveMode::WfIr)?, solve(&l3, SolveMode::WfNs)?);
    ensure!(
        wf == Welfare::Finite(62) && wf_ir == Welfare::Finite(60),
        "lemma2: WF {wf:?}, WF_IR {wf_ir:?}"
    );
    ensure!(
        ir3 == Welfare::Finite(48) && ns3 == Welfare::Finite(46),
        "lemma3: WF_IR {ir3:?}, WF_NS {ns3:?}"
    );
    Ok("lemma2 WF 62 > WF_IR 60; lemma3 WF_IR 48 > WF_NS 46".into())
}

fn cross_solver() -> Check {
    let vectors: [&[i64]; 4] = [&[1], &[1, -1], &[2, 1, -1], &[1, 1, -1, -1, -1, -1]];
    let densities = [0.3, 0.45, 0.6, 0.8];
    let start = Instant::now();
    let mut graphs = 0;
    let mut runs = 0u64;
    for g in 0..220u64 {
        let n = 2 + (g % 6) as usize;
        let p = densities[(g / 6 % 4) as usize];
        let base = random_instance(
            n,
            p,
            1_000 + g,
            scoring(&[1]),
            false,
            GraphFilter::Connected,
        );
        graphs += 1;
        for v in vectors {
            let inst = base.with_scoring(scoring(v));
            for mode in SolveMode::ALL {
                let oracle =
                    solve_exact(&inst, mode, DEFAULT_LIMIT_N).map_err(|e| e.to_string())?;
                let others = [
                    ("dp cap=n", solve_dp_auto(&inst, mode, SizeCap::Fixed(n))),
                    ("dp cap=auto", solve_dp_auto(&inst, mode, SizeCap::Auto)),
                    ("vc", solve_vc(&inst, mode)),
                ];
                touch_result(&inst, &oracle);
                for (name, res) in others {
                    let res = res.map_err(|e| format!("{name} on graph {g}: {e}"))?;
                    touch_result(&inst, &res);
                    ensure!(
                        res.welfare == oracle.welfare,
                        "graph {g} (n={n}, s={v:?}, {mode}): {name} {:?} vs oracle {:?}",
                        res.welfare,
                        oracle.welfare
                    );
                    if let Some(best) = &res.best {
                        ensure!(
                            best.welfare() == res.welfare && mode.admits(&inst, best),
                            "graph {g} ({mode}): {name} returned an inadmissible outcome"
                        );
                    }
                    runs += 1;
                }
            }
        }
    }
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(600), "pool")?;
    Ok(format!(
        "{graphs} graphs x 4 vectors x 3 modes, {runs} solver runs match the oracle in {elapsed:.2?}"
    ))
}

/// A connected coalition of `size` agents grown from a random seed agent.
fn sample_connected(inst: &Instance, size: usize, rng: &mut ChaCha8Rng) -> Coalition {
    let mut members = BTreeSet::new();
    members.insert(rng.gen_range(0..inst.n()));
    while members.len() < size {
        let frontier: Vec<usize> = members
            .iter()
            .flat_map(|&a| inst.neighbors(a).iter().copied())
            .filter(|b| !members.contains(b))
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let next = *frontier.choose(rng).expect("graph is connected");
        members.insert(next);
    }
    Coalition::new(members.into_iter().collect()).expect("non-empty coalition")
}

fn size_bounds() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut degree_samples = 0;
    let mut neg_inf = 0;
    let degree_vectors: [&[i64]; 4] = [&[1], &[1, -1], &[2, 1, -1], &[1, 0, -1, -2]];
    for max_degree in [3usize, 4] {
        for (k, v) in degree_vectors.iter().enumerate() {
            let s = scoring(v);
            let bound = degree_size_bound(&s, max_degree) as usize;
            let n = (2 * bound + 10).max(60);
            let inst = random_bounded_degree(n, max_degree, n, 40 + k as u64, s);
            for _ in 0..125 {
                let size = rng.gen_range(bound + 1..=(2 * bound).min(n));
                let c = sample_connected(&inst, size, &mut rng);
                let utils = member_utilities(&inst, &c);
                ensure!(
                    utils.iter().all(|&u| u < Welfare::ZERO),
                    "degree bound {bound} (s={v:?}, max degree {max_degree}): coalition of {size} has a non-negative member"
                );
                neg_inf += utils.iter().filter(|u| !u.is_finite()).count();
                degree_samples += 1;
            }
        }
    }
    let tree_vectors: [&[i64]; 4] = [&[1, -1], &[3, -1], &[2, -1, -2], &[1, -2, -3]];
    let mut tree_samples = 0;
    for open in [false, true] {
        for (k, v) in tree_vectors.iter().enumerate() {
            let s = scoring(v);
            let bound = treewidth_size_bound(&s, 1)
                .value()
                .expect("s2 < 0 makes the bound applicable") as usize;
            let n = bound + 40;
            let inst = random_tree(n, 70 + k as u64, s, open);
            for _ in 0..125 {
                let size = rng.gen_range(bound + 1..=bound + 20);
                let c = sample_connected(&inst, size, &mut rng);
                let total = member_utilities(&inst, &c)
                    .into_iter()
                    .fold(Welfare::ZERO, |a, b| a + b);
                ensure!(
                    total < Welfare::ZERO,
                    "tree bound {bound} (s={v:?}, open={open}): coalition of {size} has total {total:?}"
                );
                tree_samples += 1;
            }
        }
    }
    Ok(format!(
        "{degree_samples} bounded-degree coalitions all-negative ({neg_inf} -inf utilities), {tree_samples} tree coalitions negative-sum"
    ))
}

fn diameter_bound() -> Check {
    let vectors: [&[i64]; 2] = [&[1, -1], &[2, 1, -1]];
    let mut graphs = Vec::new();
    for n in 2..=12 {
        let edges: Vec<(usize, usize)> = (1..n).map(|i| (i - 1, i)).collect();
        graphs.push(Instance::new(n, edges, scoring(&[1]), true).expect("path"));
    }
    for seed in 0..30u64 {
        let n = 4 + (seed % 9) as usize;
        graphs.push(random_tree(n, 200 + seed, scoring(&[1]), true));
    }
    let opts = OracleOptions::default();
    let (mut ir_count, mut ns_count, mut max_diam) = (0u64, 0u64, 0u32);
    for g in &graphs {
        for v in vectors {
            let inst = g.with_scoring(scoring(v));
            let bound = ns_ir_diameter_bound(inst.scoring());
            let space = PartitionSpace::new(&inst, &opts).map_err(|e| e.to_string())?;
            let mut failure = None;
            space.for_each(|blocks, w| {
                touch_blocks(&space, blocks, w);
                let ir = space.is_ir(blocks);
                let ns = ir && space.is_ns(blocks);
                if !ir {
                    return;
                }
                ir_count += 1;
                ns_count += ns as u64;
                let out = space.to_outcome(blocks).expect("valid partition");
                for c in out.coalitions() {
                    let d = distances_within(&inst, c)
                        .diameter()
                        .finite()
                        .expect("coalitions are connected");
                    max_diam = max_diam.max(d);
                    if u64::from(d) > bound && failure.is_none() {
                        failure = Some(format!(
                            "n={} s={v:?}: coalition {:?} has diameter {d} > {bound}",
                            inst.n(),
                            c.members()
                        ));
                    }
                }
            });
            if let Some(f) = failure {
                return Err(f);
            }
        }
    }
    Ok(format!(
        "{} graphs x 2 vectors: {ir_count} IR and {ns_count} NS outcomes within 2*s1*delta (max diameter {max_diam})",
        graphs.len()
    ))
}

fn reduction() -> Check {
    let mut colorable = 0;
    let mut total = 0;
    let mut optima = 0u64;
    for g in all_two_triangle_graphs() {
        let is_col = is_three_colorable(g.vertices, &g.edges);
        colorable += is_col as usize;
        for s1 in [1i64, 2] {
            let (inst, b) = reduce_3ctcg(&g, s1).map_err(|e| e.to_string())?;
            ensure!(b == 6 * s1, "threshold {b} for s1 = {s1}");
            let res =
                solve_exact(&inst, SolveMode::Wf, DEFAULT_LIMIT_N).map_err(|e| e.to_string())?;
            touch_result(&inst, &res);
            let reaches = res.welfare >= Welfare::Finite(b);
            ensure!(
                reaches == is_col,
                "edges {:?}, s1 = {s1}: colorable {is_col}, WF {:?}",
                g.edges,
                res.welfare
            );
            let space =
                PartitionSpace::new(&inst, &OracleOptions::default()).map_err(|e| e.to_string())?;
            let mut failure = None;
            space.for_each(|blocks, w| {
                touch_blocks(&space, blocks, w);
                if w >= Welfare::Finite(b) && w == res.welfare {
                    optima += 1;
                    if !(space.is_ir(blocks) && space.is_ns(blocks)) && failure.is_none() {
                        failure = Some(format!(
                            "edges {:?}: optimum {blocks:?} is not stable",
                            g.edges
                        ));
                    }
                }
            });
            if let Some(f) = failure {
                return Err(f);
            }
            total += 1;
        }
    }
    Ok(format!(
        "{total} reductions ({colorable} of 512 graphs colorable), {optima} b-achieving optima all IR and NS"
    ))
}

fn treewidth_smoke() -> Check {
    let inst = random_partial_ktree(40, 3, 0.8, 11, scoring(&[1, 1, -1]));
    let td = build_nice_decomposition(&inst);
    ensure!(
        validate_decomposition(&inst, &td).is_empty(),
        "invalid decomposition"
    );
    ensure!(td.width() <= 3, "decomposition width {}", td.width());
    let start = Instant::now();
    let res = solve_dp(&inst, SolveMode::Wf, SizeCap::Fixed(3), &td).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    touch_result(&inst, &res);
    let best = res.best.as_ref().ok_or("dp found no outcome")?;
    ensure!(
        best.welfare() == res.welfare,
        "reconstructed welfare differs"
    );
    ensure!(
        best.coalitions().iter().all(|c| c.len() <= 3),
        "coalition above the cap"
    );
    within(elapsed, Duration::from_secs(60), "dp")?;
    let largest = inst.components().iter().map(Vec::len).max().unwrap_or(0);
    match solve_exact(&inst, SolveMode::Wf, DEFAULT_LIMIT_N) {
        Err(SdgError::LimitExceeded { .. }) => {}
        other => return Err(format!("oracle did not refuse: {other:?}")),
    }
    Ok(format!(
        "n=40 width {} cap 3: welfare {:?} in {elapsed:.2?}; oracle refuses (largest component {largest})",
        td.width(),
        res.welfare.finite().unwrap_or(i64::MIN)
    ))
}

fn invariants() -> Check {
    INVARIANTS.with(|inv| {
        let inv = inv.borrow();
        ensure!(inv.touched > 0, "no outcomes were touched");
        ensure!(
            inv.violations.is_empty(),
            "violations: {:?}",
            inv.violations
        );
        Ok(format!(
            "{} outcomes: welfare even or -inf, NS implies IR",
            inv.touched
        ))
    })
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("lemma2 fixture", lemma2),
        ("lemma3 fixture", lemma3),
        ("mode separations", separations),
        ("cross-solver equivalence", cross_solver),
        ("coalition size bounds", size_bounds),
        ("open-mode diameter bound", diameter_bound),
        ("3-colouring reduction", reduction),
        ("treewidth smoke benchmark", treewidth_smoke),
        ("parity and NS => IR", invariants),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let outcome =
            catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".to_string()));
        match outcome {
            Ok(detail) => println!("criterion {} [{name}]: PASS ({detail})", k + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {} [{name}]: FAIL ({why})", k + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
