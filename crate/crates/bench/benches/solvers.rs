use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use sdg_bench::{connected, partial_3tree_40};
use sdg_core::bounds::SizeCap;
use sdg_core::dp::{solve_dp, solve_dp_auto};
use sdg_core::instances::{make_lemma2, make_lemma3};
use sdg_core::oracle::{solve_exact, DEFAULT_LIMIT_N};
use sdg_core::treewidth::build_nice_decomposition;
use sdg_core::vc::solve_vc;
use sdg_core::SolveMode;

fn oracle(c: &mut Criterion) {
    let mut group = c.benchmark_group("oracle");
    let l2 = make_lemma2();
    for mode in SolveMode::ALL {
        group.bench_with_input(BenchmarkId::new("lemma2", mode), &mode, |b, &mode| {
            b.iter(|| solve_exact(black_box(&l2.instance), mode, DEFAULT_LIMIT_N).unwrap())
        });
    }
    group.finish();
}

fn dp(c: &mut Criterion) {
    let mut group = c.benchmark_group("dp");
    group.sample_size(10);
    let inst = partial_3tree_40();
    let td = build_nice_decomposition(&inst);
    group.bench_function("partial_3tree_40_cap3", |b| {
        b.iter(|| solve_dp(black_box(&inst), SolveMode::Wf, SizeCap::Fixed(3), &td).unwrap())
    });
    let l3 = make_lemma3();
    group.bench_function("lemma3_ns_auto", |b| {
        b.iter(|| solve_dp_auto(black_box(&l3.instance), SolveMode::WfNs, SizeCap::Auto).unwrap())
    });
    for n in [6, 8, 10] {
        let inst = connected(n, 3, &[2, 1, -1]);
        group.bench_with_input(BenchmarkId::new("random_auto", n), &inst, |b, inst| {
            b.iter(|| solve_dp_auto(inst, SolveMode::WfIr, SizeCap::Auto).unwrap())
        });
    }
    group.finish();
}

fn vc(c: &mut Criterion) {
    let mut group = c.benchmark_group("vc");
    let l2 = make_lemma2();
    let l3 = make_lemma3();
    group.bench_function("lemma2_wf", |b| {
        b.iter(|| solve_vc(black_box(&l2.instance), SolveMode::Wf).unwrap())
    });
    group.bench_function("lemma3_ns", |b| {
        b.iter(|| solve_vc(black_box(&l3.instance), SolveMode::WfNs).unwrap())
    });
    group.finish();
}

criterion_group!(benches, oracle, dp, vc);
criterion_main!(benches);
