use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;
use swapmc_bench::{compiled, shrink_htlc, ESCROW_SOURCE, HTLC_SOURCE};
use swapmc_core::buchi::ltl_to_gba;
use swapmc_core::checker::{check, CheckOptions};
use swapmc_core::graph::{build_graph, BuildOptions};
use swapmc_core::ltl::{normalize, LtlNode};

fn bench_parse(c: &mut Criterion) {
    c.bench_function("parse_escrow", |b| {
        b.iter(|| swapmc_core::parse_model(black_box(ESCROW_SOURCE)).unwrap())
    });
}

fn bench_graph(c: &mut Criterion) {
    let escrow = compiled(ESCROW_SOURCE);
    c.bench_function("build_graph_escrow", |b| {
        b.iter(|| build_graph(black_box(&escrow), BuildOptions::default()).unwrap())
    });
    // The full htlc graph is heavyweight; bench a time-shrunken variant so
    // the suite stays quick, and the full model once per run.
    let mini = compiled(&shrink_htlc(HTLC_SOURCE, 10, 4, 3, "Random", "Random"));
    c.bench_function("build_graph_htlc_time10", |b| {
        b.iter(|| build_graph(black_box(&mini), BuildOptions::default()).unwrap())
    });
}

fn bench_check(c: &mut Criterion) {
    let escrow = compiled(ESCROW_SOURCE);
    let graph = build_graph(&escrow, BuildOptions::default()).unwrap();
    c.bench_function("check_escrow_all_specs", |b| {
        b.iter(|| {
            for i in 0..escrow.specs.len() {
                black_box(check(&escrow, &graph, i, CheckOptions::default()).unwrap());
            }
        })
    });
}

fn bench_gba(c: &mut Criterion) {
    // The negation of the escrow recovery spec: a representative tableau
    // input with nested temporal structure.
    let escrow = compiled(ESCROW_SOURCE);
    let negated = normalize(&LtlNode::not(escrow.specs[1].body.clone()));
    c.bench_function("ltl_to_gba_recovery_spec", |b| {
        b.iter(|| ltl_to_gba(black_box(&negated)))
    });
}

criterion_group!(benches, bench_parse, bench_graph, bench_check, bench_gba);
criterion_main!(benches);
