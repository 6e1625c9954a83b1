use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use lodense::ado::build_ado;
use lodense::exact::ExactOracle;
use lodense::{build_graph_wspd, MembershipOracle};
use lodense_bench::{grid, query_pairs};

fn wspd_build(c: &mut Criterion) {
    let mut group = c.benchmark_group("graph_wspd_build");
    group.sample_size(10);
    for k in [16usize, 32, 64] {
        let g = grid(k);
        group.bench_with_input(BenchmarkId::from_parameter(k * k), &g, |b, g| b.iter(|| build_graph_wspd(g, 0.5).unwrap()));
    }
    group.finish();
}

fn membership(c: &mut Criterion) {
    let mut group = c.benchmark_group("membership_query");
    for k in [16usize, 64, 128] {
        let g = grid(k);
        let m = MembershipOracle::new(build_graph_wspd(&g, 0.5).unwrap()).unwrap();
        let qs = query_pairs(g.n(), 4096, 1);
        group.bench_function(BenchmarkId::from_parameter(k * k), |b| {
            let mut i = 0;
            b.iter(|| {
                let (u, v) = qs[i % qs.len()];
                i += 1;
                black_box(m.membership(u, v).unwrap().pair_id)
            })
        });
    }
    group.finish();
}

fn distance_queries(c: &mut Criterion) {
    let g = grid(48);
    let exact = ExactOracle::build(&g, 16.0, 1).unwrap();
    let (ado, _) = build_ado(&g, 0.5, 16.0, 1).unwrap();
    let qs = query_pairs(g.n(), 4096, 2);
    let mut group = c.benchmark_group("distance_query_2304");
    group.bench_function("exact", |b| {
        let mut i = 0;
        b.iter(|| {
            let (u, v) = qs[i % qs.len()];
            i += 1;
            black_box(exact.query(u, v).unwrap())
        })
    });
    group.bench_function("approximate", |b| {
        let mut i = 0;
        b.iter(|| {
            let (u, v) = qs[i % qs.len()];
            i += 1;
            black_box(ado.query(u, v).unwrap())
        })
    });
    group.finish();
}

criterion_group!(benches, wspd_build, membership, distance_queries);
criterion_main!(benches);
