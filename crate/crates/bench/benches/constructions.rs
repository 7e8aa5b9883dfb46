use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use tileforge::analysis;
use tileforge::compiler::decompile_system;
use tileforge_bench::{compiled, eff, general, partially, simulate};

fn compile_bench(c: &mut Criterion) {
    let mut g = c.benchmark_group("compile");
    for n in [0, 17, 64] {
        let p = eff(n);
        g.bench_with_input(BenchmarkId::new("eff", n), &p, |b, p| b.iter(|| compiled(black_box(p))));
    }
    let p = general(8, 10);
    g.bench_function("general(8,10)", |b| b.iter(|| compiled(black_box(&p))));
    let p = partially();
    g.bench_function("partially", |b| b.iter(|| compiled(black_box(&p))));
    g.finish();
}

fn simulate_bench(c: &mut Criterion) {
    let mut g = c.benchmark_group("simulate");
    g.sample_size(10);
    for n in [3, 17] {
        let out = compiled(&eff(n));
        g.bench_with_input(BenchmarkId::new("eff", n), &out, |b, o| b.iter(|| simulate(black_box(o))));
    }
    let out = compiled(&partially());
    g.bench_function("partially", |b| b.iter(|| simulate(black_box(&out))));
    g.finish();
}

fn analysis_bench(c: &mut Criterion) {
    let out = compiled(&partially());
    let r = simulate(&out);
    let tree = analysis::extract_paths(&r.sequence).unwrap();
    let main = tree.main_path();
    c.bench_function("main path", |b| b.iter(|| black_box(&tree).main_path()));
    c.bench_function("partial pumps", |b| b.iter(|| analysis::find_partial_pumps(black_box(&main), 2)));
    c.bench_function("diameter", |b| b.iter(|| analysis::manhattan_diameter(black_box(&r.assembly))));
}

fn round_trip_bench(c: &mut Criterion) {
    let out = compiled(&general(8, 10));
    c.bench_function("decompile general(8,10)", |b| b.iter(|| decompile_system(black_box(&out.system)).unwrap()));
}

criterion_group!(benches, compile_bench, simulate_bench, analysis_bench, round_trip_bench);
criterion_main!(benches);
