use std::hint::black_box;

use charsum_bench::squarefree_moduli;
use charsum_core::arith::factor;
use charsum_core::autcoeffs::{sym3_delta, tau_exact};
use charsum_core::expsums::{hyper_kloosterman_all, kk_brute, kk_factored, t_k_brute, t_k_fast, tk_table, KKParams};
use charsum_core::lfun::{lvalues_for_modulus, AfeConfig, CoefficientTable};
use charsum_core::CharacterGroup;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn transforms(c: &mut Criterion) {
    let mut g = c.benchmark_group("t4");
    for q in squarefree_moduli() {
        if q.value() <= 1001 {
            g.bench_with_input(BenchmarkId::new("brute", q.value()), &q, |b, q| b.iter(|| t_k_brute(black_box(2), q, 4).unwrap()));
        }
        g.bench_with_input(BenchmarkId::new("fast", q.value()), &q, |b, q| b.iter(|| t_k_fast(black_box(2), q, 4)));
        g.bench_with_input(BenchmarkId::new("table", q.value()), &q, |b, q| b.iter(|| tk_table(q, 4)));
    }
    g.finish();
}

fn paired(c: &mut Criterion) {
    let params = KKParams::new(1, 2, 5, factor(7), factor(15), factor(5)).unwrap();
    let mut g = c.benchmark_group("k4");
    g.bench_function("brute", |b| b.iter(|| kk_brute(black_box(&params), 4).unwrap()));
    g.bench_function("factored", |b| b.iter(|| kk_factored(black_box(&params), 4).unwrap()));
    g.finish();
}

fn kloosterman(c: &mut Criterion) {
    c.bench_function("hyper_kloosterman_all p=1009 k=4", |b| b.iter(|| hyper_kloosterman_all(black_box(1009), 4).unwrap()));
}

fn coefficients(c: &mut Criterion) {
    c.bench_function("tau_exact 10^5", |b| b.iter(|| tau_exact(black_box(100_000))));
}

fn central_values(c: &mut Criterion) {
    let provider = sym3_delta(200_000);
    let config = AfeConfig::default();
    let mut g = c.benchmark_group("lvalues_for_modulus");
    g.sample_size(10);
    for q in [35u64, 77] {
        let (a, b) = config.lengths(q, &provider).unwrap();
        let table = CoefficientTable::new(&provider, a.max(b)).unwrap();
        let group = CharacterGroup::from_modulus(q).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(q), &group, |bench, group| {
            bench.iter(|| lvalues_for_modulus(&provider, group, &config, &table).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, transforms, paired, kloosterman, coefficients, central_values);
criterion_main!(benches);
