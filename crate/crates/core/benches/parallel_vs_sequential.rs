use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use num_bigint::BigInt;

use rootclose_core::par::{self, Exec};
use rootclose_core::valuation::{binom, binom_valuation, vp};
use rootclose_core::{sample, ComponentMode, Prime, RingMode, TowerCtx, WittCtx};

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn tower_products(c: &mut Criterion) {
    let ctx = TowerCtx::new(Prime::new(5).unwrap(), 2, 3, RingMode::Quotient).unwrap();
    let mut rng = sample::rng(1);
    let a = sample::tower_elem(ctx, &mut rng, 40, 12, 50);
    let b = sample::tower_elem(ctx, &mut rng, 40, 12, 50);
    let mut group = c.benchmark_group("tower");
    group.sample_size(20);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::new("mul", name), &exec, |bch, &exec| {
            bch.iter(|| black_box(a.mul_with(&b, exec).unwrap()))
        });
        group.bench_with_input(BenchmarkId::new("pow5", name), &exec, |bch, &exec| {
            bch.iter(|| black_box(a.pow_with(5, exec)))
        });
    }
    group.finish();
}

fn binomial_sweep(c: &mut Criterion) {
    let p = Prime::new(3).unwrap();
    let m = 7;
    let n = 3u64.pow(m);
    let idx: Vec<u64> = (1..=n).collect();
    let mut group = c.benchmark_group("binomial_sweep");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(name, |bch| {
            bch.iter(|| {
                par::map(exec, &idx, |&i| {
                    binom_valuation(p, m, i).unwrap() == vp(p, &BigInt::from(binom(n, i).unwrap()))
                })
            })
        });
    }
    group.finish();
}

fn witt_fontaine_mul(c: &mut Criterion) {
    let family = TowerCtx::new(Prime::new(5).unwrap(), 0, 3, RingMode::Quotient).unwrap();
    let base = WittCtx::new(family.p(), 2).unwrap();
    let mut rng = sample::rng(2);
    let x = sample::fontaine_witt(&base, family, 3, ComponentMode::PlainR, &mut rng);
    let y = sample::fontaine_witt(&base, family, 3, ComponentMode::PlainR, &mut rng);
    let mut group = c.benchmark_group("witt_fontaine_mul");
    group.sample_size(10);
    for (name, exec) in MODES {
        let ctx = base.clone().with_exec(exec);
        let x = rootclose_core::WittVec::new(&ctx, x.components().to_vec()).unwrap();
        let y = rootclose_core::WittVec::new(&ctx, y.components().to_vec()).unwrap();
        group.bench_function(name, |bch| bch.iter(|| black_box(x.mul(&y).unwrap())));
    }
    group.finish();
}

criterion_group!(benches, tower_products, binomial_sweep, witt_fontaine_mul);
criterion_main!(benches);
