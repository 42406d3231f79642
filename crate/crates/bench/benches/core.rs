use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hubs_core::attachment::{AttachmentFunction, PhiTable};
use hubs_core::ctbp::{run_ctbp, CtbpOptions, StopRule};
use hubs_core::graphsim::{grow, GrowOptions};
use hubs_core::malthusian::{rho_hat, solve_lambda_star};
use hubs_core::sampling::WeightIndex;
use hubs_core::{AttachmentSequence, ReplicateSeed};

// low-discrepancy stand-in for uniforms
fn u(i: u64) -> f64 {
    (i as f64 * 0.618_033_988_749_895).fract()
}

fn weight_index(c: &mut Criterion) {
    let mut g = c.benchmark_group("weight_index");
    for n in [1_000usize, 100_000] {
        let mut idx = WeightIndex::with_capacity(n);
        for i in 0..n {
            idx.push(1.0 + (i % 7) as f64);
        }
        g.bench_with_input(BenchmarkId::new("sample_and_update", n), &n, |b, _| {
            let mut i = 0u64;
            b.iter(|| {
                i += 1;
                let s = idx.sample(u(i));
                idx.set(s, idx.weight(s) + 1.0);
                black_box(s)
            })
        });
    }
    g.finish();
}

fn growth(c: &mut Criterion) {
    let mut g = c.benchmark_group("grow");
    g.sample_size(10);
    let seq = AttachmentSequence::Constant { m: 1 };
    for (name, f) in
        [("power_0.3", AttachmentFunction::power(0.3).unwrap()), ("uniform", AttachmentFunction::constant(1.0).unwrap())]
    {
        g.bench_function(BenchmarkId::new(name, 100_000), |b| {
            let mut r = 0;
            b.iter(|| {
                r += 1;
                black_box(grow(&f, &seq, 100_000, &[100_000], ReplicateSeed::new(1, r), &GrowOptions::default()).unwrap())
            })
        });
    }
    g.finish();
}

fn malthusian(c: &mut Criterion) {
    let power = AttachmentFunction::power(0.3).unwrap();
    let affine = AttachmentFunction::affine(1.0).unwrap();
    c.bench_function("rho_hat/power_0.3", |b| b.iter(|| rho_hat(&power, black_box(1.2), 1e-12).unwrap()));
    c.bench_function("rho_hat/affine_1", |b| b.iter(|| rho_hat(&affine, black_box(3.0), 1e-12).unwrap()));
    c.bench_function("solve_lambda_star/affine_1", |b| b.iter(|| solve_lambda_star(&affine, 1e-10).unwrap()));
    c.bench_function("phi_table/power_0.3/2^16", |b| b.iter(|| PhiTable::build(&power, 1 << 16).unwrap()));
}

fn branching(c: &mut Criterion) {
    let f = AttachmentFunction::power(0.3).unwrap();
    let mut r = 0;
    c.bench_function("ctbp/power_0.3/size_10000", |b| {
        b.iter(|| {
            r += 1;
            run_ctbp(&f, StopRule::Size { n: 10_000 }, ReplicateSeed::new(2, r), &CtbpOptions::default()).unwrap()
        })
    });
}

criterion_group!(benches, weight_index, growth, malthusian, branching);
criterion_main!(benches);
