use chirpdyn::algebra::{build_two_spin_basis, explicit, structure_constants};
use chirpdyn::integrator::integrate_expm_oracle;
use chirpdyn::lvn::{cartesian_to_ladder, simulate_ensemble, simulate_single_spin, unit, SimOptions, Samples};
use chirpdyn::weinorman::{propagate_bloch, WnOptions};
use chirpdyn_bench::*;
use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

fn single_spin(c: &mut Criterion) {
    let mut g = c.benchmark_group("single spin");
    let (seq, offset) = composite();
    let y = [ZERO, ONE, ZERO];
    let g0 = cartesian_to_ladder(&y);
    let lvn = SimOptions::default().samples(Samples::Uniform(2));
    let wn = WnOptions::default().samples(Samples::Uniform(2));
    g.bench_function("lvn composite", |b| {
        b.iter(|| simulate_single_spin(black_box(offset), &seq, &g0, &lvn).unwrap())
    });
    g.bench_function("wei-norman composite", |b| {
        b.iter(|| propagate_bloch(&seq, black_box(offset), y, &wn).unwrap())
    });
    let (seq, offset) = chorus();
    g.bench_function("wei-norman chorus", |b| {
        b.iter(|| propagate_bloch(&seq, black_box(offset), [ZERO, ZERO, ONE], &wn).unwrap())
    });
    g.bench_function("expm oracle chorus 10k steps", |b| {
        b.iter(|| {
            integrate_expm_oracle(
                |t| explicit::single_spin(offset, seq.evaluate(t) * 0.5),
                &g0,
                seq.t_span,
                black_box(10_000),
            )
        })
    });
    g.finish();
}

fn two_spin(c: &mut Criterion) {
    let mut g = c.benchmark_group("two spin");
    g.sample_size(10);
    let (system, drive, gradient) = psyche(8);
    let opts = SimOptions::default().samples(Samples::Uniform(2));
    let g0 = unit(15, 6);
    g.bench_function("psyche ensemble 8 slices", |b| {
        b.iter(|| simulate_ensemble(system, &drive, &g0, black_box(&gradient), &opts).unwrap())
    });
    g.bench_function("structure table", |b| {
        b.iter(|| structure_constants(black_box(&build_two_spin_basis())).unwrap())
    });
    g.finish();
}

criterion_group!(benches, single_spin, two_spin);
criterion_main!(benches);
