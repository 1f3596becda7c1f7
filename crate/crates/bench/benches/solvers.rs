use std::hint::black_box;
use criterion::{criterion_group, criterion_main, Criterion};
use dualgain::brownian::{self, BrownianControl, BrownianParams};
use dualgain::inversion::{ruin_probability, InversionControl};
use dualgain::lattice;
use dualgain::mc::{simulate_ruin, MCConfig};
use dualgain::model::{DualModelParams, InterarrivalSpec, LatticeParams};
use dualgain::transforms::{RuinTransform, SeriesControl};
use dualgain::Complex64;

fn model() -> DualModelParams {
    DualModelParams::new(0.5, 1.0, InterarrivalSpec::exponential(1.0).unwrap()).unwrap()
}

fn transforms(c: &mut Criterion) {
    let rt = RuinTransform::new(model(), SeriesControl::default()).unwrap();
    c.bench_function("ruin_lt_eval", |b| b.iter(|| rt.ruin_lt_eval(black_box(Complex64::new(0.7, 2.0))).unwrap()));
    let ctl = InversionControl::default();
    c.bench_function("ruin_probability", |b| b.iter(|| ruin_probability(black_box(1.0), &rt, &ctl).unwrap()));
}

fn lattices(c: &mut Criterion) {
    let lp = LatticeParams::new(2.0, 16, 1.0, 0.05, 0.5).unwrap();
    c.bench_function("lattice_solve_n16", |b| b.iter(|| lattice::solve(black_box(&lp)).unwrap()));
    let bp = BrownianParams::new(-1.0, 0.3, LatticeParams::new(2.0, 4, 1.0, 0.1, 0.5).unwrap()).unwrap();
    let ctl = BrownianControl::default();
    c.bench_function("brownian_solve_n4", |b| b.iter(|| brownian::solve(black_box(&bp), &ctl).unwrap()));
}

fn monte_carlo(c: &mut Criterion) {
    let p = model();
    let cfg = MCConfig { paths: 10_000, seed: 1, ..MCConfig::default() };
    let mut g = c.benchmark_group("mc");
    g.sample_size(10);
    g.bench_function("ruin_10k_paths", |b| b.iter(|| simulate_ruin(&p, black_box(1.0), 0.0, &cfg).unwrap()));
    g.finish();
}

criterion_group!(benches, transforms, lattices, monte_carlo);
criterion_main!(benches);
