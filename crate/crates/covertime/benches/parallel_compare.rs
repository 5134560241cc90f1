//! Rayon fan-out versus single-thread execution on the data-parallel hot
//! loops: Monte Carlo cover trials, block-move stopping times, and
//! brute-force cut enumeration.
//!
//! With the default `parallel` feature each workload runs twice, once inside
//! a 1-thread rayon pool and once in the default pool, so one `cargo bench`
//! gives the comparison directly. Built with `--no-default-features` the
//! same benchmarks record the plain sequential fallback.

use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use covertime::graph::{generate, Family};
use covertime::spectral::{best_cut, CutMode};
use covertime::walker::{measure_kappa, simulate_cover, WalkConfig};

#[cfg(feature = "parallel")]
fn run_modes() -> Vec<(&'static str, Option<rayon::ThreadPool>)> {
    let single = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .expect("single-thread pool");
    vec![("single-thread", Some(single)), ("parallel", None)]
}

#[cfg(not(feature = "parallel"))]
fn run_modes() -> Vec<(&'static str, Option<()>)> {
    vec![("sequential", None)]
}

fn with_mode<R>(pool: &Option<impl PoolLike>, f: impl FnOnce() -> R + Send) -> R
where
    R: Send,
{
    match pool {
        Some(p) => p.run(f),
        None => f(),
    }
}

trait PoolLike {
    fn run<R: Send>(&self, f: impl FnOnce() -> R + Send) -> R;
}

#[cfg(feature = "parallel")]
impl PoolLike for rayon::ThreadPool {
    fn run<R: Send>(&self, f: impl FnOnce() -> R + Send) -> R {
        self.install(f)
    }
}

#[cfg(not(feature = "parallel"))]
impl PoolLike for () {
    fn run<R: Send>(&self, f: impl FnOnce() -> R + Send) -> R {
        f()
    }
}

fn bench_cover_trials(c: &mut Criterion) {
    let g = generate(&Family::Complete { n: 120 }).unwrap();
    let cfg = WalkConfig::for_graph(&g, 7, false, 256);
    let mut group = c.benchmark_group("simulate_cover_k120_256trials");
    group.sample_size(10);
    for (label, pool) in run_modes() {
        group.bench_function(label, |b| {
            b.iter(|| {
                with_mode(&pool, || simulate_cover(black_box(&g), 0, &cfg).unwrap().steps.len())
            })
        });
    }
    group.finish();
}

fn bench_kappa_trials(c: &mut Criterion) {
    let g = generate(&Family::Dumbbell { n: 80, bridges: 8 }).unwrap();
    let blocks = vec![(0..40u32).collect::<Vec<_>>(), (40..80u32).collect::<Vec<_>>()];
    let tau = [400u64, 400];
    let cfg = WalkConfig::for_graph(&g, 11, false, 128);
    let mut group = c.benchmark_group("measure_kappa_dumbbell80_128trials");
    group.sample_size(10);
    for (label, pool) in run_modes() {
        group.bench_function(label, |b| {
            b.iter(|| {
                with_mode(&pool, || {
                    measure_kappa(black_box(&g), 0, &blocks, &tau, &cfg, 0)
                        .unwrap()
                        .max_kappa
                        .len()
                })
            })
        });
    }
    group.finish();
}

fn bench_brute_force_cut(c: &mut Criterion) {
    let g = generate(&Family::Dumbbell { n: 18, bridges: 1 }).unwrap();
    let mut group = c.benchmark_group("brute_force_cut_n18");
    group.sample_size(10);
    for (label, pool) in run_modes() {
        group.bench_function(label, |b| {
            b.iter(|| {
                with_mode(&pool, || {
                    best_cut(black_box(&g), CutMode::BruteForce).unwrap().cut.crossing_edges
                })
            })
        });
    }
    group.finish();
}

criterion_group!(benches, bench_cover_trials, bench_kappa_trials, bench_brute_force_cut);
criterion_main!(benches);
