//! Criterion comparison of the data-parallel core against the sequential
//! fallback on the three hot corpus workloads: detection over screenshots,
//! the tree-edit-distance pair matrix, and full exploration runs.
//!
//! Build with the default `parallel` feature so both paths are available;
//! the `*_seq` entries always run single-threaded.

use criterion::{criterion_group, criterion_main, Criterion};

use pixelprobe::harness::bench::BenchSuite;
use pixelprobe::harness::corpus::generate_labeled_corpus;
use pixelprobe::layout::tree_edit_distance;
use pixelprobe::par;
use pixelprobe::vision::eval::{corpus_stats, corpus_stats_seq};
use pixelprobe::vision::VisionConfig;

fn detection_corpus(c: &mut Criterion) {
    let corpus = generate_labeled_corpus(500, 24, 360, 640).expect("corpus generates");
    let cfg = VisionConfig::default();
    let mut group = c.benchmark_group("detection_corpus_24_images");
    group.sample_size(10);
    group.bench_function("parallel", |b| {
        b.iter(|| corpus_stats(&corpus, &cfg, 0.8));
    });
    group.bench_function("sequential", |b| {
        b.iter(|| corpus_stats_seq(&corpus, &cfg, 0.8));
    });
    group.finish();
}

fn distance_matrix(c: &mut Criterion) {
    let corpus = pixelprobe::embedding::generate_layout_corpus(7, 40);
    let pairs: Vec<(usize, usize)> = (0..corpus.len())
        .flat_map(|i| (0..corpus.len()).map(move |j| (i, j)))
        .collect();
    let mut group = c.benchmark_group("tree_distance_matrix_40x40");
    group.sample_size(10);
    group.bench_function("parallel", |b| {
        b.iter(|| {
            par::map_slice(&pairs, |(i, j)| {
                tree_edit_distance(&corpus[*i], &corpus[*j]).unwrap()
            })
        });
    });
    group.bench_function("sequential", |b| {
        b.iter(|| {
            par::map_slice_seq(&pairs, |(i, j)| {
                tree_edit_distance(&corpus[*i], &corpus[*j]).unwrap()
            })
        });
    });
    group.finish();
}

fn exploration_runs(c: &mut Criterion) {
    let mut suite = BenchSuite::canonical();
    suite.app_seeds = vec![1, 2, 3, 4];
    suite.repetitions = 1;
    suite.base.budget = 40;
    let spec: Vec<u64> = suite.app_seeds.clone();
    let run_one = |seed: &u64| {
        let mut cfg = suite.base.clone();
        cfg.seeds.app = *seed;
        cfg.policy = pixelprobe::harness::PolicyKind::Random;
        pixelprobe::harness::runner::run(&cfg, None).expect("run succeeds").report.screen_coverage
    };
    let mut group = c.benchmark_group("exploration_runs_4x40_steps");
    group.sample_size(10);
    group.bench_function("parallel", |b| {
        b.iter(|| par::map_slice(&spec, run_one));
    });
    group.bench_function("sequential", |b| {
        b.iter(|| par::map_slice_seq(&spec, run_one));
    });
    group.finish();
}

criterion_group!(benches, detection_corpus, distance_matrix, exploration_runs);
criterion_main!(benches);
