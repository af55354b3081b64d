use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};

use malsig_bench::{models, self_copy, training_corpus, trees};
use malsig_core::testkit::{gen_corpus, gen_pds, PdsBounds, TreeBounds};
use malsig_core::{frequent_subtrees, mine, post_star, Helta, MinerConfig, MultiAutomaton, SupportUnit, ValueMatching};

fn saturation(c: &mut Criterion) {
    let mut g = c.benchmark_group("post_star");
    let systems: Vec<_> = (0..50).map(|s| gen_pds(s, PdsBounds::default())).collect();
    g.bench_function("50 random systems", |b| {
        b.iter(|| {
            for (pds, start) in &systems {
                let seed = MultiAutomaton::from_configs(pds, [start]).unwrap();
                black_box(post_star(pds, &seed).unwrap());
            }
        })
    });
    let m = self_copy();
    g.bench_function("self-copy program", |b| {
        b.iter(|| {
            let seed = MultiAutomaton::from_configs(&m.pds, [&m.entry]).unwrap();
            black_box(post_star(&m.pds, &seed).unwrap())
        })
    });
    g.finish();
}

fn extraction(c: &mut Criterion) {
    let mut g = c.benchmark_group("extract");
    let m = self_copy();
    g.bench_function("self-copy program", |b| b.iter(|| black_box(trees(&m, ValueMatching::Strict))));
    let held_out = models("malicious");
    g.bench_function("held-out variants, permissive", |b| {
        b.iter(|| {
            for m in &held_out {
                black_box(trees(m, ValueMatching::Permissive));
            }
        })
    });
    g.finish();
}

fn mining(c: &mut Criterion) {
    let mut g = c.benchmark_group("mine");
    let corpus = training_corpus();
    let mut cfg = MinerConfig::new(0.6);
    cfg.unit = SupportUnit::Program;
    g.bench_function("training corpus", |b| b.iter(|| black_box(mine(&corpus, &cfg).unwrap())));
    let random: Vec<_> =
        (0..20).map(|s| gen_corpus(s, 8, TreeBounds { nodes: 6, symbols: 3, max_index: 2 })).collect();
    g.bench_function("20 random corpora", |b| {
        b.iter(|| {
            for c in &random {
                black_box(frequent_subtrees(c, 0.25).unwrap());
            }
        })
    });
    g.finish();
}

fn detection(c: &mut Criterion) {
    let mut g = c.benchmark_group("detect");
    let mut cfg = MinerConfig::new(0.6);
    cfg.unit = SupportUnit::Program;
    let patterns = mine(&training_corpus(), &cfg).unwrap().with_min_nodes(2).patterns;
    g.bench_function("infer automaton", |b| b.iter(|| black_box(Helta::infer(&patterns))));
    let h = Helta::infer(&patterns);
    let probes: Vec<_> = models("malicious")
        .iter()
        .chain(models("benign").iter())
        .map(|m| trees(m, ValueMatching::Permissive))
        .collect();
    g.bench_function("20 programs", |b| {
        b.iter_batched(
            || probes.clone(),
            |ps| {
                for p in &ps {
                    black_box(h.detect(p));
                }
            },
            BatchSize::SmallInput,
        )
    });
    g.finish();
}

criterion_group!(benches, saturation, extraction, mining, detection);
criterion_main!(benches);
