use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use qwitness_core::minimizer::{
    exact_cover, greedy_cover, min_set_cover, unique_witness_assignment, DEFAULT_EXACT_THRESHOLD,
};
use qwitness_core::number_theory::{is_prime, mobius_sieve};
use qwitness_core::quantum::{grover_amplify, prepare_superposition, quantum_count, MarkedOracle};
use qwitness_core::witness::{relation_composite, relation_mobius};
use qwitness_core::{analyze, AnalysisOptions, Question, Sequence};

fn covers(c: &mut Criterion) {
    let mut group = c.benchmark_group("cover");
    for n in [100u64, 1_000, 10_000] {
        let rel = relation_composite(&Sequence::range(2, n).unwrap());
        group.bench_with_input(BenchmarkId::new("min_set_cover/composite", n), &rel, |b, rel| {
            b.iter(|| min_set_cover(black_box(rel), DEFAULT_EXACT_THRESHOLD).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("greedy/composite", n), &rel, |b, rel| {
            b.iter(|| greedy_cover(black_box(rel)).unwrap())
        });
    }
    for n in [25u64, 60] {
        let rel = relation_mobius(&Sequence::squarefree(n).unwrap()).unwrap().without_uncovered();
        group.bench_with_input(BenchmarkId::new("exact_cover/mobius", n), &rel, |b, rel| {
            b.iter(|| exact_cover(black_box(rel)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("assignment/mobius", n), &rel, |b, rel| {
            b.iter(|| unique_witness_assignment(black_box(rel)))
        });
    }
    group.finish();
}

fn oracle(n: u64, m: u64) -> MarkedOracle {
    MarkedOracle::new((1..=n).collect(), vec![1], (1..=n).map(|s| s <= m).collect(), "first m").unwrap()
}

fn quantum(c: &mut Criterion) {
    let mut group = c.benchmark_group("quantum");
    for n in [64u64, 1_024, 16_384] {
        let o = oracle(n, 1);
        let start = prepare_superposition(o.s_values(), o.w_values(), 24).unwrap();
        group.bench_with_input(BenchmarkId::new("grover_10_rounds", n), &o, |b, o| {
            b.iter(|| grover_amplify(start.clone(), black_box(o), 10).unwrap())
        });
    }
    for t in [6u32, 10] {
        let o = oracle(32, 5);
        group.bench_with_input(BenchmarkId::new("count/N=32", t), &t, |b, &t| {
            b.iter(|| quantum_count(black_box(&o), t, 24).unwrap())
        });
    }
    group.finish();
}

fn number_theory(c: &mut Criterion) {
    c.bench_function("mobius_sieve/1e6", |b| b.iter(|| mobius_sieve(black_box(1_000_000))));
    c.bench_function("is_prime/64-bit", |b| b.iter(|| is_prime(black_box(18_446_744_073_709_551_557))));
}

fn pipeline(c: &mut Criterion) {
    let options = AnalysisOptions::default();
    let composite = Sequence::range(2, 100).unwrap();
    c.bench_function("analyze/composite[2,100]", |b| {
        b.iter(|| analyze(black_box(&composite), &Question::IsComposite, &options).unwrap())
    });
    let support = Sequence::squarefree(25).unwrap();
    c.bench_function("analyze/mobius[25]", |b| {
        b.iter(|| analyze(black_box(&support), &Question::MobiusPlusOne, &options).unwrap())
    });
}

criterion_group!(benches, covers, quantum, number_theory, pipeline);
criterion_main!(benches);
