use criterion::{criterion_group, criterion_main, Criterion};
use gaitwalk::{compute_mfcc, embedded_reestimate, viterbi, DecodeGrammar, HmmConfig, MfccConfig};
use gaitwalk_bench::{features, model, recordings};
use std::hint::black_box;

fn mfcc(c: &mut Criterion) {
    let signal = recordings(1).remove(0);
    let cfg = MfccConfig::default();
    c.bench_function("mfcc one recording", |b| b.iter(|| compute_mfcc(black_box(&signal), &cfg).unwrap()));
}

fn decode(c: &mut Criterion) {
    let seqs = features(4);
    let m = model(&seqs);
    c.bench_function("viterbi 15 states multi-step", |b| {
        b.iter(|| viterbi(&m, black_box(&seqs[0]), DecodeGrammar::MultiStep).unwrap())
    });
}

fn reestimate(c: &mut Criterion) {
    let seqs = features(4);
    let m = model(&seqs);
    let ks = vec![5; seqs.len()];
    let cfg = HmmConfig::default();
    c.bench_function("re-estimation step, 4 recordings", |b| {
        b.iter(|| embedded_reestimate(&m, black_box(&seqs), &ks, &cfg).unwrap())
    });
}

criterion_group!(benches, mfcc, decode, reestimate);
criterion_main!(benches);
