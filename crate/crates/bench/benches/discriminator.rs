use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use mh_phone_core::corpus::{synth_corpus, SynthOptions};
use mh_phone_core::discriminator::{gru_grad, GruNet};
use mh_phone_core::model::synthetic_truth;
use mh_phone_core::rng;
use ndarray::ArrayView2;

fn gradient(c: &mut Criterion) {
    let truth = synthetic_truth(5, 14, 0.1, 1).unwrap();
    let (corpus, _) = synth_corpus(&truth, 480, 2, &SynthOptions::default()).unwrap();
    let batch: Vec<ArrayView2<f64>> = corpus.signs().iter().map(|s| s.features.view()).collect();
    let labels: Vec<f64> = (0..batch.len()).map(|i| (i % 2) as f64).collect();
    let net = GruNet::random(14, 16, &mut rng::stream(3, "bench"));
    c.bench_function("gru_grad 480x25x14 H=16", |b| {
        b.iter(|| gru_grad(black_box(&net), black_box(&batch), &labels).unwrap())
    });
}

criterion_group!(benches, gradient);
criterion_main!(benches);
