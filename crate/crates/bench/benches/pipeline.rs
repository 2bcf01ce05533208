use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use motionkit_bench::{cohort, vectors};
use motionkit_core::classifiers::{train, ClassifierConfig, ClassifierKind, TrainingSet};
use motionkit_core::evaluation::cross_validate;
use motionkit_core::features::encode_recording;
use motionkit_core::representation::{kmeans, represent_recording, RepresentationConfig};
use motionkit_core::skeleton::normalize_recording;
use motionkit_core::MovementKind;

fn stages(c: &mut Criterion) {
    let stand = cohort(12, MovementKind::Stand2FeetEyesOpen, 1);
    let chair = cohort(12, MovementKind::ChairRise, 1);
    let rec = &chair[0];
    let features: Vec<_> = encode_recording(&normalize_recording(rec).unwrap())
        .unwrap()
        .iter()
        .map(|f| f.to_array())
        .collect();

    c.bench_function("encode_recording", |b| {
        b.iter(|| encode_recording(&normalize_recording(black_box(rec)).unwrap()).unwrap())
    });
    c.bench_function("kmeans_chair_rise_k5", |b| b.iter(|| kmeans(black_box(&features), 5, 3, 300).unwrap()));
    c.bench_function("represent_recording_family", |b| {
        b.iter(|| represent_recording(black_box(rec), &RepresentationConfig::default(), 3).unwrap())
    });

    let vs = vectors(&stand, MovementKind::Stand2FeetEyesOpen, 1);
    let data = TrainingSet::from_vectors(&vs).unwrap();
    let cfg = ClassifierConfig::default();
    let mut group = c.benchmark_group("train");
    group.sample_size(10);
    for kind in ClassifierKind::ALL {
        group.bench_function(kind.name(), |b| b.iter(|| train(kind, black_box(&data), &cfg, 5).unwrap()));
    }
    group.finish();

    let mut group = c.benchmark_group("cross_validate");
    group.sample_size(10);
    group.bench_function("Svm", |b| {
        b.iter(|| cross_validate(black_box(&vs), ClassifierKind::Svm, &cfg, 5).unwrap())
    });
    group.finish();
}

criterion_group!(benches, stages);
criterion_main!(benches);
