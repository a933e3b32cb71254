use criterion::{black_box, criterion_group, criterion_main, Criterion};

use capacheck_bench::{extraspecial, prime, sample};
use capacheck_core::enumeration::{census, CensusConfig};
use capacheck_core::{compute_y, is_capable, reduce_special, PhiStructure};

fn engine(c: &mut Criterion) {
    let (ps, x) = extraspecial(3);
    c.bench_function("is_capable extra-special p=3", |b| {
        b.iter(|| is_capable(black_box(&ps), black_box(&x)).unwrap())
    });
    c.bench_function("reduce_special extra-special p=3", |b| {
        b.iter(|| reduce_special(black_box(&ps), black_box(&x)).unwrap())
    });

    let ps6 = PhiStructure::build(6, prime(5)).unwrap();
    let xs = sample(&ps6, 7, 32, 1);
    c.bench_function("compute_y n=6 k=7 p=5 (32 subspaces)", |b| {
        b.iter(|| {
            for x in &xs {
                black_box(compute_y(&ps6, x).unwrap());
            }
        })
    });
    c.bench_function("is_capable n=6 k=7 p=5 (32 subspaces)", |b| {
        b.iter(|| {
            for x in &xs {
                black_box(is_capable(&ps6, x).unwrap());
            }
        })
    });
}

fn enumeration(c: &mut Criterion) {
    let mut group = c.benchmark_group("census");
    group.sample_size(10);
    group.bench_function("n=3 p=5 exhaustive", |b| {
        b.iter(|| census(&CensusConfig::new(3, prime(5))).unwrap())
    });
    group.bench_function("n=4 p=3 dims 3..=3", |b| {
        let mut cfg = CensusConfig::new(4, prime(3));
        cfg.dims = Some(3..=3);
        b.iter(|| census(&cfg).unwrap())
    });
    group.finish();
}

criterion_group!(benches, engine, enumeration);
criterion_main!(benches);
