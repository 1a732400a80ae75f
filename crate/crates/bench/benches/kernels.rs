use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use poslab_bench::{exact_quadruple, positive_quadruple, rng, spec};
use poslab_core::crossratio::weight_cr;
use poslab_core::numlin::eigen_moduli;
use poslab_core::positivity::{is_totally_positive, sample_positive_tuple, sample_tp_unipotent, tuple_positive};
use poslab_core::Quadruple;
use std::hint::black_box;

fn minors(c: &mut Criterion) {
    let mut g = c.benchmark_group("totally_positive");
    for n in [3, 4, 5] {
        let (_, u) = sample_tp_unipotent(n, &mut rng(1));
        g.bench_with_input(BenchmarkId::from_parameter(n), &u, |b, u| b.iter(|| is_totally_positive(black_box(u), 1e-10)));
    }
    g.finish();
}

fn cross_ratio(c: &mut Criterion) {
    let mut g = c.benchmark_group("weight_cr");
    for name in ["SL3", "SL5", "Sp4", "SO(3,4)"] {
        let s = spec(name);
        let q = positive_quadruple(&s, 2);
        let t = s.theta()[0];
        g.bench_function(BenchmarkId::new("float", name), |b| b.iter(|| weight_cr(t, black_box(&q))));
    }
    for name in ["SL3", "Sp4"] {
        let s = spec(name);
        let [a, b, x, y] = exact_quadruple(&s, 2);
        let q = Quadruple::new(a, b, x, y).unwrap();
        let t = s.theta()[0];
        g.bench_function(BenchmarkId::new("exact", name), |bch| bch.iter(|| weight_cr(t, black_box(&q))));
    }
    g.finish();
}

fn eigen(c: &mut Criterion) {
    let mut g = c.benchmark_group("eigen_moduli");
    for name in ["SL3", "SL5", "Sp6", "SO(4,5)"] {
        let s = spec(name);
        let m = s.random_element(&mut rng(3), 1.0);
        g.bench_with_input(BenchmarkId::from_parameter(name), &m, |b, m| b.iter(|| eigen_moduli(black_box(m))));
    }
    g.finish();
}

fn tuples(c: &mut Criterion) {
    let mut g = c.benchmark_group("tuple_positive");
    for (name, k) in [("SL3", 4), ("SL3", 6), ("SL4", 5), ("Sp4", 5)] {
        let s = spec(name);
        let t = sample_positive_tuple(&s, k, &mut rng(4)).unwrap();
        g.bench_function(BenchmarkId::new(name, k), |b| b.iter(|| tuple_positive(black_box(&t), 1e-10)));
    }
    g.finish();
}

criterion_group!(benches, minors, cross_ratio, eigen, tuples);
criterion_main!(benches);
