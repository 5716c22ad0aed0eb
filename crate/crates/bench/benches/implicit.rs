use std::hint::black_box;

use biquad_bench::{quad, queries, triangle};
use biquad_implicit::{build_cayley_matrix, det_eval, emit_slp, evaluate_poly, expand_resultant};
use criterion::{criterion_group, criterion_main, Criterion};

fn construction(c: &mut Criterion) {
    for (name, net) in [("triangle", triangle()), ("quad", quad())] {
        c.bench_function(&format!("build_cayley/{name}"), |b| b.iter(|| build_cayley_matrix(black_box(&net))));
        let cm = build_cayley_matrix(&net).unwrap();
        c.bench_function(&format!("expand/{name}"), |b| b.iter(|| expand_resultant(black_box(&cm))));
    }
}

fn evaluation(c: &mut Criterion) {
    let qs = queries(256);
    for (name, net) in [("triangle", triangle()), ("quad", quad())] {
        let cm = build_cayley_matrix(&net).unwrap();
        let poly = expand_resultant(&cm).unwrap();
        let slp = emit_slp(&poly);
        let mut g = c.benchmark_group(format!("eval256/{name}"));
        g.bench_function("det_eval", |b| b.iter(|| qs.iter().map(|&q| det_eval(&cm, q)).sum::<f64>()));
        g.bench_function("evaluate_poly", |b| b.iter(|| qs.iter().map(|&q| evaluate_poly(&poly, q)).sum::<f64>()));
        g.bench_function("slp", |b| b.iter(|| qs.iter().map(|&q| slp.execute(q)).sum::<f64>()));
        g.finish();
    }
}

criterion_group!(benches, construction, evaluation);
criterion_main!(benches);
