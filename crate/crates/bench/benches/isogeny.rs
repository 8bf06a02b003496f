use criterion::{criterion_group, criterion_main, Criterion};
use fglab_core::isogeny::quotient_fgl;
use fglab_core::level::level_ring;
use fglab_core::theta::{rnorm, rnorm_input_cap, theta_of_function, ThetaStructure};
use fglab_core::*;
use std::hint::black_box;

fn mult(p: u64, n: u32) -> FormalGroupLaw {
    FormalGroupLaw::standard(&LawKind::Multiplicative, &RingTower::base(p, n).unwrap(), 0).unwrap()
}

fn quotients(c: &mut Criterion) {
    for (p, n) in [(2u64, 8u32), (3, 6)] {
        let a = format!("Z/{p}").parse().unwrap();
        let g = mult(p, n);
        c.bench_function(&format!("level Z/{p} N={n}"), |b| b.iter(|| level_ring(black_box(&a), &g).unwrap()));
        let level = level_ring(&a, &g).unwrap();
        c.bench_function(&format!("quotient Z/{p} D=12"), |b| b.iter(|| quotient_fgl(black_box(&level), 12).unwrap()));
    }
}

fn reduced_norm(c: &mut Criterion) {
    let level = level_ring(&"Z/2".parse().unwrap(), &mult(2, 8)).unwrap();
    let q = quotient_fgl(&level, 8).unwrap();
    let r = q.ring().clone();
    let cap = 6;
    let inc = rnorm_input_cap(&q, cap).unwrap();
    let f = MPSeries::univariate(&r, &[r.one(), r.zero(), r.one()], true);
    for k in 1..=2 {
        let t = ThetaStructure::new(&q.source, theta_of_function(&q.source, &f, k, inc).unwrap()).unwrap();
        c.bench_function(&format!("rnorm Z/2 k={k} D={cap}"), |b| b.iter(|| rnorm(black_box(&t), &q, cap).unwrap()));
    }
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = quotients, reduced_norm
}
criterion_main!(benches);
