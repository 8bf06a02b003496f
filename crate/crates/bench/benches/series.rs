use criterion::{criterion_group, criterion_main, Criterion};
use fglab_core::*;
use std::hint::black_box;

fn law(kind: &str, p: u64, n: u32, cap: usize) -> FormalGroupLaw {
    FormalGroupLaw::standard(&kind.parse().unwrap(), &RingTower::base(p, n).unwrap(), cap).unwrap()
}

fn construction(c: &mut Criterion) {
    let ring = RingTower::base(2, 8).unwrap();
    for kind in ["honda:1", "honda:2", "weier:0,0,1,0,0"] {
        let k: LawKind = kind.parse().unwrap();
        c.bench_function(&format!("law {kind} D=12"), |b| {
            b.iter(|| FormalGroupLaw::standard(black_box(&k), &ring, 12).unwrap())
        });
    }
}

fn n_series(c: &mut Criterion) {
    let g = law("honda:2", 2, 6, 12);
    c.bench_function("[5] honda:2 D=12", |b| b.iter(|| g.n_series(black_box(5), 12).unwrap()));
    let g = law("mult", 3, 6, 12);
    c.bench_function("[-7] mult D=12", |b| b.iter(|| g.n_series(black_box(-7), 12).unwrap()));
}

fn composition(c: &mut Criterion) {
    let r = RingTower::base(3, 6).unwrap();
    let coeffs: Vec<RingElem> = (0..12).map(|i| r.from_int(i * i + 1)).collect();
    let f = MPSeries::univariate(&r, &coeffs, true).at_cap(16).unwrap();
    let mut gc = vec![r.zero(), r.one()];
    gc.extend((0..8).map(|i| r.from_int(2 * i - 3)));
    let g = MPSeries::univariate(&r, &gc, true).at_cap(16).unwrap();
    c.bench_function("substitute D=16", |b| b.iter(|| f.substitute(std::slice::from_ref(black_box(&g))).unwrap()));
    c.bench_function("reversion D=16", |b| b.iter(|| black_box(&g).reversion(None).unwrap()));
    let law = law("mult", 3, 6, 12);
    let xs = [MPSeries::var(&r, 3, 0), MPSeries::var(&r, 3, 1), MPSeries::var(&r, 3, 2)];
    c.bench_function("associativity check mult D=12", |b| {
        b.iter(|| {
            let l = law.truncated(12);
            let ab = l.add(&xs[0], &xs[1]).unwrap();
            let bc = l.add(&xs[1], &xs[2]).unwrap();
            l.add(&ab, &xs[2]).unwrap().first_difference(&l.add(&xs[0], &bc).unwrap()).unwrap()
        })
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(20);
    targets = construction, n_series, composition
}
criterion_main!(benches);
