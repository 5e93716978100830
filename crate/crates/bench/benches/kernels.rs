use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, Criterion};
use unipoly::config::qd;
use unipoly::derive::{qd_frame_certificate, replay};
use unipoly::exact::parse_field;
use unipoly::hull::{convex_hull, shapes};
use unipoly::vonstaudt::{add_gadget, compile_polynomial, mlt_gadget, parse_polynomial};
use unipoly::{PointConfiguration, Polytope, Scalar};

fn scalars(c: &mut Criterion) {
    let k = Arc::new(parse_field("field:-2,0,1:1,2").unwrap());
    let t = Scalar::theta(&k);
    let a = &(&t * &Scalar::ratio(3, 7)) + &Scalar::from_int(5);
    let b = &(&t * &Scalar::ratio(-2, 9)) + &Scalar::ratio(1, 4);
    c.bench_function("field mul", |bch| bch.iter(|| black_box(&a) * black_box(&b)));
    c.bench_function("field inv", |bch| bch.iter(|| black_box(&a).inv().unwrap()));
    c.bench_function("field sign", |bch| bch.iter(|| black_box(&b).sign()));
}

fn vertex_config(p: &Polytope) -> PointConfiguration {
    let mut c = PointConfiguration::new(p.ambient());
    for (l, x) in p.vertices() {
        c.insert(l, x.to_vec()).unwrap();
    }
    c
}

fn hulls(c: &mut Criterion) {
    let cfg = vertex_config(&shapes::random_polytope(3, 40, 1));
    c.bench_function("hull 3d 40 points", |bch| bch.iter(|| convex_hull(black_box(&cfg))));
    let cfg = vertex_config(&shapes::cube(4));
    c.bench_function("hull 4-cube", |bch| bch.iter(|| convex_hull(black_box(&cfg))));
}

fn gadgets(c: &mut Criterion) {
    let a = Scalar::ratio(5, 3);
    let b = Scalar::ratio(-7, 2);
    c.bench_function("add gadget", |bch| bch.iter(|| add_gadget(black_box(&a), black_box(&b))));
    c.bench_function("mlt gadget", |bch| bch.iter(|| mlt_gadget(black_box(&a), black_box(&b))));
    let psi = parse_polynomial("x^3-2*x+1").unwrap();
    let t = compile_polynomial(&psi);
    let z = Scalar::ratio(3, 5);
    c.bench_function("compiled cubic", |bch| bch.iter(|| t.evaluate(&[black_box(z.clone())]).unwrap()));
}

fn certificates(c: &mut Criterion) {
    let cfg = qd(3);
    let cert = qd_frame_certificate(3).unwrap();
    c.bench_function("replay q3", |bch| bch.iter(|| replay(black_box(&cfg), black_box(&cert)).unwrap()));
}

criterion_group!(benches, scalars, hulls, gadgets, certificates);
criterion_main!(benches);
