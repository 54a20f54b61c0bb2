use bmquad::arith::{hilbert_symbol, rat};
use bmquad::brauer::{local_value_set_finite, square_root_data, tangent_generator};
use bmquad::localsolve::{decide_u_zp, SolubilityMode};
use bmquad::numfield::trager_square_test;
use bmquad::poly::{factor_over_q, parse_poly};
use bmquad::quadform::parse_quadratic_form;
use bmquad::search::search_integral_points;
use bmquad::Place;
use criterion::{black_box, criterion_group, criterion_main, Criterion};

fn hilbert(c: &mut Criterion) {
    let places = [Place::Real, Place::prime(2), Place::prime(3), Place::prime(10007)];
    c.bench_function("hilbert_symbol", |b| {
        b.iter(|| {
            for v in &places {
                black_box(hilbert_symbol(&rat(-3 * 7 * 11), &rat(2 * 5 * 13), v).unwrap());
            }
        })
    });
}

fn factor(c: &mut Criterion) {
    let p = parse_poly("(t^4 - 10t^2 + 1)*(t^3 - 2)^2*(2t^2 + 3)").unwrap();
    c.bench_function("factor_over_q_deg13", |b| b.iter(|| black_box(factor_over_q(&p))));
    let m = parse_poly("t^4 - 10t^2 + 1").unwrap();
    c.bench_function("trager_square_test_quartic", |b| b.iter(|| black_box(trager_square_test(&rat(6), &m))));
}

fn local(c: &mut Criterion) {
    let q = parse_quadratic_form("-9,7,2;1,0,0").unwrap();
    let p = parse_poly("(2t^2-1)^2").unwrap();
    c.bench_function("decide_u_zp_example1_at_2", |b| b.iter(|| black_box(decide_u_zp(&q, &p, &Place::prime(2)).unwrap())));
    let (c0, r) = square_root_data(&factor_over_q(&p)).unwrap();
    let gen = tangent_generator(&q, &c0, &r).unwrap();
    let mut group = c.benchmark_group("residue_tree");
    group.sample_size(10);
    group.bench_function("value_set_example1_at_3", |b| {
        b.iter(|| black_box(local_value_set_finite(&q, &p, &gen, &Place::prime(3), SolubilityMode::Primitive).unwrap()))
    });
    group.finish();
}

fn search(c: &mut Criterion) {
    let q = parse_quadratic_form("1,-2,64").unwrap();
    let p = parse_poly("(2t^2+3)^2").unwrap();
    let mut group = c.benchmark_group("search");
    group.sample_size(10);
    group.bench_function("example2_bound_40", |b| {
        b.iter(|| black_box(search_integral_points(&q, &p, 40, SolubilityMode::Any).unwrap()))
    });
    group.finish();
}

criterion_group!(benches, hilbert, factor, local, search);
criterion_main!(benches);
