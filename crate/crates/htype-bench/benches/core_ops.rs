use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use htype_core::{
    arnold_curvature, minimize_length, shrinking_pair, uniform_grid, Ambient, Curve, GroupPoint,
    HTypeAlgebra, LengthMode, MetricSpec, OptProblem, Plane, RiemannianSpec, WeightLaw,
};

fn riemannian(dim_w: usize) -> RiemannianSpec {
    RiemannianSpec::with_identity_center(WeightLaw::InversePower(1.0), dim_w).unwrap()
}

fn bench_group_multiply(c: &mut Criterion) {
    let amb = Ambient::new(HTypeAlgebra::quaternionic(), 32);
    let mut p = GroupPoint::zero(&amb);
    let mut q = GroupPoint::zero(&amb);
    for (i, v) in p.horizontal_mut().iter_mut().enumerate() {
        *v = (i as f64 * 0.37).sin();
    }
    for (i, v) in q.horizontal_mut().iter_mut().enumerate() {
        *v = (i as f64 * 0.61).cos();
    }
    c.bench_function("group_multiply_quaternionic_n32", |b| {
        b.iter(|| black_box(&p).multiply(black_box(&q)).unwrap())
    });
}

fn bench_arnold_curvature(c: &mut Criterion) {
    let amb = Ambient::new(HTypeAlgebra::heisenberg(), 32);
    let spec = riemannian(1);
    let x = GroupPoint::unit_block(&amb, 32, 0).unwrap();
    let z = GroupPoint::from_center(&amb, &[1.0]).unwrap();
    let jx = x.j_apply(z.center()).unwrap();
    let plane = Plane::new(&spec, &x, &jx).unwrap();
    c.bench_function("arnold_curvature_n32", |b| {
        b.iter(|| arnold_curvature(black_box(&spec), black_box(&plane)).unwrap())
    });
}

fn bench_polyline_lift(c: &mut Criterion) {
    let amb = Ambient::new(HTypeAlgebra::heisenberg(), 8);
    let times = uniform_grid(257);
    let horiz: Vec<f64> = times
        .iter()
        .flat_map(|t| (0..16).map(move |k| (t * (k + 1) as f64).sin()))
        .collect();
    c.bench_function("polyline_lift_257_nodes", |b| {
        b.iter(|| {
            Curve::lift_polyline(black_box(&amb), &times, black_box(&horiz), &[0.0; 1]).unwrap()
        })
    });
}

fn bench_curve_length(c: &mut Criterion) {
    let amb = Ambient::new(HTypeAlgebra::heisenberg(), 64);
    let spec = MetricSpec::Riemannian(riemannian(1));
    let w = GroupPoint::unit_block(&amb, 16, 0).unwrap();
    let pair = shrinking_pair(16, 6f64.sqrt(), &[1.0], &w, 257).unwrap();
    c.bench_function("sub_finsler_length_257_nodes", |b| {
        b.iter(|| {
            pair.curve
                .length(black_box(&spec), LengthMode::SubFinsler)
                .unwrap()
        })
    });
}

fn bench_minimize_length(c: &mut Criterion) {
    let amb = Ambient::new(HTypeAlgebra::heisenberg(), 4);
    let spec = MetricSpec::Riemannian(riemannian(1));
    let start = GroupPoint::zero(&amb);
    let mut end = GroupPoint::zero(&amb);
    end.horizontal_mut()[0] = 1.0;
    end.center_mut()[0] = 0.25;
    let problem = OptProblem::new(spec, start, end).unwrap().with_nodes(33);
    c.bench_function("minimize_length_33_nodes", |b| {
        b.iter(|| minimize_length(black_box(&problem), None).unwrap())
    });
}

criterion_group!(
    benches,
    bench_group_multiply,
    bench_arnold_curvature,
    bench_polyline_lift,
    bench_curve_length,
    bench_minimize_length
);
criterion_main!(benches);
