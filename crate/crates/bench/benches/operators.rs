use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ppife_bench::{penalties, Fixture};
use ppife_core::assembly::{assemble_load, assemble_operators};
use ppife_core::theta::{ThetaScheme, TimeStepper};
use ppife_core::{CartesianMesh, GlobalSpace};

const SIZES: [usize; 3] = [20, 40, 80];

fn space_construction(c: &mut Criterion) {
    let mut group = c.benchmark_group("ife_space");
    for n in SIZES {
        let fx = Fixture::new(n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            b.iter(|| {
                let mesh = CartesianMesh::unit_square(n).unwrap();
                black_box(GlobalSpace::new(mesh, fx.problem.curve(), fx.space.beta).unwrap())
            })
        });
    }
    group.finish();
}

fn assembly(c: &mut Criterion) {
    let mut group = c.benchmark_group("assembly");
    for n in SIZES {
        let fx = Fixture::new(n);
        for (name, cfg) in penalties() {
            group.bench_with_input(BenchmarkId::new(name, n), &n, |b, _| b.iter(|| black_box(assemble_operators(&fx.space, &cfg))));
        }
        group.bench_with_input(BenchmarkId::new("load", n), &n, |b, _| {
            b.iter(|| black_box(assemble_load(&fx.space, |q, side| fx.problem.source_on(side, q, 0.5))))
        });
    }
    group.finish();
}

fn spmv(c: &mut Criterion) {
    let mut group = c.benchmark_group("spmv");
    for n in [80, 160] {
        let fx = Fixture::new(n);
        let (_, a) = assemble_operators(&fx.space, &penalties()[0].1);
        let x: Vec<f64> = (0..a.dim()).map(|i| (i as f64).sin()).collect();
        let mut y = vec![0.0; a.dim()];
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| b.iter(|| a.spmv_into(black_box(&x), &mut y)));
    }
    group.finish();
}

fn time_step(c: &mut Criterion) {
    let mut group = c.benchmark_group("theta_step");
    group.sample_size(20);
    for n in [40, 80] {
        let fx = Fixture::new(n);
        let space = &fx.space;
        let u: Vec<f64> = space.mesh.vertices.iter().map(|&q| fx.problem.exact_u(q, 0.0)).collect();
        let f = assemble_load(space, |q, side| fx.problem.source_on(side, q, 0.0));
        let g: Vec<f64> = space.boundary_dofs().iter().map(|&k| fx.problem.boundary_g(space.mesh.vertices[k], 0.05)).collect();
        for (name, cfg) in penalties() {
            let stepper = TimeStepper::new(space, &cfg, ThetaScheme::backward_euler(1.0, n / 2).unwrap());
            let solver = if stepper.uses_cg() { "cg" } else { "bicgstab" };
            group.bench_with_input(BenchmarkId::new(format!("{name}-{solver}"), n), &n, |b, _| {
                b.iter(|| black_box(stepper.step(&u, &f, &f, &g).unwrap()))
            });
        }
    }
    group.finish();
}

criterion_group!(benches, space_construction, assembly, spmv, time_step);
criterion_main!(benches);
