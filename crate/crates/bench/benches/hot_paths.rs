use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use spinladder_bench::full_ladder;
use spinladder_core::hamiltonian::{eval_f, DrivenHamiltonian};
use spinladder_core::integrator::{evolve_on_grid, step_exponential_midpoint, Grid, Method, SplitPropagator};
use spinladder_core::linalg::hermitian_eigendecomposition;
use spinladder_core::spin::{basis_state, make_operators};
use spinladder_core::{Frame, SpinQuantumNumber};

fn eigensolver(c: &mut Criterion) {
    let mut group = c.benchmark_group("eigendecomposition");
    for twice_s in [1u32, 10, 20, 40] {
        let p = full_ladder(twice_s, Frame::Lab);
        let ops = make_operators(p.s()).unwrap();
        let h = DrivenHamiltonian::new(p.model, p.drive, &ops).unwrap().at(0.37).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(twice_s + 1), &h, |b, h| {
            b.iter(|| hermitian_eigendecomposition(black_box(h)).unwrap())
        });
    }
    group.finish();
}

fn steps(c: &mut Criterion) {
    let p = full_ladder(20, Frame::Lab);
    let ops = make_operators(p.s()).unwrap();
    let ham = DrivenHamiltonian::new(p.model, p.drive, &ops).unwrap();
    let psi = basis_state(p.s(), p.s().as_half_int()).unwrap();
    let split = SplitPropagator::for_hamiltonian(&ham, &ops).unwrap();
    let drive = |t: f64| ham.drive_at(t);

    let mut group = c.benchmark_group("step_s10");
    group.bench_function("interaction-midpoint", |b| b.iter(|| split.step(black_box(&psi), (0.3, 0.8), 0.01)));
    group.bench_function("interaction-midpoint-4", |b| {
        b.iter(|| split.step_composed(&drive, black_box(&psi), 12.3, 0.01).unwrap())
    });
    group.bench_function("exponential-midpoint", |b| {
        b.iter(|| step_exponential_midpoint(&|t| ham.at(t), black_box(&psi), 12.3, 0.01).unwrap())
    });
    group.finish();
}

fn kernel(c: &mut Criterion) {
    let s = SpinQuantumNumber::new(20).unwrap();
    let times: Vec<f64> = (0..1000).map(|k| k as f64 * 3.0).collect();
    c.bench_function("eval_f_1000", |b| {
        b.iter(|| times.iter().map(|&t| eval_f(s, 0.1, black_box(t)).unwrap()).sum::<f64>())
    });
}

fn short_run(c: &mut Criterion) {
    let p = full_ladder(20, Frame::Rotating);
    let ops = make_operators(p.s()).unwrap();
    let psi = basis_state(p.s(), p.s().as_half_int()).unwrap();
    let grid = Grid { dt: 0.01, n_steps: 1000, stride: 100 };
    c.bench_function("evolve_1000_steps_s10", |b| {
        b.iter(|| evolve_on_grid(&p, &ops, black_box(&psi), Method::InteractionMidpoint4, grid).unwrap())
    });
}

criterion_group!(benches, eigensolver, steps, kernel, short_run);
criterion_main!(benches);
