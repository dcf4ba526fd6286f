use criterion::{black_box, criterion_group, criterion_main, Criterion};

use nlheat_bench::{grid_1d, grid_2d, nonlinear_spec, perturbed};
use nlheat_core::{grad_sq, imex_step, laplacian, picard_solve_window, renormalize, TimeControls};

fn bench_stencils(c: &mut Criterion) {
    let u1 = perturbed(&grid_1d(1024), 0.3);
    let u2 = perturbed(&grid_2d(64), 0.3);
    c.bench_function("laplacian 1d n=1024", |b| b.iter(|| laplacian(black_box(&u1))));
    c.bench_function("laplacian 2d 64x64", |b| b.iter(|| laplacian(black_box(&u2))));
    c.bench_function("grad_sq 1d n=1024", |b| b.iter(|| grad_sq(black_box(&u1))));
}

fn bench_imex_step(c: &mut Criterion) {
    let grid1 = grid_1d(128);
    let spec1 = nonlinear_spec(&grid1, 3.0);
    let u1 = spec1.initial().clone();
    c.bench_function("imex_step nonlinear 1d n=128", |b| {
        b.iter(|| imex_step(black_box(&u1), 0.0, 1e-3, &spec1).unwrap())
    });

    let grid2 = grid_2d(64);
    let spec2 = nonlinear_spec(&grid2, 3.0);
    let u2 = spec2.initial().clone();
    c.bench_function("imex_step nonlinear 2d 64x64", |b| {
        b.iter(|| imex_step(black_box(&u2), 0.0, 1e-3, &spec2).unwrap())
    });
}

fn bench_picard_window(c: &mut Criterion) {
    let grid = grid_1d(64);
    let spec = nonlinear_spec(&grid, 3.0);
    let controls = TimeControls::picard(1e-3, 0.05, 0.05);
    let g = renormalize(spec.initial()).unwrap();
    c.bench_function("picard window delta=0.05 dt=1e-3 n=64", |b| {
        b.iter(|| picard_solve_window(black_box(&g), 0.0, &spec, &controls).unwrap())
    });
}

criterion_group!(benches, bench_stencils, bench_imex_step, bench_picard_window);
criterion_main!(benches);
