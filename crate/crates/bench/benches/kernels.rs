use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use perioloz_bench::{desk_spec, k3_limit, medium_spec};
use perioloz_core::asymptotics::{critical_points, turning_points};
use perioloz_core::kernel::{kernel, KernelQuery, QuadParams};
use perioloz_core::lattice::{Half, LatticePoint};
use perioloz_core::limit_kernel::{bulk_kernel, gue_corners_kernel, BulkQuery};

fn bench_finite_kernel(c: &mut Criterion) {
    let desk = desk_spec();
    let medium = medium_spec();
    let quad = QuadParams::with_tol(1e-8);
    let p1 = LatticePoint::new(0, Half(1)).unwrap();
    let p2 = LatticePoint::new(1, Half(-2)).unwrap();
    c.bench_function("finite_kernel_desk", |b| {
        b.iter(|| {
            let q = KernelQuery {
                p1: black_box(p1),
                p2: black_box(p2),
                quad,
            };
            black_box(kernel(&desk, &q).unwrap().value)
        })
    });
    let pm = LatticePoint::new(10, Half(1)).unwrap();
    c.bench_function("finite_kernel_d60", |b| {
        b.iter(|| {
            let q = KernelQuery {
                p1: black_box(pm),
                p2: black_box(pm),
                quad,
            };
            black_box(kernel(&medium, &q).unwrap().value)
        })
    });
}

fn bench_critical_points(c: &mut Criterion) {
    let l = k3_limit();
    c.bench_function("critical_points_k3", |b| {
        b.iter(|| black_box(critical_points(&l, black_box(0.7), black_box(0.1)).unwrap()))
    });
}

fn bench_limit_kernels(c: &mut Criterion) {
    let l = k3_limit();
    let tau = 0.9 * l.v();
    let chi = turning_points(&l)[0].chi;
    c.bench_function("bulk_kernel_k3", |b| {
        b.iter(|| {
            let q = BulkQuery {
                tau,
                chi,
                t1: 1,
                t2: 0,
                dh: Half(1),
            };
            black_box(bulk_kernel(&l, &q).unwrap())
        })
    });
    c.bench_function("gue_corners_level3", |b| {
        b.iter(|| black_box(gue_corners_kernel(-0.7, 3, 3, 0.4, 0.4).unwrap()))
    });
}

criterion_group!(
    benches,
    bench_finite_kernel,
    bench_critical_points,
    bench_limit_kernels
);
criterion_main!(benches);
