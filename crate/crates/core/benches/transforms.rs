use conelab::cones::Side;
use conelab::contact::{default_radii, maximal_function_with, slide_transform_with, Variant};
use conelab::field::{GridDomain, RegionMask, ScalarField};
use conelab::linalg::Vector;
use conelab::operators::DegeneracyParams;
use conelab::solver::{initial_guess, relax_solve_with, Operator, ProblemSpec};
use conelab::Exec;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn field(n: usize) -> ScalarField {
    let d = GridDomain::square(-1.0, 1.0, n).unwrap();
    ScalarField::from_fn(d, |x| {
        (3.0 * x[0]).sin() * (2.0 * x[1]).cos() + 0.3 * x.norm_sq()
    })
    .unwrap()
}

fn slide(c: &mut Criterion) {
    let mut g = c.benchmark_group("slide_transform");
    g.sample_size(10);
    for n in [33, 65] {
        let u = field(n);
        let d = *u.domain();
        let full = RegionMask::full(d);
        let v = RegionMask::ball(d, Vector::new2(0.0, 0.0), 0.5);
        for exec in [Exec::Sequential, Exec::Parallel] {
            for variant in [Variant::Reference, Variant::Blocked] {
                let id = BenchmarkId::new(format!("{exec:?}/{variant:?}"), n);
                g.bench_with_input(id, &n, |b, _| {
                    b.iter(|| {
                        slide_transform_with(&u, &v, 4.0, Side::Below, 0.5, &full, exec, variant)
                            .unwrap()
                    })
                });
            }
        }
    }
    g.finish();
}

fn maximal(c: &mut Criterion) {
    let mut g = c.benchmark_group("maximal_function");
    g.sample_size(10);
    let u = field(129).map(f64::abs).unwrap();
    let d = *u.domain();
    let full = RegionMask::full(d);
    let radii = default_radii(&d);
    for exec in [Exec::Sequential, Exec::Parallel] {
        g.bench_function(format!("{exec:?}"), |b| {
            b.iter(|| maximal_function_with(&u, &full, &radii, exec).unwrap())
        });
    }
    g.finish();
}

fn solve(c: &mut Criterion) {
    let mut g = c.benchmark_group("relax_solve");
    g.sample_size(10);
    let d = GridDomain::square(-1.0, 1.0, 65).unwrap();
    let p = DegeneracyParams::new(1.0, 1.0, 1.0).unwrap();
    let spec = ProblemSpec::new(
        p,
        Operator::PLaplacian,
        ScalarField::constant(d, 1.0),
        ScalarField::zeros(d),
    )
    .unwrap();
    let u0 = initial_guess(&spec);
    for exec in [Exec::Sequential, Exec::Parallel] {
        g.bench_function(format!("{exec:?}"), |b| {
            b.iter(|| relax_solve_with(&spec, &u0, exec).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, slide, maximal, solve);
criterion_main!(benches);
