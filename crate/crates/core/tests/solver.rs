use conelab::field::{GridDomain, RegionMask, ScalarField};
use conelab::linalg::Vector;
use conelab::operators::{radial_solution, DegeneracyParams, RadialSolution};
use conelab::solver::{
    initial_guess, refine_study, relax_solve, residual, singular_power_rhs, Operator, ProblemSpec,
};

fn solve(spec: &ProblemSpec) -> ScalarField {
    let (u, rep) = relax_solve(spec, &initial_guess(spec)).unwrap();
    assert!(rep.converged, "{rep:?}");
    assert!(rep.residual <= spec.tol_res);
    u
}

fn radial_levels(ns: &[usize]) -> (Vec<ProblemSpec>, RadialSolution) {
    let p = DegeneracyParams::new(1.0, 1.0, 2.0).unwrap();
    let rs = RadialSolution::new(1.0, p, Vector::new2(0.0, 0.0)).unwrap();
    let specs = ns
        .iter()
        .map(|&n| {
            let d = GridDomain::square(-1.0, 1.0, n).unwrap();
            let (exact, fp, _) = radial_solution(&rs, &d).unwrap();
            ProblemSpec::new(p, Operator::PucciPlus, ScalarField::constant(d, fp), exact).unwrap()
        })
        .collect();
    (specs, rs)
}

fn annulus(x: &Vector) -> bool {
    let r = x.norm();
    (0.2..=0.8).contains(&r)
}

#[test]
fn radial_refinement_reduces_annulus_error() {
    let (specs, rs) = radial_levels(&[33, 65, 129]);
    let rows = refine_study(&specs, &|x| rs.value(x), &annulus).unwrap();
    for w in rows.windows(2) {
        let (a, b) = (w[0].error.unwrap(), w[1].error.unwrap());
        assert!(a / b >= 1.5, "errors {a} -> {b}");
    }
    assert!(rows[1..].iter().all(|r| r.order.unwrap() >= 0.6));
}

#[test]
fn radial_defect_peaks_near_the_vertex() {
    let (specs, rs) = radial_levels(&[65]);
    let spec = &specs[0];
    let d = *spec.domain();
    let exact = ScalarField::from_fn(d, |x| rs.value(x)).unwrap();
    let r = residual(&exact, spec).unwrap();
    let near = RegionMask::ball(d, Vector::new2(0.0, 0.0), 0.1);
    let far = RegionMask::from_fn(d, |k, x| x.norm() > 0.5 && !d.is_boundary(k));
    assert!(r.max_abs_on(&near) > 10.0 * r.max_abs_on(&far));
}

#[test]
fn laplacian_quadratic_study_is_flagged_exact() {
    let p = DegeneracyParams::new(0.0, 1.0, 1.0).unwrap();
    let exact = |x: &Vector| x[0] * x[0] - x[1] * x[1];
    let specs: Vec<ProblemSpec> = [9, 17, 33]
        .iter()
        .map(|&n| {
            let d = GridDomain::square(-1.0, 1.0, n).unwrap();
            let mut s = ProblemSpec::new(
                p,
                Operator::PLaplacian,
                ScalarField::zeros(d),
                ScalarField::from_fn(d, exact).unwrap(),
            )
            .unwrap();
            s.tol_res = 1e-11;
            s
        })
        .collect();
    let rows = refine_study(&specs, &exact, &|_| true).unwrap();
    assert!(rows.iter().all(|r| r.error.unwrap() < 1e-10));
    assert!(rows[1..].iter().all(|r| r.exact && r.order.is_none()));
}

#[test]
fn non_convergent_level_becomes_an_error_row() {
    let p = DegeneracyParams::new(2.0, 1.0, 1.0).unwrap();
    let d = GridDomain::square(-1.0, 1.0, 17).unwrap();
    let mut spec = ProblemSpec::new(
        p,
        Operator::PLaplacian,
        ScalarField::constant(d, 1.0),
        ScalarField::zeros(d),
    )
    .unwrap();
    spec.cfl = 1.0;
    spec.reg_eps = 0.0;
    spec.max_iters = 10;
    let rows = refine_study(&[spec], &|_| 0.0, &|_| true).unwrap();
    assert!(rows[0].error.is_none());
    assert!(rows[0].failure.as_deref().unwrap().contains("converge"));
}

#[test]
fn pucci_duality_of_solutions() {
    let p = DegeneracyParams::new(1.0, 1.0, 3.0).unwrap();
    let d = GridDomain::square(-1.0, 1.0, 33).unwrap();
    let f = ScalarField::from_fn(d, |x| 1.0 + x[0] * x[1]).unwrap();
    let g = ScalarField::from_fn(d, |x| (2.0 * x[0]).sin() + x[1] * x[1]).unwrap();
    let mut plus = ProblemSpec::new(p, Operator::PucciPlus, f.clone(), g.clone()).unwrap();
    plus.tol_res = 1e-11;
    let mut minus = ProblemSpec::new(p, Operator::PucciMinus, f.neg(), g.neg()).unwrap();
    minus.tol_res = 1e-11;
    let up = solve(&plus);
    let um = solve(&minus);
    let diff = up.zip_with(&um, |a, b| a + b).unwrap().max_abs();
    assert!(diff < 1e-10, "duality defect {diff}");
}

#[test]
fn larger_source_never_raises_the_p_laplacian_solution() {
    let p = DegeneracyParams::new(1.0, 1.0, 1.0).unwrap();
    let d = GridDomain::square(-1.0, 1.0, 33).unwrap();
    type Profile = fn(&Vector) -> f64;
    let pairs: [(Profile, Profile, Profile); 3] = [
        (|_| 0.5, |_| 1.0, |_| 0.0),
        (|x| x[0], |x| x[0] + 0.5 * x.norm_sq(), |x| 0.3 * x[1]),
        (
            |x| (x[0] * x[1]).cos(),
            |x| (x[0] * x[1]).cos() + 1.0 + x[0] * x[0],
            |x| x[0] * x[0],
        ),
    ];
    for (lo, hi, g) in pairs {
        let solve_with = |f: fn(&Vector) -> f64| {
            let mut s = ProblemSpec::new(
                p,
                Operator::PLaplacian,
                ScalarField::from_fn(d, f).unwrap(),
                ScalarField::from_fn(d, g).unwrap(),
            )
            .unwrap();
            s.tol_res = 1e-10;
            solve(&s)
        };
        let u_lo = solve_with(lo);
        let u_hi = solve_with(hi);
        let worst = u_hi
            .zip_with(&u_lo, |a, b| a - b)
            .unwrap()
            .values()
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max);
        assert!(worst <= 1e-8, "comparison violated by {worst}");
    }
}

#[test]
fn vanishing_regularization_is_stable() {
    let d = GridDomain::square(-1.0, 1.0, 65).unwrap();
    let cases = [
        (
            Operator::PLaplacian,
            DegeneracyParams::new(1.0, 1.0, 1.0).unwrap(),
        ),
        (
            Operator::PucciPlus,
            DegeneracyParams::new(1.0, 1.0, 2.0).unwrap(),
        ),
    ];
    for (op, p) in cases {
        let sols: Vec<ScalarField> = [1e-2, 1e-3, 1e-4]
            .iter()
            .map(|&eps| {
                let mut s =
                    ProblemSpec::new(p, op, ScalarField::constant(d, 1.0), ScalarField::zeros(d))
                        .unwrap();
                s.reg_eps = eps;
                solve(&s)
            })
            .collect();
        let scale = sols[2].max_abs();
        for w in sols.windows(2) {
            let rel = w[0].zip_with(&w[1], |a, b| a - b).unwrap().max_abs() / scale;
            assert!(rel < 0.05, "{op:?}: relative change {rel}");
        }
    }
}

#[test]
fn singular_source_solve_converges() {
    let p = DegeneracyParams::new(1.0, 1.0, 1.0).unwrap();
    let d = GridDomain::square(-1.25, 1.25, 81).unwrap();
    let (f, bad) = singular_power_rhs(&d, 0.5, &Vector::new2(0.0, 0.0), 1.0).unwrap();
    assert_eq!(bad.len(), 1);
    let spec = ProblemSpec::new(p, Operator::PLaplacian, f, ScalarField::zeros(d)).unwrap();
    let u = solve(&spec);
    let centre = d.node_at(&Vector::new2(0.0, 0.0)).unwrap();
    assert!(u.values().iter().all(|&v| v >= u.get(centre) - 1e-12));
}
