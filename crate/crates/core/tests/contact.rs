mod common;

use common::{fixture, oracle_mismatches, regions, FIXTURES};
use conelab::cones::Side;
use conelab::contact::{
    decay_curve, slide_transform, slide_transform_with, touching_sets, vertex_map, FitStatus,
    Variant,
};
use conelab::field::{field_rescale_onto, gradient_at, GridDomain, RegionMask, ScalarField};
use conelab::linalg::Vector;
use conelab::Exec;

#[test]
fn oracle_agrees_on_small_grids() {
    let grids = [
        GridDomain::interval(-1.0, 1.0, 23).unwrap(),
        GridDomain::square(-1.0, 1.0, 11).unwrap(),
    ];
    for d in grids {
        for i in 0..FIXTURES {
            let u = fixture(i, &d);
            let (v, search) = regions(i, &d);
            for (k, side) in [(0.25, Side::Below), (4.0, Side::Above)] {
                for alpha in [1.0, 0.5] {
                    let c = slide_transform_with(
                        &u,
                        &v,
                        k,
                        side,
                        alpha,
                        &search,
                        Exec::Parallel,
                        Variant::Blocked,
                    )
                    .unwrap();
                    assert_eq!(
                        oracle_mismatches(&c, &u, &v, &search),
                        0,
                        "fixture {i} dim {} K {k} alpha {alpha}",
                        d.dim()
                    );
                }
            }
        }
    }
}

#[test]
fn kinked_profile_matches_oracle() {
    let d = GridDomain::interval(-2.0, 2.0, 41).unwrap();
    let u = ScalarField::from_fn(d, |x| x[0].abs()).unwrap();
    let full = RegionMask::full(d);
    for side in [Side::Below, Side::Above] {
        let c = slide_transform(&u, &full, 1.0, side, 1.0, &full).unwrap();
        assert_eq!(oracle_mismatches(&c, &u, &full, &full), 0);
    }
    // No convex paraboloid of opening 1 sits above the kink.
    let above = slide_transform(&u, &full, 1.0, Side::Above, 1.0, &full).unwrap();
    let kink = d.node_at(&Vector::new1(0.0)).unwrap();
    assert!(!above.touch.contains(kink));
    assert!(above.touch.contains(0) && above.touch.contains(d.len() - 1));
}

#[test]
fn touching_sets_are_the_intersection_of_oracle_scans() {
    let d = GridDomain::interval(-1.0, 1.0, 33).unwrap();
    let full = RegionMask::full(d);
    let u = ScalarField::from_fn(d, |x| 0.6 * x[0] + 0.1).unwrap();
    for gamma in [0.0, 1.0] {
        let alpha = 1.0 / (1.0 + gamma);
        let t = touching_sets(&u, &full, 2.0, gamma, &full).unwrap();
        let (_, lo) = common::brute_slide(&u, &full, 2.0, Side::Below, alpha, &full);
        let (_, hi) = common::brute_slide(&u, &full, 2.0, Side::Above, alpha, &full);
        let both: Vec<bool> = lo.iter().zip(&hi).map(|(a, b)| *a && *b).collect();
        assert_eq!(t.both.as_slice(), both.as_slice());
    }
}

#[test]
fn concave_cone_vertex_is_in_both_touching_sets() {
    let d = GridDomain::square(-1.0, 1.0, 33).unwrap();
    let full = RegionMask::full(d);
    let u = ScalarField::from_fn(d, |x| -x.norm().powf(1.5) / 1.5).unwrap();
    let t = touching_sets(&u, &full, 2.0, 1.0, &full).unwrap();
    assert!(t.both.contains(d.node_at(&Vector::new2(0.0, 0.0)).unwrap()));
}

#[test]
fn above_equals_below_of_negation_on_fixtures() {
    let d = GridDomain::square(-1.0, 1.0, 17).unwrap();
    for i in 0..FIXTURES {
        let u = fixture(i, &d);
        let (v, search) = regions(i, &d);
        let a = slide_transform(&u, &v, 1.0, Side::Above, 0.5, &search).unwrap();
        let b = slide_transform(&u.neg(), &v, 1.0, Side::Below, 0.5, &search).unwrap();
        assert_eq!(a.touch, b.touch, "fixture {i}");
    }
}

#[test]
fn larger_openings_touch_more() {
    let d = GridDomain::square(-1.0, 1.0, 25).unwrap();
    let full = RegionMask::full(d);
    for i in 0..FIXTURES {
        let u = fixture(i, &d);
        for gamma in [0.0, 1.0] {
            let mut prev: Option<RegionMask> = None;
            for k in [0.5, 1.0, 2.0, 4.0, 8.0] {
                let t = touching_sets(&u, &full, k, gamma, &full).unwrap().both;
                if let Some(p) = &prev {
                    let extra: Vec<usize> = p
                        .excess_over(&t)
                        .into_iter()
                        .filter(|&x| !d.is_boundary(x))
                        .collect();
                    assert!(
                        extra.is_empty(),
                        "fixture {i} gamma {gamma} K {k}: {extra:?}"
                    );
                }
                prev = Some(t);
            }
        }
    }
}

#[test]
fn rescaled_field_at_opening_one_matches_original_at_level() {
    // u~(y) = u(2y) / (2^(1+alpha) L) on the half-width grid at h/2 maps
    // node to node onto the original grid.
    let d = GridDomain::square(-1.0, 1.0, 33).unwrap();
    let t = GridDomain::square(-0.5, 0.5, 33).unwrap();
    let alpha = 0.5;
    for i in [2, 5, 9, 19] {
        let u = fixture(i, &d);
        let level = 4.0;
        let ut = field_rescale_onto(&u, 2.0, &Vector::new2(0.0, 0.0), level, alpha, &t).unwrap();
        let a = slide_transform(
            &u,
            &RegionMask::full(d),
            level,
            Side::Below,
            alpha,
            &RegionMask::full(d),
        )
        .unwrap();
        let b = slide_transform(
            &ut,
            &RegionMask::full(t),
            1.0,
            Side::Below,
            alpha,
            &RegionMask::full(t),
        )
        .unwrap();
        let diff = a
            .touch
            .as_slice()
            .iter()
            .zip(b.touch.as_slice())
            .filter(|(x, y)| x != y)
            .count();
        assert!(diff <= d.len() / 100, "fixture {i}: {diff} mismatches");
    }
}

fn gradient_gap(n: usize) -> f64 {
    let d = GridDomain::square(-1.0, 1.0, n).unwrap();
    let u = ScalarField::from_fn(d, |x| (1.5 * x[0]).sin() * (x[1] + 0.3).cos()).unwrap();
    let (k, alpha) = (4.0, 0.5);
    let v = RegionMask::ball(d, Vector::new2(0.0, 0.0), 0.5);
    let c = slide_transform(&u, &v, k, Side::Below, alpha, &RegionMask::full(d)).unwrap();
    c.records
        .iter()
        .filter(|r| !d.is_boundary(r.argmin))
        .map(|r| {
            let dist = (d.coord(r.argmin) - d.coord(r.vertex)).norm();
            (gradient_at(&u, r.argmin).norm() - k * dist.powf(alpha)).abs()
        })
        .fold(0.0, f64::max)
}

#[test]
fn touch_point_gradients_match_cone_slopes_to_first_order() {
    let coarse = gradient_gap(33);
    let fine = gradient_gap(65);
    assert!(fine < 0.75 * coarse, "{coarse} -> {fine}");
    assert!(fine < 0.5);
}

#[test]
fn vertex_map_determinants_on_smooth_fixtures() {
    let d = GridDomain::square(-1.0, 1.0, 33).unwrap();
    let v = RegionMask::ball(d, Vector::new2(0.0, 0.0), 0.5);
    // The opening exceeds every Hessian eigenvalue of these fixtures, so the
    // tolerance band around each argmin stays where I + D^2u / K >= 0.
    for i in [0, 1, 2, 3, 5, 9, 10] {
        let u = fixture(i, &d);
        for gamma in [0.0, 1.0] {
            let c = slide_transform(
                &u,
                &v,
                32.0,
                Side::Below,
                1.0 / (1.0 + gamma),
                &RegionMask::full(d),
            )
            .unwrap();
            let m = vertex_map(&u, &c, gamma).unwrap();
            assert!(
                m.min_det() >= -1e-8,
                "fixture {i} gamma {gamma}: {}",
                m.min_det()
            );
        }
    }
}

#[test]
fn quadratic_decay_is_infinite_above_the_curvature() {
    // Vertices of the touching paraboloids sit at x (1 + 1.5 / t), so the box
    // must reach 1.75 for every t >= 2.
    let d = GridDomain::square(-2.0, 2.0, 65).unwrap();
    let u = ScalarField::from_fn(d, |x| 0.75 * x.norm_sq()).unwrap();
    let b1 = RegionMask::ball(d, Vector::new2(0.0, 0.0), 1.0);
    let c = decay_curve(&u, 0.0, 2.0, 5, &b1, &RegionMask::full(d)).unwrap();
    assert!(c.levels[0].measure > 0.0);
    assert!(c.levels[1..].iter().all(|l| l.measure == 0.0));
    assert_eq!(c.fit, FitStatus::Infinite);
    assert!(c.is_nonincreasing());
}

#[test]
fn decay_is_nonincreasing_on_fixtures() {
    let d = GridDomain::square(-1.25, 1.25, 31).unwrap();
    let b1 = RegionMask::ball(d, Vector::new2(0.0, 0.0), 1.0);
    for i in 0..FIXTURES {
        let c = decay_curve(&fixture(i, &d), 1.0, 2.0, 5, &b1, &RegionMask::full(d)).unwrap();
        assert!(c.is_nonincreasing(), "fixture {i}: {:?}", c.measures());
    }
}
