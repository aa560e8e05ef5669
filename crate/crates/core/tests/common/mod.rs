//! Helpers shared by the integration tests: fixture fields and a brute-force
//! contact scan straight from the definition.

#![allow(dead_code)]

use conelab::cones::Side;
use conelab::contact::ContactSet;
use conelab::field::{GridDomain, RegionMask, ScalarField};
use conelab::linalg::Vector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const FIXTURES: usize = 20;

fn y(x: &Vector) -> f64 {
    if x.dim() == 2 {
        x[1]
    } else {
        0.0
    }
}

/// Fixture field number `i` (0..20) on `d`: smooth, kinked, conical and
/// seeded-random profiles.
pub fn fixture(i: usize, d: &GridDomain) -> ScalarField {
    if (13..17).contains(&i) {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + i as u64);
        let v = (0..d.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        return ScalarField::new(*d, v).unwrap();
    }
    let f: fn(&Vector) -> f64 = match i {
        0 => |_| 0.0,
        1 => |x| 0.7 * x[0] - 0.4 * y(x) + 0.2,
        2 => |x| 0.5 * x.norm_sq(),
        3 => |x| x[0] * x[0] - 0.5 * y(x) * y(x),
        4 => |x| x.norm(),
        5 => |x| (3.0 * x[0]).sin() * (2.0 * y(x)).cos(),
        6 => |x| -x.norm().powf(1.5),
        7 => |x| (x[0] - 0.2).abs().powf(1.5) + y(x).abs().powf(1.5),
        8 => |x| -(x[0] - 0.3).abs() - 0.5 * y(x).abs(),
        9 => |x| x[0].powi(3) - y(x),
        10 => |x| (x[0] + y(x)).exp() - 1.0,
        11 => |x| x[0].max(y(x)),
        12 => |x| x[0].min(0.5 * y(x)),
        17 => |x| (10.0 * x[0]).tanh(),
        18 => |x| x.norm().sqrt(),
        _ => |x| (5.0 * x.norm()).cos(),
    };
    ScalarField::from_fn(*d, f).unwrap()
}

/// Vertex and search regions for fixture `i`: everything for even `i`, a
/// seeded random vertex subset inside an interior search region for odd `i`.
pub fn regions(i: usize, d: &GridDomain) -> (RegionMask, RegionMask) {
    let full = RegionMask::full(*d);
    if i.is_multiple_of(2) || d.len() < 9 {
        return (full.clone(), full);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(7 + i as u64);
    let search = RegionMask::interior(*d);
    let mut v: Vec<bool> = (0..d.len())
        .map(|k| search.contains(k) && rng.gen_bool(0.4))
        .collect();
    if let Some(k) = search.indices().next() {
        v[k] = true;
    }
    (RegionMask::from_mask(*d, v).unwrap(), search)
}

/// One vertex of the brute-force scan.
#[derive(Debug, PartialEq)]
pub struct Slid {
    pub vertex: usize,
    pub constant: f64,
    pub argmin: usize,
    pub touches: Vec<usize>,
}

/// `c(y) = min_x s u(x) + K/(1+alpha) |x - y|^(1+alpha)` over the search
/// region (`s = 1` below, `-1` above), the first minimizing node, and every
/// node within `4 K h^(1+alpha)` of the minimum. Distances are measured in
/// node offsets, `|x - y|^(1+alpha) = h^(1+alpha) (di^2 + dj^2)^((1+alpha)/2)`.
pub fn brute_slide(
    u: &ScalarField,
    v: &RegionMask,
    k: f64,
    side: Side,
    alpha: f64,
    search: &RegionMask,
) -> (Vec<Slid>, Vec<bool>) {
    let d = u.domain();
    let s = if side == Side::Below { 1.0 } else { -1.0 };
    let coef = k / (1.0 + alpha) * d.h().powf(1.0 + alpha);
    let tol = 4.0 * k * d.h().powf(1.0 + alpha);
    let cone = |x: usize, y: usize| {
        let (xi, xj) = d.multi_index(x);
        let (yi, yj) = d.multi_index(y);
        let (a, b) = (xi.abs_diff(yi), xj.abs_diff(yj));
        coef * ((a * a + b * b) as f64).powf(0.5 * (1.0 + alpha))
    };
    let mut touched = vec![false; d.len()];
    let mut out = Vec::new();
    for y in v.indices() {
        let vals: Vec<(usize, f64)> = search
            .indices()
            .map(|x| (x, s * u.get(x) + cone(x, y)))
            .collect();
        let (argmin, constant) = vals
            .iter()
            .fold((usize::MAX, f64::INFINITY), |acc, &(x, c)| {
                if c < acc.1 {
                    (x, c)
                } else {
                    acc
                }
            });
        let touches: Vec<usize> = vals
            .iter()
            .filter(|&&(_, c)| c <= constant + tol)
            .map(|&(x, _)| x)
            .collect();
        for &t in &touches {
            touched[t] = true;
        }
        out.push(Slid {
            vertex: y,
            constant,
            argmin,
            touches,
        });
    }
    (out, touched)
}

/// Number of disagreements between a contact set and the brute-force scan.
pub fn oracle_mismatches(
    c: &ContactSet,
    u: &ScalarField,
    v: &RegionMask,
    search: &RegionMask,
) -> usize {
    let (slid, touched) = brute_slide(u, v, c.opening, c.side, c.alpha, search);
    let mut bad = usize::from(c.touch.as_slice() != touched.as_slice());
    bad += slid.len().abs_diff(c.records.len());
    for (r, s) in c.records.iter().zip(&slid) {
        let same = r.vertex == s.vertex
            && r.slide_constant.to_bits() == s.constant.to_bits()
            && r.argmin == s.argmin
            && r.touches == s.touches;
        bad += usize::from(!same);
    }
    bad
}
