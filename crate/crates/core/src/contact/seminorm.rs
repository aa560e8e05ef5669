use crate::error::{Error, Result};
use crate::exec::{map_indices, Exec};
use crate::field::{RegionMask, ScalarField, BALL_SLACK};
use crate::linalg::Vector;

/// Bound on `production / exact` for the windowed minimax, measured against
/// the nested golden-section oracle on random and structured windows.
pub const FIT_SLACK: f64 = 1.02;

const SWEEPS: usize = 4;
const GOLDEN_ITERS: usize = 60;
const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Sampled window: offsets `x - x0` and values.
pub struct Window {
    pub offsets: Vec<Vector>,
    pub values: Vec<f64>,
}

impl Window {
    /// `min_c max_i |u_i - c - b . z_i| = (max - min) / 2` of the tilted values.
    pub fn deviation(&self, b: &Vector) -> f64 {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (z, &v) in self.offsets.iter().zip(&self.values) {
            let t = v - b.dot(z);
            lo = lo.min(t);
            hi = hi.max(t);
        }
        0.5 * (hi - lo)
    }

    fn dim(&self) -> usize {
        self.offsets[0].dim()
    }

    /// Every minimizing slope satisfies `|b_a| <= osc / extent_a`.
    fn slope_bound(&self) -> f64 {
        let osc = self.values.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b))
            - self.values.iter().fold(f64::INFINITY, |a, &b| a.min(b));
        let ext = (0..self.dim())
            .map(|a| self.offsets.iter().map(|z| z[a].abs()).fold(0.0, f64::max))
            .fold(f64::INFINITY, f64::min);
        osc / ext + 1e-12
    }

    /// Least-squares slope of the values against the offsets.
    fn ls_slope(&self) -> Vector {
        let n = self.values.len() as f64;
        let dim = self.dim();
        let mut mz = Vector::zeros(dim);
        for z in &self.offsets {
            mz = mz + *z;
        }
        mz = mz.scale(1.0 / n);
        let mv = self.values.iter().sum::<f64>() / n;
        let mut a = [[0.0; 2]; 2];
        let mut r = [0.0; 2];
        for (z, &v) in self.offsets.iter().zip(&self.values) {
            let c = *z - mz;
            for p in 0..dim {
                r[p] += c[p] * (v - mv);
                for q in 0..dim {
                    a[p][q] += c[p] * c[q];
                }
            }
        }
        if dim == 1 {
            return Vector::new1(r[0] / a[0][0]);
        }
        let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
        Vector::new2(
            (a[1][1] * r[0] - a[0][1] * r[1]) / det,
            (a[0][0] * r[1] - a[1][0] * r[0]) / det,
        )
    }
}

/// Minimum of a convex function on `[lo, hi]` by golden section.
fn golden(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> (f64, f64) {
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..GOLDEN_ITERS {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Upper bound on `inf_l max |u - l|` over affine `l`: least-squares start,
/// then golden-section line searches along the axes and diagonals.
pub fn window_minimax(w: &Window) -> f64 {
    let dim = w.dim();
    let bound = w.slope_bound();
    let mut b = w.ls_slope();
    if !b.is_finite() {
        b = Vector::zeros(dim);
    }
    let mut best = w.deviation(&b);
    let dirs: Vec<Vector> = if dim == 1 {
        vec![Vector::new1(1.0)]
    } else {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        vec![
            Vector::new2(1.0, 0.0),
            Vector::new2(0.0, 1.0),
            Vector::new2(s, s),
            Vector::new2(s, -s),
        ]
    };
    for _ in 0..SWEEPS {
        for e in &dirs {
            let (t, v) = golden(-2.0 * bound, 2.0 * bound, |t| {
                w.deviation(&(b + e.scale(t)))
            });
            if v < best {
                best = v;
                b = b + e.scale(t);
            }
        }
    }
    best
}

/// `inf_l max |u - l|` by nested golden section over the slope; exact up to
/// the line-search tolerance because the deviation is convex in the slope.
pub fn window_minimax_oracle(w: &Window) -> f64 {
    let bound = w.slope_bound();
    if w.dim() == 1 {
        return golden(-bound, bound, |t| w.deviation(&Vector::new1(t))).1;
    }
    golden(-bound, bound, |s| {
        golden(-bound, bound, |t| w.deviation(&Vector::new2(s, t))).1
    })
    .1
}

#[derive(Clone, Debug, PartialEq)]
pub struct SeminormField {
    /// `max_r inf_l ||u - l||_inf(B_r(x0)) / r^(1+alpha)`; 0 where not
    /// evaluated.
    pub values: ScalarField,
    pub evaluated: RegionMask,
    /// Region nodes whose largest window leaves the grid.
    pub skipped: RegionMask,
}

fn offsets(r: f64, h: f64, dim: usize) -> Vec<(isize, isize)> {
    let rr = r / h * (1.0 + BALL_SLACK);
    let m = rr.floor() as isize;
    let mut out = Vec::new();
    for di in -m..=m {
        if dim == 1 {
            out.push((di, 0));
            continue;
        }
        for dj in -m..=m {
            if ((di * di + dj * dj) as f64) <= rr * rr {
                out.push((di, dj));
            }
        }
    }
    out
}

/// Pointwise `C^{1,alpha}` seminorm over the given radii at every node of
/// `region`.
pub fn seminorm_field(
    u: &ScalarField,
    alpha: f64,
    radii: &[f64],
    region: &RegionMask,
) -> Result<SeminormField> {
    seminorm_field_with(u, alpha, radii, region, Exec::default(), window_minimax)
}

pub fn seminorm_field_with(
    u: &ScalarField,
    alpha: f64,
    radii: &[f64],
    region: &RegionMask,
    exec: Exec,
    minimax: fn(&Window) -> f64,
) -> Result<SeminormField> {
    let d = *u.domain();
    if !d.same_grid(region.domain()) {
        return Err(Error::GridMismatch);
    }
    if radii.is_empty() {
        return Err(Error::InvalidParameter("no radii supplied".into()));
    }
    if let Some(&r) = radii.iter().find(|&&r| !(r >= 2.0 * d.h() * (1.0 - 1e-12))) {
        return Err(Error::RadiusTooSmall { r, h: d.h() });
    }
    let stencils: Vec<Vec<(isize, isize)>> =
        radii.iter().map(|&r| offsets(r, d.h(), d.dim())).collect();
    let reach = stencils
        .iter()
        .flatten()
        .map(|&(a, b)| a.abs().max(b.abs()))
        .max()
        .unwrap_or(0) as usize;
    let n = d.n_pts();
    let fits = |k: usize| {
        let (i, j) = d.multi_index(k);
        let ok0 = i >= reach && i + reach < n[0];
        ok0 && (d.dim() == 1 || (j >= reach && j + reach < n[1]))
    };
    let nodes: Vec<usize> = region.indices().collect();
    let vals = map_indices(exec, nodes.len(), |q| {
        let k = nodes[q];
        if !fits(k) {
            return None;
        }
        let (i, j) = d.multi_index(k);
        let mut best = 0.0f64;
        for (st, &r) in stencils.iter().zip(radii) {
            let mut w = Window {
                offsets: Vec::with_capacity(st.len()),
                values: Vec::with_capacity(st.len()),
            };
            for &(a, b) in st {
                let ii = (i as isize + a) as usize;
                let jj = (j as isize + b) as usize;
                let idx = d.index(ii, jj);
                w.offsets.push(d.coord(idx) - d.coord(k));
                w.values.push(u.get(idx));
            }
            best = best.max(minimax(&w) / r.powf(1.0 + alpha));
        }
        Some(best)
    });
    let mut values = vec![0.0; d.len()];
    let mut evaluated = vec![false; d.len()];
    let mut skipped = vec![false; d.len()];
    for (q, v) in vals.into_iter().enumerate() {
        match v {
            Some(v) => {
                values[nodes[q]] = v;
                evaluated[nodes[q]] = true;
            }
            None => skipped[nodes[q]] = true,
        }
    }
    Ok(SeminormField {
        values: ScalarField::new(d, values)?,
        evaluated: RegionMask::from_mask(d, evaluated)?,
        skipped: RegionMask::from_mask(d, skipped)?,
    })
}
