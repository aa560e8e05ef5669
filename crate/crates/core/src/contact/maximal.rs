use crate::error::{Error, Result};
use crate::exec::{map_indices, Exec};
use crate::field::{GridDomain, RegionMask, ScalarField, BALL_SLACK};

/// `{2h, 4h, 8h, ...}` up to and including the diagonal of the box.
pub fn default_radii(d: &GridDomain) -> Vec<f64> {
    let diam = (0..d.dim())
        .map(|a| (d.hi()[a] - d.lo()[a]).powi(2))
        .sum::<f64>()
        .sqrt();
    let mut r = 2.0 * d.h();
    let mut out = Vec::new();
    while r < diam {
        out.push(r);
        r *= 2.0;
    }
    out.push(diam);
    out
}

/// Half-widths `w(di) = floor(sqrt(R^2 - di^2))` of the lattice ball of
/// radius `R = r / h`, and its node count.
fn lattice_ball(r: f64, h: f64, dim: usize) -> (Vec<usize>, usize) {
    let rr = r / h * (1.0 + BALL_SLACK);
    let rmax = rr.floor() as usize;
    if dim == 1 {
        return (vec![rmax], 2 * rmax + 1);
    }
    let widths: Vec<usize> = (0..=rmax)
        .map(|di| (rr * rr - (di * di) as f64).max(0.0).sqrt().floor() as usize)
        .collect();
    let count = (2 * widths[0] + 1) + 2 * widths[1..].iter().map(|w| 2 * w + 1).sum::<usize>();
    (widths, count)
}

/// Discrete Hardy-Littlewood maximal function
/// `sup_r (sum over B_r(x) and region of |g|) / #(lattice ball of radius r)`
/// over the supplied radii. The denominator is the full ball, so averages
/// near the edge of the region are damped.
pub fn maximal_function(
    g: &ScalarField,
    region: &RegionMask,
    radii: &[f64],
) -> Result<ScalarField> {
    maximal_function_with(g, region, radii, Exec::default())
}

pub fn maximal_function_with(
    g: &ScalarField,
    region: &RegionMask,
    radii: &[f64],
    exec: Exec,
) -> Result<ScalarField> {
    let d = *g.domain();
    if !d.same_grid(region.domain()) {
        return Err(Error::GridMismatch);
    }
    if radii.is_empty() {
        return Err(Error::InvalidParameter("no radii supplied".into()));
    }
    if let Some(&r) = radii.iter().find(|&&r| !(r >= d.h() * (1.0 - 1e-12))) {
        return Err(Error::RadiusTooSmall { r, h: d.h() });
    }
    let n0 = d.n_pts()[0];
    let n1 = if d.dim() == 2 { d.n_pts()[1] } else { 1 };
    let (rows, cols) = if d.dim() == 2 { (n0, n1) } else { (1, n0) };
    // Prefix sums of |g| restricted to the region, one row at a time.
    let mut prefix = vec![0.0; rows * (cols + 1)];
    for i in 0..rows {
        for j in 0..cols {
            let k = i * cols + j;
            let v = if region.contains(k) {
                g.get(k).abs()
            } else {
                0.0
            };
            prefix[i * (cols + 1) + j + 1] = prefix[i * (cols + 1) + j] + v;
        }
    }
    let balls: Vec<(Vec<usize>, usize)> = radii
        .iter()
        .map(|&r| lattice_ball(r, d.h(), d.dim()))
        .collect();
    let row_sum = |i: usize, j: usize, w: usize| -> f64 {
        let a = j.saturating_sub(w);
        let b = (j + w + 1).min(cols);
        prefix[i * (cols + 1) + b] - prefix[i * (cols + 1) + a]
    };
    let values = map_indices(exec, d.len(), |k| {
        let (i, j) = if d.dim() == 2 {
            (k / cols, k % cols)
        } else {
            (0, k)
        };
        let mut best = 0.0f64;
        for (widths, count) in &balls {
            let mut s = row_sum(i, j, widths[0]);
            if d.dim() == 2 {
                for (di, &w) in widths.iter().enumerate().skip(1) {
                    if i >= di {
                        s += row_sum(i - di, j, w);
                    }
                    if i + di < rows {
                        s += row_sum(i + di, j, w);
                    }
                }
            }
            best = best.max(s / *count as f64);
        }
        best
    });
    ScalarField::new(d, values)
}
