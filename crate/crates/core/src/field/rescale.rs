use super::{GridDomain, ScalarField};
use crate::error::{Error, Result};
use crate::linalg::Vector;

const SNAP: f64 = 1e-9;

/// Multilinear interpolation of `u` at `x`. Positions within `1e-9 h` of a
/// node line snap onto it, so node-to-node maps are exact.
pub fn interpolate(u: &ScalarField, x: &Vector) -> Result<f64> {
    let d = u.domain();
    if x.dim() != d.dim() || !d.contains_point(x) {
        return Err(Error::OutsideDomain(x.as_slice().to_vec()));
    }
    let n = d.n_pts();
    let locate = |a: usize| -> (usize, f64) {
        let mut t = (x[a] - d.lo()[a]) / d.h();
        let r = t.round();
        if (t - r).abs() < SNAP {
            t = r;
        }
        let t = t.clamp(0.0, (n[a] - 1) as f64);
        let k = (t.floor() as usize).min(n[a] - 2);
        (k, t - k as f64)
    };
    let (i, fi) = locate(0);
    let v = u.values();
    if d.dim() == 1 {
        return Ok(lerp(v[i], v[i + 1], fi));
    }
    let (j, fj) = locate(1);
    let row = |ii: usize| lerp(v[d.index(ii, j)], v[d.index(ii, j + 1)], fj);
    Ok(lerp(row(i), row(i + 1), fi))
}

#[inline]
fn lerp(a: f64, b: f64, t: f64) -> f64 {
    if t == 0.0 {
        a
    } else if t == 1.0 {
        b
    } else {
        (1.0 - t) * a + t * b
    }
}

/// `u~(y) = u(r y + x0) / (r^(1+alpha) * level_factor)` sampled on the nodes
/// of `target`.
pub fn field_rescale_onto(
    u: &ScalarField,
    r: f64,
    x0: &Vector,
    level_factor: f64,
    alpha: f64,
    target: &GridDomain,
) -> Result<ScalarField> {
    if !(r > 0.0) || !(level_factor > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need r > 0 and level_factor > 0, got r={r}, level={level_factor}"
        )));
    }
    if target.dim() != u.domain().dim() || x0.dim() != target.dim() {
        return Err(Error::GridMismatch);
    }
    let denom = r.powf(1.0 + alpha) * level_factor;
    let values = (0..target.len())
        .map(|k| {
            let y = target.coord(k);
            interpolate(u, &(y.scale(r) + *x0)).map(|v| v / denom)
        })
        .collect::<Result<Vec<_>>>()?;
    ScalarField::new(*target, values)
}

/// [`field_rescale_onto`] with the source grid as target.
pub fn field_rescale(
    u: &ScalarField,
    r: f64,
    x0: &Vector,
    level_factor: f64,
    alpha: f64,
) -> Result<ScalarField> {
    field_rescale_onto(u, r, x0, level_factor, alpha, u.domain())
}
