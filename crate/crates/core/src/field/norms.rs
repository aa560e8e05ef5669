use super::{RegionMask, ScalarField, VectorField};
use crate::error::{Error, Result};
use crate::exec::{det_max, det_sum, Exec};
use crate::linalg::Matrix;

/// `h^dim` times the number of nodes in the mask.
pub fn measure(mask: &RegionMask) -> f64 {
    mask.count() as f64 * mask.domain().cell_measure()
}

fn check_p(p: f64) -> Result<()> {
    if p > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "exponent p must be positive, got {p}"
        )))
    }
}

/// Riemann-sum `L^p` norm over the region: `(h^dim * sum |g|^p)^(1/p)`, or
/// the maximum of `|g|` when `p` is infinite. Exponents below one are
/// evaluated by the same formula.
pub fn lp_norm(g: &ScalarField, p: f64, region: &RegionMask) -> Result<f64> {
    check_p(p)?;
    if !g.domain().same_grid(region.domain()) {
        return Err(Error::GridMismatch);
    }
    if region.is_empty() {
        return Err(Error::EmptyRegion);
    }
    let v = g.values();
    let m = region.as_slice();
    if p.is_infinite() {
        return Ok(det_max(Exec::default(), v.len(), |i| {
            if m[i] {
                v[i].abs()
            } else {
                0.0
            }
        }));
    }
    let s = det_sum(Exec::default(), v.len(), |i| {
        if m[i] {
            v[i].abs().powf(p)
        } else {
            0.0
        }
    });
    Ok((g.domain().cell_measure() * s).powf(1.0 / p))
}

/// Forward-difference derivative matrix `D_b V_a` at a node, or `None` when
/// the forward neighbor along some axis is missing.
pub(crate) fn forward_jacobian(v: &VectorField, idx: usize) -> Option<Matrix> {
    let d = v.domain();
    let (i, j) = d.multi_index(idx);
    let n = d.n_pts();
    if i + 1 >= n[0] || (d.dim() == 2 && j + 1 >= n[1]) {
        return None;
    }
    let here = v.get(idx);
    let nb = |b: usize| {
        if b == 0 {
            d.index(i + 1, j)
        } else {
            d.index(i, j + 1)
        }
    };
    Some(Matrix::from_fn(d.dim(), |a, b| {
        (v.get(nb(b))[a] - here[a]) / d.h()
    }))
}

/// `L^p` norm (Frobenius pointwise, Riemann sum) of the forward-difference
/// derivative of `v` over the region. Grid-boundary nodes are excluded.
pub fn w1p_seminorm(v: &VectorField, p: f64, region: &RegionMask) -> Result<f64> {
    check_p(p)?;
    if !v.domain().same_grid(region.domain()) {
        return Err(Error::GridMismatch);
    }
    let d = *v.domain();
    let used = |i: usize| region.contains(i) && !d.is_boundary(i);
    if !(0..d.len()).any(used) {
        return Err(Error::EmptyRegion);
    }
    let frob = |i: usize| {
        if used(i) {
            forward_jacobian(v, i).map_or(0.0, |m| m.frobenius())
        } else {
            0.0
        }
    };
    if p.is_infinite() {
        return Ok(det_max(Exec::default(), d.len(), frob));
    }
    let s = det_sum(Exec::default(), d.len(), |i| frob(i).powf(p));
    Ok((d.cell_measure() * s).powf(1.0 / p))
}

/// `S = sum_{k>=1} M^{pk} |{g > eta M^k}|`, truncated at the first empty
/// superlevel set. Returns `S` and the last level that contributed (0 when
/// none did).
pub fn dyadic_lp_sum(
    g: &ScalarField,
    eta: f64,
    m: f64,
    p: f64,
    region: &RegionMask,
) -> Result<(f64, usize)> {
    check_p(p)?;
    if !(eta > 0.0) || !(m > 1.0) {
        return Err(Error::InvalidParameter(format!(
            "need eta > 0 and M > 1, got eta={eta}, M={m}"
        )));
    }
    if !g.domain().same_grid(region.domain()) {
        return Err(Error::GridMismatch);
    }
    let vals: Vec<f64> = region.indices().map(|i| g.get(i)).collect();
    if let Some((k, &v)) = region.indices().zip(&vals).find(|(_, &v)| v < 0.0) {
        return Err(Error::NegativeValue { index: k, value: v });
    }
    let cell = g.domain().cell_measure();
    let mut terms = Vec::new();
    let mut k = 1usize;
    loop {
        let level = eta * m.powi(k as i32);
        let count = vals.iter().filter(|&&v| v > level).count();
        if count == 0 || !level.is_finite() {
            break;
        }
        terms.push(m.powf(p * k as f64) * count as f64 * cell);
        k += 1;
    }
    Ok((terms.iter().sum(), k - 1))
}

/// A constant `C = C(eta, M, p) >= 1` with
/// `S / C <= ||g||_p^p <= C (S + |region|)` for every nonnegative `g`.
///
/// On the band `eta M^k < g <= eta M^{k+1}` one has `g^p <= (eta M)^p M^{pk}`,
/// which gives the upper bound with `(eta M)^p`; summing `g^p > eta^p M^{pk}`
/// over the same bands and telescoping gives the lower bound with
/// `1 / (eta^p (1 - M^{-p}))`.
pub fn dyadic_constant(eta: f64, m: f64, p: f64) -> f64 {
    let upper = (eta * m).powf(p);
    let lower = 1.0 / (eta.powf(p) * (1.0 - m.powf(-p)));
    upper.max(lower).max(1.0)
}
