//! `C^{1,alpha}` cones `P(x) = -+ K/(1+alpha) |x - y|^(1+alpha) + C`:
//! evaluation jets, scaling, the critical point of a cone difference, the
//! exterior maximum principle for that difference, and tangent cones built
//! from gradient data.

use crate::error::{Error, Result};
use crate::field::{gradient_at, GridDomain, RegionMask, ScalarField};
use crate::linalg::{SymMatrix, Vector};
use crate::operators::stress;
use serde::{Deserialize, Serialize};

/// Concave cones open downward (`-K/(1+alpha) |x-y|^(1+alpha)`), convex ones
/// upward.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConeKind {
    Concave,
    Convex,
}

impl ConeKind {
    fn sign(self) -> f64 {
        match self {
            ConeKind::Concave => -1.0,
            ConeKind::Convex => 1.0,
        }
    }
}

/// Which side of the graph a test object touches from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    /// Concave cones touching from below.
    Below,
    /// Convex cones touching from above.
    Above,
}

impl Side {
    pub fn cone_kind(self) -> ConeKind {
        match self {
            Side::Below => ConeKind::Concave,
            Side::Above => ConeKind::Convex,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cone {
    #[serde(rename = "sign")]
    pub kind: ConeKind,
    #[serde(rename = "K")]
    pub opening: f64,
    pub vertex: Vector,
    #[serde(rename = "C")]
    pub offset: f64,
    pub alpha: f64,
}

/// Value and derivatives of a cone at a point. At the vertex the gradient is
/// its limit 0 and the Hessian is `None` unless `alpha = 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConeJet {
    pub value: f64,
    pub grad: Vector,
    pub hess: Option<SymMatrix>,
    pub at_vertex: bool,
}

impl Cone {
    pub fn new(
        kind: ConeKind,
        opening: f64,
        vertex: Vector,
        offset: f64,
        alpha: f64,
    ) -> Result<Cone> {
        if !(opening > 0.0 && opening.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "cone opening must be positive, got {opening}"
            )));
        }
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "alpha must lie in (0, 1], got {alpha}"
            )));
        }
        if !vertex.is_finite() || !offset.is_finite() {
            return Err(Error::NonFinite("cone"));
        }
        Ok(Cone {
            kind,
            opening,
            vertex,
            offset,
            alpha,
        })
    }

    /// `1/alpha - 1`, the degeneracy exponent matched to this cone.
    pub fn gamma(&self) -> f64 {
        1.0 / self.alpha - 1.0
    }

    pub fn value(&self, x: &Vector) -> f64 {
        let r = (*x - self.vertex).norm();
        self.kind.sign() * self.opening / (1.0 + self.alpha) * r.powf(1.0 + self.alpha)
            + self.offset
    }

    pub fn jet(&self, x: &Vector) -> ConeJet {
        cone_jet(self, x)
    }

    /// `|DP|^gamma D^2 P` at `x`, or `None` at the vertex.
    pub fn stress_hessian(&self, x: &Vector) -> Option<SymMatrix> {
        let j = cone_jet(self, x);
        if j.at_vertex {
            return None;
        }
        let g = self.gamma();
        let w = if g == 0.0 { 1.0 } else { j.grad.norm().powf(g) };
        j.hess.map(|h| h.scale(w))
    }
}

pub fn cone_jet(c: &Cone, x: &Vector) -> ConeJet {
    let s = c.kind.sign();
    let z = *x - c.vertex;
    let r = z.norm();
    let n = x.dim();
    if r == 0.0 {
        let hess = (c.alpha == 1.0).then(|| SymMatrix::identity(n).scale(s * c.opening));
        return ConeJet {
            value: c.offset,
            grad: Vector::zeros(n),
            hess,
            at_vertex: true,
        };
    }
    let a = c.alpha;
    let value = s * c.opening / (1.0 + a) * r.powf(1.0 + a) + c.offset;
    let w = s * c.opening * r.powf(a - 1.0);
    let grad = z.scale(w);
    let unit = z.scale(1.0 / r);
    let hess = (SymMatrix::identity(n) + unit.outer().scale(a - 1.0)).scale(w);
    ConeJet {
        value,
        grad,
        hess: Some(hess),
        at_vertex: false,
    }
}

/// `P(r x) / r^(1+alpha)` as a cone: same opening, vertex `y / r`, offset
/// `C / r^(1+alpha)`.
pub fn cone_scale(c: &Cone, r: f64) -> Result<Cone> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "scale factor must be positive, got {r}"
        )));
    }
    if r == 1.0 {
        return Ok(*c);
    }
    Ok(Cone {
        vertex: c.vertex.scale(1.0 / r),
        offset: c.offset / r.powf(1.0 + c.alpha),
        ..*c
    })
}

/// Unique critical point of `Q = P_hi - P_lo` for concave cones with
/// `opening_hi > opening_lo`: `(m y_hi - y_lo) / (m - 1)` with
/// `m = (opening_hi / opening_lo)^(1/alpha)`.
pub fn cone_diff_vertex(
    opening_hi: f64,
    vertex_hi: &Vector,
    opening_lo: f64,
    vertex_lo: &Vector,
    alpha: f64,
) -> Result<Vector> {
    if !(opening_lo > 0.0) || !(opening_hi > opening_lo) {
        return Err(Error::NoUniqueCriticalPoint {
            hi: opening_hi,
            lo: opening_lo,
        });
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "alpha must lie in (0, 1], got {alpha}"
        )));
    }
    let m = (opening_hi / opening_lo).powf(1.0 / alpha);
    Ok((vertex_hi.scale(m) - *vertex_lo).scale(1.0 / (m - 1.0)))
}

/// Outcome of the exterior maximum principle check.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MaxPrinciple {
    pub holds: bool,
    /// Maximum of `Q` over the nodes of the enlarged box outside the region.
    pub max_outside: f64,
    /// Maximum of `Q` over the exterior nodes adjacent to the region.
    pub max_boundary: f64,
    pub tolerance: f64,
}

/// Samples `Q = P_hi - P_lo` (concave cones, zero offsets) on a grid four
/// times the size of the region's bounding box, aligned with the region's
/// grid, and checks that the maximum of `Q` outside the region is attained on
/// its boundary layer.
pub fn cone_diff_max_principle(
    opening_hi: f64,
    vertex_hi: &Vector,
    opening_lo: f64,
    vertex_lo: &Vector,
    alpha: f64,
    region: &RegionMask,
) -> Result<MaxPrinciple> {
    let y0 = cone_diff_vertex(opening_hi, vertex_hi, opening_lo, vertex_lo, alpha)?;
    let d = *region.domain();
    if region.is_empty() {
        return Err(Error::EmptyRegion);
    }
    match d.nearest_node(&y0) {
        Some(k) if region.contains(k) && interior_of(region, k) => {}
        _ => return Err(Error::VertexOutsideRegion(y0.as_slice().to_vec())),
    }
    let hi = Cone::new(ConeKind::Concave, opening_hi, *vertex_hi, 0.0, alpha)?;
    let lo = Cone::new(ConeKind::Concave, opening_lo, *vertex_lo, 0.0, alpha)?;
    let q = |x: &Vector| hi.value(x) - lo.value(x);

    // Bounding box of the region in node indices, enlarged to 4x its size.
    let dim = d.dim();
    let mut bmin = [usize::MAX; 2];
    let mut bmax = [0usize; 2];
    for k in region.indices() {
        let (i, j) = d.multi_index(k);
        let ij = [i, j];
        for a in 0..dim {
            bmin[a] = bmin[a].min(ij[a]);
            bmax[a] = bmax[a].max(ij[a]);
        }
    }
    let mut lo_idx = [0isize; 2];
    let mut n_big = [1usize; 2];
    for a in 0..dim {
        let w = (bmax[a] - bmin[a]) as isize + 1;
        let c2 = (bmin[a] + bmax[a]) as isize;
        let half = 2 * w;
        lo_idx[a] = c2 / 2 - half;
        n_big[a] = (4 * w + 1) as usize;
    }
    let h = d.h();
    let in_region = |gi: isize, gj: isize| -> bool {
        if gi < 0 || gi >= d.n_pts()[0] as isize {
            return false;
        }
        if dim == 2 && (gj < 0 || gj >= d.n_pts()[1] as isize) {
            return false;
        }
        region.contains(d.index(gi as usize, if dim == 2 { gj as usize } else { 0 }))
    };
    let point = |gi: isize, gj: isize| -> Vector {
        if dim == 1 {
            Vector::new1(d.lo()[0] + gi as f64 * h)
        } else {
            Vector::new2(d.lo()[0] + gi as f64 * h, d.lo()[1] + gj as f64 * h)
        }
    };
    let mut max_outside = f64::NEG_INFINITY;
    let mut max_boundary = f64::NEG_INFINITY;
    let mut q_abs = 0.0f64;
    for a in 0..n_big[0] {
        let gi = lo_idx[0] + a as isize;
        for b in 0..n_big[1] {
            let gj = if dim == 2 { lo_idx[1] + b as isize } else { 0 };
            let v = q(&point(gi, gj));
            q_abs = q_abs.max(v.abs());
            if in_region(gi, gj) {
                continue;
            }
            max_outside = max_outside.max(v);
            let adjacent = if dim == 1 {
                in_region(gi - 1, 0) || in_region(gi + 1, 0)
            } else {
                (-1..=1)
                    .any(|di| (-1..=1).any(|dj| (di, dj) != (0, 0) && in_region(gi + di, gj + dj)))
            };
            if adjacent {
                max_boundary = max_boundary.max(v);
            }
        }
    }
    let tolerance = 1e-9 * (1.0 + q_abs);
    Ok(MaxPrinciple {
        holds: max_outside <= max_boundary + tolerance,
        max_outside,
        max_boundary,
        tolerance,
    })
}

fn interior_of(region: &RegionMask, k: usize) -> bool {
    let d = region.domain();
    if d.is_boundary(k) {
        return false;
    }
    let (i, j) = d.multi_index(k);
    if d.dim() == 1 {
        return region.contains(d.index(i - 1, 0)) && region.contains(d.index(i + 1, 0));
    }
    [(i - 1, j), (i + 1, j), (i, j - 1), (i, j + 1)]
        .iter()
        .all(|&(a, b)| region.contains(d.index(a, b)))
}

/// `4 K h^(1+alpha)`: slack for discrete touching.
pub fn touch_tolerance(opening: f64, h: f64, alpha: f64) -> f64 {
    4.0 * opening * h.powf(1.0 + alpha)
}

/// The cone of opening `K` matching value and discrete gradient of `u` at
/// node `x0`, with vertex `x0 +- K^-(1+gamma) V(Du(x0))`. Returns `None` when
/// it fails to stay on its side of `u` over `search` (within the touch
/// tolerance).
pub fn tangent_cone_at(
    u: &ScalarField,
    x0: usize,
    k: f64,
    side: Side,
    gamma: f64,
    search: &RegionMask,
) -> Result<Option<Cone>> {
    let d: GridDomain = *u.domain();
    if !d.same_grid(search.domain()) {
        return Err(Error::GridMismatch);
    }
    if x0 >= d.len() || d.is_boundary(x0) {
        return Err(Error::InvalidParameter(format!(
            "node {x0} is not an interior node"
        )));
    }
    if !(k > 0.0) || !(gamma >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need K > 0 and gamma >= 0, got {k}, {gamma}"
        )));
    }
    let alpha = 1.0 / (1.0 + gamma);
    let x = d.coord(x0);
    let shift = stress(&gradient_at(u, x0), gamma).scale(k.powf(-(1.0 + gamma)));
    let (kind, vertex) = match side {
        Side::Below => (ConeKind::Concave, x + shift),
        Side::Above => (ConeKind::Convex, x - shift),
    };
    if !d.contains_point(&vertex) {
        return Err(Error::VertexOutsideDomain(vertex.as_slice().to_vec()));
    }
    let mut cone = Cone::new(kind, k, vertex, 0.0, alpha)?;
    cone.offset = u.get(x0) - cone.value(&x);
    let tol = touch_tolerance(k, d.h(), alpha);
    let ok = search.indices().all(|i| {
        let p = cone.value(&d.coord(i));
        match side {
            Side::Below => p <= u.get(i) + tol,
            Side::Above => p >= u.get(i) - tol,
        }
    });
    Ok(ok.then_some(cone))
}
