use crate::cones::{touch_tolerance, Side};
use crate::error::{Error, Result};
use crate::exec::{map_indices, Exec};
use crate::field::{GridDomain, RegionMask, ScalarField};
use serde::Serialize;

/// Block edge length (in nodes) of the pruned scan.
const BLOCK: usize = 8;

/// Which scan evaluates the slide constants. Both produce bitwise identical
/// results.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Variant {
    /// Every vertex against every search node.
    Reference,
    /// Search nodes grouped in 8x8 blocks; blocks whose lower bound exceeds
    /// the running minimum are skipped.
    #[default]
    Blocked,
}

/// One slid cone: its vertex node, the slide constant
/// `c(y) = min_x w(x) + K/(1+alpha) |x - y|^(1+alpha)` with `w = u` (below)
/// or `w = -u` (above), the first node attaining it, and every node within
/// the touch tolerance of it (ascending).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VertexRecord {
    pub vertex: usize,
    pub slide_constant: f64,
    pub argmin: usize,
    pub touches: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ContactSet {
    pub side: Side,
    pub opening: f64,
    pub alpha: f64,
    pub tolerance: f64,
    pub vertices: RegionMask,
    pub touch: RegionMask,
    pub records: Vec<VertexRecord>,
}

impl ContactSet {
    /// For every touched node, the vertex that records it: the first vertex
    /// whose argmin it is, or else the first vertex whose touch list holds
    /// it. `None` for untouched nodes.
    pub fn recording_vertex(&self) -> Vec<Option<usize>> {
        let n = self.touch.domain().len();
        let mut by_argmin = vec![None; n];
        let mut by_touch = vec![None; n];
        for r in &self.records {
            by_argmin[r.argmin].get_or_insert(r.vertex);
            for &t in &r.touches {
                by_touch[t].get_or_insert(r.vertex);
            }
        }
        by_argmin
            .iter()
            .zip(&by_touch)
            .map(|(a, t)| a.or(*t))
            .collect()
    }
}

/// `K/(1+alpha) (h |offset|)^(1+alpha)` tabulated over absolute integer
/// offsets, made nondecreasing along both axes so block lower bounds are
/// valid in floating point.
pub(crate) struct PhiTable {
    cols: usize,
    data: Vec<f64>,
}

impl PhiTable {
    pub(crate) fn new(d: &GridDomain, k: f64, alpha: f64) -> PhiTable {
        let rows = d.n_pts()[0];
        let cols = if d.dim() == 2 { d.n_pts()[1] } else { 1 };
        let coef = k / (1.0 + alpha) * d.h().powf(1.0 + alpha);
        let e = 0.5 * (1.0 + alpha);
        let mut data = vec![0.0; rows * cols];
        for a in 0..rows {
            for b in 0..cols {
                let s = (a * a + b * b) as f64;
                let mut v = coef * s.powf(e);
                if a > 0 {
                    v = v.max(data[(a - 1) * cols + b]);
                }
                if b > 0 {
                    v = v.max(data[a * cols + b - 1]);
                }
                data[a * cols + b] = v;
            }
        }
        PhiTable { cols, data }
    }

    #[inline]
    pub(crate) fn get(&self, di: usize, dj: usize) -> f64 {
        self.data[di * self.cols + dj]
    }
}

struct Blocks {
    rows: Vec<(usize, usize)>,
    cols: Vec<(usize, usize)>,
    min: Vec<f64>,
}

fn spans(n: usize) -> Vec<(usize, usize)> {
    (0..n.div_ceil(BLOCK))
        .map(|b| (b * BLOCK, ((b + 1) * BLOCK).min(n)))
        .collect()
}

impl Blocks {
    fn new(d: &GridDomain, w: &[f64]) -> Blocks {
        let n0 = d.n_pts()[0];
        let n1 = if d.dim() == 2 { d.n_pts()[1] } else { 1 };
        let rows = spans(n0);
        let cols = spans(n1);
        let mut min = vec![f64::INFINITY; rows.len() * cols.len()];
        for (bi, &(r0, r1)) in rows.iter().enumerate() {
            for (bj, &(c0, c1)) in cols.iter().enumerate() {
                let m = &mut min[bi * cols.len() + bj];
                for i in r0..r1 {
                    for j in c0..c1 {
                        *m = m.min(w[i * n1 + j]);
                    }
                }
            }
        }
        Blocks { rows, cols, min }
    }
}

#[inline]
fn gap(y: usize, lo: usize, hi: usize) -> usize {
    if y < lo {
        lo - y
    } else if y >= hi {
        y + 1 - hi
    } else {
        0
    }
}

struct Problem<'a> {
    d: GridDomain,
    n1: usize,
    w: Vec<f64>,
    search: &'a RegionMask,
    phi: PhiTable,
    tol: f64,
}

impl Problem<'_> {
    #[inline]
    fn eval(&self, y: (usize, usize), x: usize) -> f64 {
        let (i, j) = (x / self.n1, x % self.n1);
        self.w[x] + self.phi.get(i.abs_diff(y.0), j.abs_diff(y.1))
    }

    fn reference(&self, v: usize) -> VertexRecord {
        let y = self.d.multi_index(v);
        let mut best = f64::INFINITY;
        let mut arg = usize::MAX;
        for x in self.search.indices() {
            let val = self.eval(y, x);
            if val < best {
                best = val;
                arg = x;
            }
        }
        let cut = best + self.tol;
        let touches = self
            .search
            .indices()
            .filter(|&x| self.eval(y, x) <= cut)
            .collect();
        VertexRecord {
            vertex: v,
            slide_constant: best,
            argmin: arg,
            touches,
        }
    }

    fn scan_block(
        &self,
        b: &Blocks,
        bi: usize,
        bj: usize,
        y: (usize, usize),
        f: &mut impl FnMut(usize, f64),
    ) {
        let (r0, r1) = b.rows[bi];
        let (c0, c1) = b.cols[bj];
        for i in r0..r1 {
            let di = i.abs_diff(y.0);
            for j in c0..c1 {
                let x = i * self.n1 + j;
                let wx = self.w[x];
                if wx.is_finite() {
                    f(x, wx + self.phi.get(di, j.abs_diff(y.1)));
                }
            }
        }
    }

    fn blocked(&self, b: &Blocks, v: usize) -> VertexRecord {
        let y = self.d.multi_index(v);
        let nb = b.cols.len();
        let lb: Vec<f64> = (0..b.min.len())
            .map(|k| {
                let m = b.min[k];
                if m.is_finite() {
                    let (r0, r1) = b.rows[k / nb];
                    let (c0, c1) = b.cols[k % nb];
                    m + self.phi.get(gap(y.0, r0, r1), gap(y.1, c0, c1))
                } else {
                    f64::INFINITY
                }
            })
            .collect();
        let first = (0..lb.len()).fold(0, |a, k| if lb[k] < lb[a] { k } else { a });
        let mut best = f64::INFINITY;
        let mut arg = usize::MAX;
        let take = |k: usize, best: &mut f64, arg: &mut usize| {
            self.scan_block(b, k / nb, k % nb, y, &mut |x, val| {
                if val < *best || (val == *best && x < *arg) {
                    *best = val;
                    *arg = x;
                }
            })
        };
        take(first, &mut best, &mut arg);
        for (k, &bound) in lb.iter().enumerate() {
            if k != first && bound <= best {
                take(k, &mut best, &mut arg);
            }
        }
        let cut = best + self.tol;
        let mut touches = Vec::new();
        for (k, &bound) in lb.iter().enumerate() {
            if bound <= cut {
                self.scan_block(b, k / nb, k % nb, y, &mut |x, val| {
                    if val <= cut {
                        touches.push(x);
                    }
                });
            }
        }
        touches.sort_unstable();
        VertexRecord {
            vertex: v,
            slide_constant: best,
            argmin: arg,
            touches,
        }
    }
}

fn validate(
    u: &ScalarField,
    v: &RegionMask,
    k: f64,
    alpha: f64,
    search: &RegionMask,
) -> Result<()> {
    if !u.domain().same_grid(v.domain()) || !u.domain().same_grid(search.domain()) {
        return Err(Error::GridMismatch);
    }
    if v.is_empty() {
        return Err(Error::EmptyRegion);
    }
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "opening must be positive, got {k}"
        )));
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "alpha must lie in (0, 1], got {alpha}"
        )));
    }
    if !v.is_subset_of(search) {
        return Err(Error::Precondition(
            "vertex set must lie inside the search region".into(),
        ));
    }
    Ok(())
}

/// Slides cones of opening `K` with vertices in `v` against `u` and returns
/// the contact set. Uses the blocked scan with the default execution policy.
pub fn slide_transform(
    u: &ScalarField,
    v: &RegionMask,
    k: f64,
    side: Side,
    alpha: f64,
    search: &RegionMask,
) -> Result<ContactSet> {
    slide_transform_with(
        u,
        v,
        k,
        side,
        alpha,
        search,
        Exec::default(),
        Variant::Blocked,
    )
}

#[allow(clippy::too_many_arguments)]
pub fn slide_transform_with(
    u: &ScalarField,
    v: &RegionMask,
    k: f64,
    side: Side,
    alpha: f64,
    search: &RegionMask,
    exec: Exec,
    variant: Variant,
) -> Result<ContactSet> {
    validate(u, v, k, alpha, search)?;
    let d = *u.domain();
    let sgn = match side {
        Side::Below => 1.0,
        Side::Above => -1.0,
    };
    let w: Vec<f64> = (0..d.len())
        .map(|i| {
            if search.contains(i) {
                sgn * u.get(i)
            } else {
                f64::INFINITY
            }
        })
        .collect();
    let n1 = if d.dim() == 2 { d.n_pts()[1] } else { 1 };
    let tol = touch_tolerance(k, d.h(), alpha);
    let p = Problem {
        d,
        n1,
        w,
        search,
        phi: PhiTable::new(&d, k, alpha),
        tol,
    };
    let verts: Vec<usize> = v.indices().collect();
    let records = match variant {
        Variant::Reference => map_indices(exec, verts.len(), |i| p.reference(verts[i])),
        Variant::Blocked => {
            let blocks = Blocks::new(&d, &p.w);
            map_indices(exec, verts.len(), |i| p.blocked(&blocks, verts[i]))
        }
    };
    let mut touched = vec![false; d.len()];
    for r in &records {
        for &t in &r.touches {
            touched[t] = true;
        }
    }
    Ok(ContactSet {
        side,
        opening: k,
        alpha,
        tolerance: tol,
        vertices: v.clone(),
        touch: RegionMask::from_mask(d, touched)?,
        records,
    })
}
