//! Uniform grids on boxes in one or two dimensions, the fields sampled on
//! them, ball masks, discrete calculus and integral norms.
//!
//! Nodes are stored row-major: in 2D the node `(i, j)` (with `i` along the
//! first axis) lives at `i * n[1] + j`. Every node carries the weight
//! `h^dim`; boundary nodes are not half-weighted.

mod calculus;
pub mod io;
mod norms;
mod rescale;

pub use calculus::{gradient_at, gradient_central, hessian_at, hessian_central};
pub use norms::{dyadic_constant, dyadic_lp_sum, lp_norm, measure, w1p_seminorm};
pub use rescale::{field_rescale, field_rescale_onto, interpolate};

use crate::error::{Error, Result};
use crate::linalg::{SymMatrix, Vector};

/// Minimum number of nodes per axis.
pub const MIN_POINTS: usize = 5;

const H_REL_TOL: f64 = 1e-12;

/// A uniform grid on `[lo, hi]` (1D) or `[lo0, hi0] x [lo1, hi1]` (2D) with
/// the same spacing on every axis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridDomain {
    dim: usize,
    lo: [f64; 2],
    hi: [f64; 2],
    n: [usize; 2],
    h: f64,
}

impl GridDomain {
    pub fn new(lo: &[f64], hi: &[f64], n_pts: &[usize]) -> Result<Self> {
        let dim = lo.len();
        if !(dim == 1 || dim == 2) || hi.len() != dim || n_pts.len() != dim {
            return Err(Error::InvalidGrid(format!(
                "dimension must be 1 or 2, got {dim}"
            )));
        }
        let mut d = GridDomain {
            dim,
            lo: [0.0; 2],
            hi: [0.0; 2],
            n: [1, 1],
            h: 0.0,
        };
        let mut h0 = None;
        for a in 0..dim {
            if !(lo[a].is_finite() && hi[a].is_finite()) || lo[a] >= hi[a] {
                return Err(Error::InvalidGrid(format!(
                    "axis {a}: need lo < hi, got [{}, {}]",
                    lo[a], hi[a]
                )));
            }
            if n_pts[a] < MIN_POINTS {
                return Err(Error::DomainTooSmall {
                    needed: MIN_POINTS,
                    have: n_pts[a],
                });
            }
            let h = (hi[a] - lo[a]) / (n_pts[a] - 1) as f64;
            match h0 {
                None => h0 = Some(h),
                Some(h0) if ((h - h0) / h0).abs() > H_REL_TOL => {
                    return Err(Error::InvalidGrid(format!(
                        "non-uniform spacing {h0} vs {h}"
                    )));
                }
                _ => {}
            }
            d.lo[a] = lo[a];
            d.hi[a] = hi[a];
            d.n[a] = n_pts[a];
        }
        d.h = h0.unwrap();
        Ok(d)
    }

    pub fn interval(lo: f64, hi: f64, n: usize) -> Result<Self> {
        GridDomain::new(&[lo], &[hi], &[n])
    }

    /// The square `[lo, hi]^2` with `n` nodes per axis.
    pub fn square(lo: f64, hi: f64, n: usize) -> Result<Self> {
        GridDomain::new(&[lo, lo], &[hi, hi], &[n, n])
    }

    /// The cube `[lo, hi]^dim` with spacing `h` (rounded to the nearest
    /// node count).
    pub fn with_spacing(dim: usize, lo: f64, hi: f64, h: f64) -> Result<Self> {
        if !(h > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "spacing must be positive, got {h}"
            )));
        }
        let n = ((hi - lo) / h).round() as usize + 1;
        GridDomain::new(&vec![lo; dim], &vec![hi; dim], &vec![n; dim])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo[..self.dim]
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi[..self.dim]
    }

    pub fn n_pts(&self) -> &[usize] {
        &self.n[..self.dim]
    }

    pub fn len(&self) -> usize {
        self.n[0] * self.n[1]
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `h^dim`, the weight of one node.
    pub fn cell_measure(&self) -> f64 {
        self.h.powi(self.dim as i32)
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.n[1] + j
    }

    #[inline]
    pub fn multi_index(&self, idx: usize) -> (usize, usize) {
        (idx / self.n[1], idx % self.n[1])
    }

    #[inline]
    pub fn coord(&self, idx: usize) -> Vector {
        let (i, j) = self.multi_index(idx);
        if self.dim == 1 {
            Vector::new1(self.lo[0] + i as f64 * self.h)
        } else {
            Vector::new2(
                self.lo[0] + i as f64 * self.h,
                self.lo[1] + j as f64 * self.h,
            )
        }
    }

    pub fn is_boundary(&self, idx: usize) -> bool {
        let (i, j) = self.multi_index(idx);
        let b0 = i == 0 || i + 1 == self.n[0];
        if self.dim == 1 {
            b0
        } else {
            b0 || j == 0 || j + 1 == self.n[1]
        }
    }

    /// True when `x` lies in the closed box (with a relative slack of 1e-12).
    pub fn contains_point(&self, x: &Vector) -> bool {
        let eps = 1e-12 * (1.0 + self.h);
        (0..self.dim).all(|a| x[a] >= self.lo[a] - eps && x[a] <= self.hi[a] + eps)
    }

    /// Node nearest to `x`, if `x` lies in the box.
    pub fn nearest_node(&self, x: &Vector) -> Option<usize> {
        if !self.contains_point(x) {
            return None;
        }
        let k = |a: usize| {
            (((x[a] - self.lo[a]) / self.h).round().max(0.0) as usize).min(self.n[a] - 1)
        };
        Some(if self.dim == 1 {
            k(0)
        } else {
            self.index(k(0), k(1))
        })
    }

    /// The node located at `x`, if `x` coincides with a node up to `1e-9 h`.
    pub fn node_at(&self, x: &Vector) -> Option<usize> {
        let idx = self.nearest_node(x)?;
        ((self.coord(idx) - *x).norm() <= 1e-9 * self.h).then_some(idx)
    }

    /// Integer node offsets `(i1 - i0, j1 - j0)`.
    #[inline]
    pub fn offset(&self, from: usize, to: usize) -> (isize, isize) {
        let (i0, j0) = self.multi_index(from);
        let (i1, j1) = self.multi_index(to);
        (i1 as isize - i0 as isize, j1 as isize - j0 as isize)
    }

    pub fn same_grid(&self, other: &GridDomain) -> bool {
        self == other
    }

    /// Row-major node indices of the grid rows (all nodes for 1D).
    pub fn rows(&self) -> usize {
        if self.dim == 1 {
            1
        } else {
            self.n[0]
        }
    }

    pub fn row_len(&self) -> usize {
        if self.dim == 1 {
            self.n[0]
        } else {
            self.n[1]
        }
    }
}

/// A finite real function sampled at every node.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    domain: GridDomain,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(domain: GridDomain, values: Vec<f64>) -> Result<Self> {
        if values.len() != domain.len() {
            return Err(Error::GridMismatch);
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("scalar field"));
        }
        Ok(ScalarField { domain, values })
    }

    pub fn zeros(domain: GridDomain) -> Self {
        ScalarField {
            domain,
            values: vec![0.0; domain.len()],
        }
    }

    pub fn constant(domain: GridDomain, c: f64) -> Self {
        ScalarField {
            domain,
            values: vec![c; domain.len()],
        }
    }

    pub fn from_fn(domain: GridDomain, f: impl Fn(&Vector) -> f64) -> Result<Self> {
        let values = (0..domain.len()).map(|i| f(&domain.coord(i))).collect();
        ScalarField::new(domain, values)
    }

    pub fn domain(&self) -> &GridDomain {
        &self.domain
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn get(&self, idx: usize) -> f64 {
        self.values[idx]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        ScalarField::new(self.domain, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn scale(&self, s: f64) -> Result<Self> {
        self.map(|v| s * v)
    }

    pub fn neg(&self) -> Self {
        ScalarField {
            domain: self.domain,
            values: self.values.iter().map(|v| -v).collect(),
        }
    }

    pub fn zip_with(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if !self.domain.same_grid(&other.domain) {
            return Err(Error::GridMismatch);
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| f(a, b))
            .collect();
        ScalarField::new(self.domain, values)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_on(&self, region: &RegionMask) -> f64 {
        region
            .indices()
            .map(|i| self.values[i].abs())
            .fold(0.0, f64::max)
    }

    /// `max - min` over the region.
    pub fn oscillation_on(&self, region: &RegionMask) -> f64 {
        let (lo, hi) = region
            .indices()
            .map(|i| self.values[i])
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
                (a.min(v), b.max(v))
            });
        if lo.is_finite() {
            hi - lo
        } else {
            0.0
        }
    }
}

/// A vector-valued field (gradients, stresses). Rows on the grid boundary
/// come from one-sided stencils and are excluded from norms.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    domain: GridDomain,
    values: Vec<Vector>,
}

impl VectorField {
    pub fn new(domain: GridDomain, values: Vec<Vector>) -> Result<Self> {
        if values.len() != domain.len() {
            return Err(Error::GridMismatch);
        }
        if values
            .iter()
            .any(|v| v.dim() != domain.dim() || !v.is_finite())
        {
            return Err(Error::NonFinite("vector field"));
        }
        Ok(VectorField { domain, values })
    }

    pub fn from_fn(domain: GridDomain, f: impl Fn(&Vector) -> Vector) -> Result<Self> {
        let values = (0..domain.len()).map(|i| f(&domain.coord(i))).collect();
        VectorField::new(domain, values)
    }

    pub fn domain(&self) -> &GridDomain {
        &self.domain
    }

    pub fn values(&self) -> &[Vector] {
        &self.values
    }

    #[inline]
    pub fn get(&self, idx: usize) -> Vector {
        self.values[idx]
    }

    pub fn map(&self, f: impl Fn(&Vector) -> Vector) -> Result<Self> {
        VectorField::new(self.domain, self.values.iter().map(f).collect())
    }

    /// Pointwise Euclidean norm.
    pub fn norm_field(&self) -> ScalarField {
        ScalarField {
            domain: self.domain,
            values: self.values.iter().map(|v| v.norm()).collect(),
        }
    }
}

/// A symmetric-matrix-valued field (Hessians).
#[derive(Clone, Debug, PartialEq)]
pub struct SymMatrixField {
    domain: GridDomain,
    values: Vec<SymMatrix>,
}

impl SymMatrixField {
    pub fn new(domain: GridDomain, values: Vec<SymMatrix>) -> Result<Self> {
        if values.len() != domain.len() {
            return Err(Error::GridMismatch);
        }
        if values
            .iter()
            .any(|m| m.dim() != domain.dim() || !m.is_finite())
        {
            return Err(Error::NonFinite("matrix field"));
        }
        Ok(SymMatrixField { domain, values })
    }

    pub fn domain(&self) -> &GridDomain {
        &self.domain
    }

    pub fn values(&self) -> &[SymMatrix] {
        &self.values
    }

    #[inline]
    pub fn get(&self, idx: usize) -> SymMatrix {
        self.values[idx]
    }
}

/// How a [`RegionMask`] was built.
#[derive(Clone, Debug, PartialEq)]
pub enum MaskDescriptor {
    Full,
    Interior,
    Ball { center: Vector, radius: f64 },
    Explicit,
}

/// A set of grid nodes. Equality compares the node sets only, not how they
/// were described.
#[derive(Clone, Debug)]
pub struct RegionMask {
    domain: GridDomain,
    mask: Vec<bool>,
    descriptor: MaskDescriptor,
}

impl PartialEq for RegionMask {
    fn eq(&self, other: &Self) -> bool {
        self.domain == other.domain && self.mask == other.mask
    }
}

/// Relative slack on ball radii so that lattice points exactly on the
/// sphere are not lost to rounding in the coordinates.
pub(crate) const BALL_SLACK: f64 = 1e-10;

impl RegionMask {
    pub fn from_mask(domain: GridDomain, mask: Vec<bool>) -> Result<Self> {
        if mask.len() != domain.len() {
            return Err(Error::GridMismatch);
        }
        Ok(RegionMask {
            domain,
            mask,
            descriptor: MaskDescriptor::Explicit,
        })
    }

    pub fn from_fn(domain: GridDomain, f: impl Fn(usize, &Vector) -> bool) -> Self {
        let mask = (0..domain.len()).map(|i| f(i, &domain.coord(i))).collect();
        RegionMask {
            domain,
            mask,
            descriptor: MaskDescriptor::Explicit,
        }
    }

    pub fn full(domain: GridDomain) -> Self {
        RegionMask {
            domain,
            mask: vec![true; domain.len()],
            descriptor: MaskDescriptor::Full,
        }
    }

    pub fn empty(domain: GridDomain) -> Self {
        RegionMask {
            domain,
            mask: vec![false; domain.len()],
            descriptor: MaskDescriptor::Explicit,
        }
    }

    /// All nodes not on the grid boundary.
    pub fn interior(domain: GridDomain) -> Self {
        let mask = (0..domain.len()).map(|i| !domain.is_boundary(i)).collect();
        RegionMask {
            domain,
            mask,
            descriptor: MaskDescriptor::Interior,
        }
    }

    /// Closed ball `|x - center| <= radius`.
    pub fn ball(domain: GridDomain, center: Vector, radius: f64) -> Self {
        let r2 = radius * radius * (1.0 + BALL_SLACK);
        let mask = (0..domain.len())
            .map(|i| (domain.coord(i) - center).norm_sq() <= r2)
            .collect();
        RegionMask {
            domain,
            mask,
            descriptor: MaskDescriptor::Ball { center, radius },
        }
    }

    pub fn domain(&self) -> &GridDomain {
        &self.domain
    }

    pub fn descriptor(&self) -> &MaskDescriptor {
        &self.descriptor
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.mask
    }

    #[inline]
    pub fn contains(&self, idx: usize) -> bool {
        self.mask[idx]
    }

    pub fn count(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.mask.iter().any(|&b| b)
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.mask
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| i)
    }

    fn combine(&self, other: &RegionMask, f: impl Fn(bool, bool) -> bool) -> Result<RegionMask> {
        if !self.domain.same_grid(&other.domain) {
            return Err(Error::GridMismatch);
        }
        let mask = self
            .mask
            .iter()
            .zip(&other.mask)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Ok(RegionMask {
            domain: self.domain,
            mask,
            descriptor: MaskDescriptor::Explicit,
        })
    }

    pub fn and(&self, other: &RegionMask) -> Result<RegionMask> {
        self.combine(other, |a, b| a && b)
    }

    pub fn or(&self, other: &RegionMask) -> Result<RegionMask> {
        self.combine(other, |a, b| a || b)
    }

    /// `self \ other`.
    pub fn minus(&self, other: &RegionMask) -> Result<RegionMask> {
        self.combine(other, |a, b| a && !b)
    }

    pub fn is_subset_of(&self, other: &RegionMask) -> bool {
        self.domain.same_grid(&other.domain)
            && self.mask.iter().zip(&other.mask).all(|(&a, &b)| !a || b)
    }

    /// Nodes in `self` but not in `other`.
    pub fn excess_over(&self, other: &RegionMask) -> Vec<usize> {
        self.mask
            .iter()
            .zip(&other.mask)
            .enumerate()
            .filter(|(_, (&a, &b))| a && !b)
            .map(|(i, _)| i)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_grids() {
        assert!(GridDomain::interval(0.0, 1.0, 4).is_err());
        assert!(GridDomain::interval(1.0, 0.0, 11).is_err());
        assert!(GridDomain::new(&[0.0, 0.0], &[1.0, 2.0], &[11, 11]).is_err());
        assert!(GridDomain::new(&[0.0, 0.0], &[1.0, 2.0], &[11, 21]).is_ok());
    }

    #[test]
    fn indexing_round_trips() {
        let d = GridDomain::new(&[0.0, -1.0], &[1.0, 1.0], &[6, 11]).unwrap();
        for idx in 0..d.len() {
            let (i, j) = d.multi_index(idx);
            assert_eq!(d.index(i, j), idx);
            assert_eq!(d.nearest_node(&d.coord(idx)), Some(idx));
        }
        assert!(d.is_boundary(0));
        assert!(!d.is_boundary(d.index(2, 3)));
    }

    #[test]
    fn fields_reject_non_finite() {
        let d = GridDomain::interval(0.0, 1.0, 5).unwrap();
        assert!(ScalarField::new(d, vec![0.0, 1.0, f64::NAN, 0.0, 0.0]).is_err());
        assert!(ScalarField::new(d, vec![0.0; 4]).is_err());
    }

    #[test]
    fn ball_mask_keeps_lattice_points_on_sphere() {
        let d = GridDomain::square(-1.0, 1.0, 65).unwrap();
        let b = RegionMask::ball(d, Vector::new2(0.0, 0.0), 0.5);
        let east = d.nearest_node(&Vector::new2(0.5, 0.0)).unwrap();
        assert!(b.contains(east));
    }

    #[test]
    fn mask_algebra() {
        let d = GridDomain::interval(0.0, 1.0, 11).unwrap();
        let a = RegionMask::from_fn(d, |i, _| i < 6);
        let b = RegionMask::from_fn(d, |i, _| i >= 3);
        assert_eq!(a.and(&b).unwrap().count(), 3);
        assert_eq!(a.or(&b).unwrap().count(), 11);
        assert_eq!(a.minus(&b).unwrap().count(), 3);
        assert!(a.and(&b).unwrap().is_subset_of(&a));
    }
}
