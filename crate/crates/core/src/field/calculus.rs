use super::{GridDomain, ScalarField, SymMatrixField, VectorField};
use crate::error::{Error, Result};
use crate::exec::{map_indices, Exec};
use crate::linalg::{SymMatrix, Vector};

fn check_size(d: &GridDomain) -> Result<()> {
    match d.n_pts().iter().min() {
        Some(&m) if m < 3 => Err(Error::DomainTooSmall { needed: 3, have: m }),
        _ => Ok(()),
    }
}

#[inline]
fn at(u: &[f64], d: &GridDomain, i: usize, j: usize) -> f64 {
    u[d.index(i, j)]
}

/// Gradient at a single node: central differences inside, first-order
/// one-sided differences on the boundary.
pub fn gradient_at(u: &ScalarField, idx: usize) -> Vector {
    let d = u.domain();
    let v = u.values();
    let h = d.h();
    let (i, j) = d.multi_index(idx);
    let n = d.n_pts();
    let diff = |k: usize, len: usize, f: &dyn Fn(usize) -> f64| -> f64 {
        if k == 0 {
            (f(1) - f(0)) / h
        } else if k + 1 == len {
            (f(k) - f(k - 1)) / h
        } else {
            (f(k + 1) - f(k - 1)) / (2.0 * h)
        }
    };
    if d.dim() == 1 {
        Vector::new1(diff(i, n[0], &|k| at(v, d, k, 0)))
    } else {
        Vector::new2(
            diff(i, n[0], &|k| at(v, d, k, j)),
            diff(j, n[1], &|k| at(v, d, i, k)),
        )
    }
}

/// Hessian at a single node. Three-point second differences on the diagonal
/// and the four-point cross stencil off it; boundary nodes reuse the stencil
/// of the nearest interior row (first order there).
pub fn hessian_at(u: &ScalarField, idx: usize) -> SymMatrix {
    let d = u.domain();
    let v = u.values();
    let h2 = d.h() * d.h();
    let (i, j) = d.multi_index(idx);
    let n = d.n_pts();
    let ci = i.clamp(1, n[0] - 2);
    if d.dim() == 1 {
        let uxx = (at(v, d, ci + 1, 0) - 2.0 * at(v, d, ci, 0) + at(v, d, ci - 1, 0)) / h2;
        return SymMatrix::diag(&[uxx]);
    }
    let cj = j.clamp(1, n[1] - 2);
    let uxx = (at(v, d, ci + 1, j) - 2.0 * at(v, d, ci, j) + at(v, d, ci - 1, j)) / h2;
    let uyy = (at(v, d, i, cj + 1) - 2.0 * at(v, d, i, cj) + at(v, d, i, cj - 1)) / h2;
    let uxy = (at(v, d, ci + 1, cj + 1) - at(v, d, ci + 1, cj - 1) - at(v, d, ci - 1, cj + 1)
        + at(v, d, ci - 1, cj - 1))
        / (4.0 * h2);
    SymMatrix::new2(uxx, uxy, uyy)
}

/// Second-order central gradient of `u`.
pub fn gradient_central(u: &ScalarField) -> Result<VectorField> {
    check_size(u.domain())?;
    let values = map_indices(Exec::default(), u.domain().len(), |i| gradient_at(u, i));
    VectorField::new(*u.domain(), values)
}

/// Central-difference Hessian of `u`; exact on quadratics at interior nodes.
pub fn hessian_central(u: &ScalarField) -> Result<SymMatrixField> {
    check_size(u.domain())?;
    let values = map_indices(Exec::default(), u.domain().len(), |i| hessian_at(u, i));
    SymMatrixField::new(*u.domain(), values)
}
