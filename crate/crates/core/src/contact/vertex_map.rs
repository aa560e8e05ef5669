use super::slide::ContactSet;
use crate::cones::Side;
use crate::error::{Error, Result};
use crate::field::{gradient_at, hessian_at, measure, RegionMask, ScalarField};
use crate::linalg::{Matrix, Vector};
use crate::operators::{stress, stress_jacobian};
use serde::Serialize;

/// Which formula produced a Jacobian determinant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum JacobianBranch {
    /// `I + K^-(1+gamma) D(V(Du))` from the stress Jacobian.
    Stress,
    /// Gradient below the floor: `D(V(Du))` taken as 0.
    Degenerate,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct VertexMapEntry {
    pub touch: usize,
    /// `x + K^-(1+gamma) V(Du(x))`.
    pub vertex: Vector,
    pub recorded_vertex: usize,
    pub det: f64,
    pub branch: JacobianBranch,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VertexMap {
    pub entries: Vec<VertexMapEntry>,
    pub grad_floor: f64,
    /// `|V_hit| / |T^-_K(V)|`, where `V_hit` is the set of vertices with a
    /// nonempty touch list.
    pub measure_ratio: f64,
}

impl VertexMap {
    pub fn min_det(&self) -> f64 {
        self.entries
            .iter()
            .map(|e| e.det)
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest distance between a computed vertex and the vertex node that
    /// recorded the touch.
    pub fn max_displacement(&self, u: &ScalarField) -> f64 {
        let d = u.domain();
        self.entries
            .iter()
            .map(|e| (e.vertex - d.coord(e.recorded_vertex)).norm())
            .fold(0.0, f64::max)
    }
}

/// Maps every touch point of a below-contact set to its vertex and records
/// `det(D_x y)`. The stress Jacobian is used where `|Du| > 10 h^alpha`
/// (always when `gamma = 0`); below that floor the degenerate branch gives
/// `D_x y = I`.
pub fn vertex_map(u: &ScalarField, contact: &ContactSet, gamma: f64) -> Result<VertexMap> {
    if contact.side != Side::Below {
        return Err(Error::Precondition(
            "vertex map needs a contact set from below".into(),
        ));
    }
    if !u.domain().same_grid(contact.touch.domain()) {
        return Err(Error::GridMismatch);
    }
    if contact.touch.is_empty() {
        return Err(Error::EmptyTouchSet);
    }
    let d = *u.domain();
    let alpha = 1.0 / (1.0 + gamma);
    let grad_floor = 10.0 * d.h().powf(alpha);
    let scale = contact.opening.powf(-(1.0 + gamma));
    let rec = contact.recording_vertex();
    let mut entries = Vec::with_capacity(contact.touch.count());
    for x in contact.touch.indices() {
        let p = gradient_at(u, x);
        let vertex = d.coord(x) + stress(&p, gamma).scale(scale);
        let (det, branch) = if gamma == 0.0 || p.norm() > grad_floor {
            let j = stress_jacobian(&p, &hessian_at(u, x), gamma)?.full;
            (
                (Matrix::identity(d.dim()) + j.scale(scale)).determinant(),
                JacobianBranch::Stress,
            )
        } else {
            (1.0, JacobianBranch::Degenerate)
        };
        entries.push(VertexMapEntry {
            touch: x,
            vertex,
            recorded_vertex: rec[x].unwrap(),
            det,
            branch,
        });
    }
    let hit = RegionMask::from_mask(d, {
        let mut m = vec![false; d.len()];
        for r in contact.records.iter().filter(|r| !r.touches.is_empty()) {
            m[r.vertex] = true;
        }
        m
    })?;
    let measure_ratio = measure(&hit) / measure(&contact.touch);
    Ok(VertexMap {
        entries,
        grad_floor,
        measure_ratio,
    })
}
