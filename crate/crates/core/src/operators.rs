//! Pointwise nonlinear operators: Pucci extremal operators, the degenerate
//! operator `|p|^gamma P(M)`, the stress map `V(p) = |p|^gamma p` with its
//! Jacobian, the nondivergence p-Laplacian, the radial barrier and the exact
//! radial solutions used as fixtures.

use crate::error::{Error, Result};
use crate::field::{GridDomain, ScalarField};
use crate::linalg::{Matrix, SymMatrix, Vector};
use serde::{Deserialize, Serialize};

/// Degeneracy exponent and ellipticity constants. `alpha = 1 / (1 + gamma)`
/// is derived, never stored independently.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegeneracyParams {
    gamma: f64,
    alpha: f64,
    lambda: f64,
    #[serde(rename = "Lambda")]
    big_lambda: f64,
}

impl DegeneracyParams {
    pub fn new(gamma: f64, lambda: f64, big_lambda: f64) -> Result<Self> {
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "gamma must be finite and >= 0, got {gamma}"
            )));
        }
        if !(lambda > 0.0 && lambda <= big_lambda && big_lambda.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "need 0 < lambda <= Lambda, got {lambda}, {big_lambda}"
            )));
        }
        Ok(DegeneracyParams {
            gamma,
            alpha: 1.0 / (1.0 + gamma),
            lambda,
            big_lambda,
        })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn big_lambda(&self) -> f64 {
        self.big_lambda
    }
}

/// Which extremal operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PucciSign {
    Plus,
    Minus,
}

/// `P+ = lambda * sum(e < 0) + Lambda * sum(e > 0)`,
/// `P- = Lambda * sum(e < 0) + lambda * sum(e > 0)`.
pub fn pucci(m: &SymMatrix, params: &DegeneracyParams, sign: PucciSign) -> Result<f64> {
    if !m.is_finite() {
        return Err(Error::NonFinite("matrix"));
    }
    Ok(pucci_unchecked(m, params.lambda, params.big_lambda, sign))
}

#[inline]
pub(crate) fn pucci_unchecked(m: &SymMatrix, lambda: f64, big_lambda: f64, sign: PucciSign) -> f64 {
    let (w_neg, w_pos) = match sign {
        PucciSign::Plus => (lambda, big_lambda),
        PucciSign::Minus => (big_lambda, lambda),
    };
    let (mut neg, mut pos) = (0.0, 0.0);
    for &e in m.eigenvalues().as_slice() {
        if e < 0.0 {
            neg += e;
        } else {
            pos += e;
        }
    }
    w_neg * neg + w_pos * pos
}

/// `|p|^gamma * P(M)`; zero at `p = 0` when `gamma > 0`.
pub fn degenerate_op(
    p: &Vector,
    m: &SymMatrix,
    params: &DegeneracyParams,
    sign: PucciSign,
) -> Result<f64> {
    if !p.is_finite() {
        return Err(Error::NonFinite("gradient"));
    }
    let pm = pucci(m, params, sign)?;
    if params.gamma == 0.0 {
        return Ok(pm);
    }
    let r = p.norm();
    Ok(if r == 0.0 {
        0.0
    } else {
        r.powf(params.gamma) * pm
    })
}

/// The stress map `V(p) = |p|^gamma p`.
pub fn stress(p: &Vector, gamma: f64) -> Vector {
    if gamma == 0.0 {
        return *p;
    }
    let r = p.norm();
    if r == 0.0 {
        Vector::zeros(p.dim())
    } else {
        p.scale(r.powf(gamma))
    }
}

/// Derivative of `V(Du)` given `p = Du` and `M = D^2 u`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StressJacobian {
    /// `|p|^gamma (I + gamma p^ (x) p^) M`.
    pub full: Matrix,
    /// `(I + B) A (I + B) - B A B` with `A = |p|^gamma M`,
    /// `B = (gamma / 2) p^ (x) p^`.
    pub symmetrized: SymMatrix,
}

pub fn stress_jacobian(p: &Vector, m: &SymMatrix, gamma: f64) -> Result<StressJacobian> {
    let n = p.dim();
    let r = p.norm();
    if gamma == 0.0 {
        return Ok(StressJacobian {
            full: m.to_matrix(),
            symmetrized: *m,
        });
    }
    if r == 0.0 {
        return Err(Error::DegenerateGradient);
    }
    let rg = r.powf(gamma);
    let unit = p.scale(1.0 / r);
    let proj = Matrix::from(unit.outer());
    let full = (Matrix::identity(n) + proj.scale(gamma)) * m.to_matrix().scale(rg);

    let a = m.to_matrix().scale(rg);
    let b = proj.scale(0.5 * gamma);
    let ib = Matrix::identity(n) + b;
    let s = ib * a * ib - b * a * b;
    Ok(StressJacobian {
        full,
        symmetrized: s.sym_part(),
    })
}

/// Nondivergence p-Laplacian with `p = gamma + 2`:
/// `|p|^gamma (tr M + gamma <M p^, p^>)`.
pub fn p_laplacian(p: &Vector, m: &SymMatrix, gamma: f64) -> f64 {
    if gamma == 0.0 {
        return m.trace();
    }
    let r = p.norm();
    if r == 0.0 {
        return 0.0;
    }
    let unit = p.scale(1.0 / r);
    r.powf(gamma) * (m.trace() + gamma * m.quad(&unit))
}

/// `u(x) = c |x - center|^(1 + alpha)`, whose degenerate Pucci images are
/// constant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RadialSolution {
    pub c: f64,
    pub params: DegeneracyParams,
    pub center: Vector,
}

impl RadialSolution {
    pub fn new(c: f64, params: DegeneracyParams, center: Vector) -> Result<Self> {
        if c == 0.0 || !c.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "radial coefficient must be nonzero, got {c}"
            )));
        }
        Ok(RadialSolution { c, params, center })
    }

    pub fn beta(&self) -> f64 {
        1.0 + self.params.alpha
    }

    pub fn value(&self, x: &Vector) -> f64 {
        self.c * (*x - self.center).norm().powf(self.beta())
    }

    /// `(f_plus, f_minus)` in dimension `n`.
    ///
    /// `|Du|^gamma D^2 u` has eigenvalues `s (|c| beta)^(1+gamma)` times
    /// `1` (multiplicity `n - 1`) and `alpha` (radial), `s = sign(c)`.
    pub fn rhs(&self, n: usize) -> (f64, f64) {
        let p = &self.params;
        let a = (self.c.abs() * self.beta()).powf(1.0 + p.gamma) * (n as f64 - 1.0 + p.alpha);
        if self.c > 0.0 {
            (p.big_lambda * a, p.lambda * a)
        } else {
            (-p.lambda * a, -p.big_lambda * a)
        }
    }
}

/// Samples the radial solution on `domain` and returns it with its constant
/// right-hand sides `(u, f_plus, f_minus)`.
pub fn radial_solution(
    spec: &RadialSolution,
    domain: &GridDomain,
) -> Result<(ScalarField, f64, f64)> {
    if spec.c == 0.0 {
        return Err(Error::InvalidParameter(
            "radial coefficient must be nonzero".into(),
        ));
    }
    let u = ScalarField::from_fn(*domain, |x| spec.value(x))?;
    let (fp, fm) = spec.rhs(domain.dim());
    Ok((u, fp, fm))
}

/// The radial barrier `phi(x) = (|x|^-p - (3/4)^-p) / p` evaluated off
/// the ball of radius 1/4.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Barrier {
    pub value: f64,
    pub grad: Vector,
    /// `P-(D^2 phi) = ((p + 1) lambda - (n - 1) Lambda) / |x|^(p + 2)`.
    pub pucci_minus_hessian: f64,
}

pub fn barrier(x: &Vector, p_exp: u32, params: &DegeneracyParams) -> Result<Barrier> {
    if p_exp < 1 {
        return Err(Error::InvalidParameter(
            "barrier exponent must be >= 1".into(),
        ));
    }
    let r = x.norm();
    if !(r >= 0.25) {
        return Err(Error::BarrierRegion(r));
    }
    let p = p_exp as f64;
    let n = x.dim() as f64;
    let value = (r.powf(-p) - 0.75f64.powf(-p)) / p;
    let grad = x.scale(-r.powf(-p - 2.0));
    let pucci_minus_hessian =
        ((p + 1.0) * params.lambda - (n - 1.0) * params.big_lambda) / r.powf(p + 2.0);
    Ok(Barrier {
        value,
        grad,
        pucci_minus_hessian,
    })
}

/// Exact Hessian of the barrier, `|x|^-(p+2) ((p + 2) x^ (x) x^ - I)`.
pub fn barrier_hessian(x: &Vector, p_exp: u32) -> SymMatrix {
    let r = x.norm();
    let p = p_exp as f64;
    let unit = x.scale(1.0 / r);
    (unit.outer().scale(p + 2.0) - SymMatrix::identity(x.dim())).scale(r.powf(-p - 2.0))
}
