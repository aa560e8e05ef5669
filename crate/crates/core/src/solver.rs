//! Discrete solutions of `(|Du|^2 + eps^2)^(gamma/2) Op(D^2 u) = f` on 2D
//! boxes with Dirichlet data, where `Op` is `P+`, `P-` or the
//! nondivergence p-Laplacian operator `tr M + gamma <M p, p> / (|p|^2 + eps^2)`.
//!
//! Second derivatives use the 9-point stencil and `p` the central gradient.
//! The `|Du|^2` inside the weight is the per-axis mean of squared one-sided
//! differences, which keeps the weight away from `eps` at discrete
//! extrema and makes the solution insensitive to `eps`.
//!
//! The basic iteration is pseudo-time relaxation with a local step: each
//! interior node moves by `cfl * R / D`, where `R = Op - f / a` is the
//! defect of the equation divided by the weight `a` and `D` bounds its
//! derivative with respect to the node value (a double-buffered nonlinear
//! Jacobi sweep). [`Method::Multigrid`] wraps the same sweep as the smoother
//! of a full-approximation-scheme V-cycle.

use crate::error::{Error, Result};
use crate::exec::{det_max, fill_indices, Exec};
use crate::field::{GridDomain, RegionMask, ScalarField};
use crate::linalg::Vector;
use crate::operators::DegeneracyParams;
use serde::{Deserialize, Serialize};
use std::time::Instant;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Operator {
    PucciPlus,
    PucciMinus,
    PLaplacian,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Relaxation sweeps only; `max_iters` counts sweeps.
    Relaxation,
    /// FAS V-cycles; `max_iters` counts cycles.
    #[default]
    Multigrid,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProblemSpec {
    pub params: DegeneracyParams,
    pub operator: Operator,
    pub rhs: ScalarField,
    /// Only the boundary nodes are read.
    pub boundary: ScalarField,
    pub reg_eps: f64,
    pub cfl: f64,
    pub tol_res: f64,
    pub max_iters: usize,
    pub method: Method,
}

impl ProblemSpec {
    /// Defaults: `reg_eps = h`, `cfl = 0.8`, `tol_res = 1e-8`,
    /// `max_iters = 1000`, multigrid.
    pub fn new(
        params: DegeneracyParams,
        operator: Operator,
        rhs: ScalarField,
        boundary: ScalarField,
    ) -> Result<Self> {
        if !rhs.domain().same_grid(boundary.domain()) {
            return Err(Error::GridMismatch);
        }
        if rhs.domain().dim() != 2 {
            return Err(Error::InvalidGrid("the solver works on 2D grids".into()));
        }
        let h = rhs.domain().h();
        Ok(ProblemSpec {
            params,
            operator,
            rhs,
            boundary,
            reg_eps: h,
            cfl: 0.8,
            tol_res: 1e-8,
            max_iters: 1000,
            method: Method::Multigrid,
        })
    }

    pub fn domain(&self) -> &GridDomain {
        self.rhs.domain()
    }

    fn validate(&self) -> Result<()> {
        if !(self.tol_res > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tol_res must be positive, got {}",
                self.tol_res
            )));
        }
        if !(self.reg_eps >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "reg_eps must be >= 0, got {}",
                self.reg_eps
            )));
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "cfl must lie in (0, 1], got {}",
                self.cfl
            )));
        }
        if self.domain().dim() != 2 {
            return Err(Error::InvalidGrid("the solver works on 2D grids".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolveReport {
    /// Sweeps (relaxation) or V-cycles (multigrid).
    pub iterations: usize,
    /// Fine-grid relaxation sweeps performed.
    pub sweeps: usize,
    /// L-infinity norm of the interior defect.
    pub residual: f64,
    pub converged: bool,
    pub wall_time_s: f64,
}

#[derive(Clone, Copy)]
struct Coef {
    gamma: f64,
    lambda: f64,
    big_lambda: f64,
    eps2: f64,
    op: Operator,
}

impl Coef {
    fn new(spec: &ProblemSpec) -> Coef {
        Coef {
            gamma: spec.params.gamma(),
            lambda: spec.params.lambda(),
            big_lambda: spec.params.big_lambda(),
            eps2: spec.reg_eps * spec.reg_eps,
            op: spec.operator,
        }
    }

    /// Stencil quantities at interior node `(i, j)` of a row-major grid with
    /// `n1` columns and spacing `h`. With `frozen` data the operator is the
    /// linear `tr(A D^2 u)` and the weight is fixed.
    #[inline]
    fn parts(
        &self,
        u: &[f64],
        n1: usize,
        h: f64,
        i: usize,
        j: usize,
        frozen: Option<Frozen>,
    ) -> Local {
        let k = i * n1 + j;
        let (e, w, nn, s) = (u[k + n1], u[k - n1], u[k + 1], u[k - 1]);
        let c = u[k];
        let h2 = h * h;
        let uxx = (e - 2.0 * c + w) / h2;
        let uyy = (nn - 2.0 * c + s) / h2;
        let uxy = (u[k + n1 + 1] - u[k + n1 - 1] - u[k - n1 + 1] + u[k - n1 - 1]) / (4.0 * h2);
        let fz = frozen.unwrap_or_else(|| {
            // Mean of squared one-sided differences per axis: second-order
            // consistent with |Du|^2 and positive at a strict discrete
            // extremum, where the central gradient vanishes.
            let sq = ((e - c).powi(2) + (c - w).powi(2) + (nn - c).powi(2) + (c - s).powi(2))
                / (2.0 * h2);
            let p = [(e - w) / (2.0 * h), (nn - s) / (2.0 * h)];
            Frozen {
                coef: self.coefficient(p, uxx, uxy, uyy),
                sq,
            }
        });
        let [a11, a12, a22] = fz.coef;
        let op = a11 * uxx + 2.0 * a12 * uxy + a22 * uyy;
        // Live Pucci steps use the branch-independent bound 2 dim Lambda / h^2:
        // a node crossing an eigenvalue sign change would otherwise step with
        // the lambda diagonal against a Lambda response and overshoot.
        let diag = match (frozen, self.op) {
            (None, Operator::PucciPlus | Operator::PucciMinus) => 4.0 * self.big_lambda / h2,
            _ => 2.0 * (a11 + a22) / h2,
        };
        let q = fz.sq + self.eps2;
        let a = if self.gamma == 0.0 {
            1.0
        } else {
            q.powf(0.5 * self.gamma)
        };
        let da = if self.gamma == 0.0 || frozen.is_some() {
            0.0
        } else {
            -0.5 * self.gamma * a / q * (uxx + uyy)
        };
        Local {
            a,
            op,
            diag,
            da,
            frozen: fz,
        }
    }

    /// `A` with `Op(M) = tr(A M)`: the Pucci weights on the eigenvectors of
    /// `M`, or `I + gamma p p^T / (|p|^2 + eps^2)` for the p-Laplacian.
    fn coefficient(&self, p: [f64; 2], uxx: f64, uxy: f64, uyy: f64) -> [f64; 3] {
        match self.op {
            Operator::PLaplacian => {
                let pq = p[0] * p[0] + p[1] * p[1] + self.eps2;
                if pq == 0.0 {
                    [1.0, 0.0, 1.0]
                } else {
                    let g = self.gamma / pq;
                    [
                        1.0 + g * p[0] * p[0],
                        g * p[0] * p[1],
                        1.0 + g * p[1] * p[1],
                    ]
                }
            }
            Operator::PucciPlus | Operator::PucciMinus => {
                let m = 0.5 * (uxx + uyy);
                let r = (0.25 * (uxx - uyy) * (uxx - uyy) + uxy * uxy).sqrt();
                let (wn, wp) = if self.op == Operator::PucciPlus {
                    (self.lambda, self.big_lambda)
                } else {
                    (self.big_lambda, self.lambda)
                };
                let wt = |x: f64| if x < 0.0 { wn } else { wp };
                let (w_lo, w_hi) = (wt(m - r), wt(m + r));
                if r == 0.0 {
                    return [w_hi, 0.0, w_hi];
                }
                // Unit eigenvector of the larger eigenvalue is (cos t, sin t).
                let t = 0.5 * (2.0 * uxy).atan2(uxx - uyy);
                let (sn, cs) = t.sin_cos();
                [
                    w_hi * cs * cs + w_lo * sn * sn,
                    (w_hi - w_lo) * cs * sn,
                    w_hi * sn * sn + w_lo * cs * cs,
                ]
            }
        }
    }
}

/// Linearization data handed to coarse levels: the coefficient matrix `A`
/// (as `[a11, a12, a22]`) and the squared gradient magnitude in the weight.
#[derive(Clone, Copy, Debug, Default)]
struct Frozen {
    coef: [f64; 3],
    sq: f64,
}

struct Local {
    a: f64,
    op: f64,
    /// `-dOp/du_ij`.
    diag: f64,
    /// `da/du_ij`.
    da: f64,
    frozen: Frozen,
}

/// One grid of the hierarchy.
struct Level {
    d: GridDomain,
    n1: usize,
}

/// Right-hand side of the divided equation `Op(D^2 u) = F`.
#[derive(Clone, Copy)]
enum Rhs<'a> {
    /// `F = f / a(Du)` with the live gradient.
    Fine(&'a [f64]),
    /// `Op(D^2 u) - sigma u = F` with a frozen gradient and a reaction
    /// coefficient `sigma >= 0` standing in for the weight's dependence on u.
    Coarse(&'a [f64], &'a [Frozen], &'a [f64]),
}

impl Level {
    fn interior(&self, k: usize) -> Option<(usize, usize)> {
        (!self.d.is_boundary(k)).then(|| self.d.multi_index(k))
    }

    fn parts(&self, c: &Coef, u: &[f64], k: usize, frozen: Option<Frozen>) -> Option<Local> {
        let (i, j) = self.interior(k)?;
        Some(c.parts(u, self.n1, self.d.h(), i, j, frozen))
    }

    /// `(R, -dR/du_k, sigma)` for the divided defect `R` at an interior
    /// node, where `sigma` is the positive part of the weight's
    /// contribution to `-dR/du_k`. The negative part is dropped, which only
    /// shortens the step.
    fn local(&self, c: &Coef, u: &[f64], k: usize, rhs: Rhs) -> Option<(f64, f64, f64)> {
        match rhs {
            Rhs::Fine(f) => {
                let l = self.parts(c, u, k, None)?;
                let sigma = (-f[k] * l.da / (l.a * l.a)).max(0.0);
                Some((l.op - f[k] / l.a, l.diag + sigma, sigma))
            }
            Rhs::Coarse(f, g, sig) => {
                let l = self.parts(c, u, k, Some(g[k]))?;
                Some((l.op - sig[k] * u[k] - f[k], l.diag + sig[k], sig[k]))
            }
        }
    }

    /// `Op(D^2 u) - sigma u` with a frozen gradient.
    fn apply(&self, c: &Coef, u: &[f64], frozen: &[Frozen], sigma: &[f64], exec: Exec) -> Vec<f64> {
        let mut out = vec![0.0; u.len()];
        fill_indices(exec, &mut out, |k| {
            self.parts(c, u, k, Some(frozen[k]))
                .map_or(0.0, |l| l.op - sigma[k] * u[k])
        });
        out
    }

    fn freeze(&self, c: &Coef, u: &[f64], exec: Exec) -> Vec<Frozen> {
        let mut out = vec![Frozen::default(); u.len()];
        fill_indices(exec, &mut out, |k| {
            self.parts(c, u, k, None)
                .map_or(Frozen::default(), |l| l.frozen)
        });
        out
    }

    /// `a Op - f` of the undivided equation.
    fn defect(&self, c: &Coef, u: &[f64], f: &[f64], k: usize) -> f64 {
        self.parts(c, u, k, None).map_or(0.0, |l| l.a * l.op - f[k])
    }

    fn defect_norm(&self, c: &Coef, u: &[f64], f: &[f64], exec: Exec) -> f64 {
        det_max(exec, u.len(), |k| {
            let r = self.defect(c, u, f, k);
            if r.is_nan() {
                f64::INFINITY
            } else {
                r.abs()
            }
        })
    }

    fn sweep(
        &self,
        c: &Coef,
        u: &mut Vec<f64>,
        rhs: Rhs,
        omega: f64,
        exec: Exec,
        scratch: &mut Vec<f64>,
    ) {
        scratch.resize(u.len(), 0.0);
        let src: &[f64] = u;
        fill_indices(exec, scratch, |k| match self.local(c, src, k, rhs) {
            Some((r, diag, _)) if r.is_finite() && diag > 0.0 => src[k] + omega * r / diag,
            _ => src[k],
        });
        std::mem::swap(u, scratch);
    }
}

fn hierarchy(d: &GridDomain) -> Vec<Level> {
    let mut out = vec![Level {
        d: *d,
        n1: d.n_pts()[1],
    }];
    loop {
        let last = &out.last().unwrap().d;
        let n = last.n_pts();
        if (n[0] - 1) % 2 != 0 || (n[1] - 1) % 2 != 0 {
            break;
        }
        let nc = [(n[0] - 1) / 2 + 1, (n[1] - 1) / 2 + 1];
        if nc[0] < 5 || nc[1] < 5 {
            break;
        }
        let cd = GridDomain::new(last.lo(), last.hi(), &nc).expect("coarsened grid is valid");
        out.push(Level { d: cd, n1: nc[1] });
    }
    out
}

fn inject<T: Copy + Default>(fine: &Level, coarse: &Level, u: &[T]) -> Vec<T> {
    let n = coarse.d.n_pts();
    let mut out = vec![T::default(); coarse.d.len()];
    for i in 0..n[0] {
        for j in 0..n[1] {
            out[i * n[1] + j] = u[(2 * i) * fine.n1 + 2 * j];
        }
    }
    out
}

fn restrict_full_weight(fine: &Level, coarse: &Level, r: &[f64]) -> Vec<f64> {
    let n = coarse.d.n_pts();
    let m = fine.n1;
    let mut out = vec![0.0; coarse.d.len()];
    for i in 1..n[0] - 1 {
        for j in 1..n[1] - 1 {
            let k = (2 * i) * m + 2 * j;
            let edge = r[k - 1] + r[k + 1] + r[k - m] + r[k + m];
            let corner = r[k - m - 1] + r[k - m + 1] + r[k + m - 1] + r[k + m + 1];
            out[i * n[1] + j] = (4.0 * r[k] + 2.0 * edge + corner) / 16.0;
        }
    }
    out
}

fn prolong_add(fine: &Level, coarse: &Level, e: &[f64], u: &mut [f64]) {
    let nf = fine.d.n_pts();
    let nc1 = coarse.n1;
    for i in 1..nf[0] - 1 {
        for j in 1..nf[1] - 1 {
            let (ci, cj) = (i / 2, j / 2);
            let at = |a: usize, b: usize| e[a * nc1 + b];
            let v = match (i % 2, j % 2) {
                (0, 0) => at(ci, cj),
                (1, 0) => 0.5 * (at(ci, cj) + at(ci + 1, cj)),
                (0, 1) => 0.5 * (at(ci, cj) + at(ci, cj + 1)),
                _ => 0.25 * (at(ci, cj) + at(ci + 1, cj) + at(ci, cj + 1) + at(ci + 1, cj + 1)),
            };
            u[i * fine.n1 + j] += v;
        }
    }
}

const PRE: usize = 2;
const POST: usize = 2;
const COARSE_SWEEPS: usize = 200;
/// A V-cycle that multiplies the defect by more than this is undone and
/// replaced by plain relaxation sweeps.
const BLOWUP: f64 = 10.0;
const FALLBACK_SWEEPS: usize = 50;

/// FAS V-cycle on the divided equation `Op(D^2 u) = f / a(Du)`. Coarse
/// levels see the gradient of the fine iterate frozen (by injection), so
/// their problems are uniformly elliptic; the gradient dependence of the
/// weight is left to the fine-level smoother.
struct Multigrid<'a> {
    levels: &'a [Level],
    coef: Coef,
    omega: f64,
    exec: Exec,
    fine_sweeps: usize,
}

impl Multigrid<'_> {
    fn cycle(&mut self, l: usize, u: &mut Vec<f64>, rhs: Rhs) {
        let lv = &self.levels[l];
        let coef = self.coef;
        let mut scratch = Vec::new();
        let sweeps = if l + 1 == self.levels.len() {
            COARSE_SWEEPS
        } else {
            PRE
        };
        for _ in 0..sweeps {
            lv.sweep(&coef, u, rhs, self.omega, self.exec, &mut scratch);
        }
        if l == 0 {
            self.fine_sweeps += sweeps;
        }
        if l + 1 == self.levels.len() {
            return;
        }
        let (r, sigma): (Vec<f64>, Vec<f64>) = (0..u.len())
            .map(|k| match lv.local(&coef, u, k, rhs) {
                Some((r, _, s)) if r.is_finite() && s.is_finite() => (-r, s),
                _ => (0.0, 0.0),
            })
            .unzip();
        let cl = &self.levels[l + 1];
        let grad_c = match rhs {
            Rhs::Coarse(_, g, _) => inject(lv, cl, g),
            Rhs::Fine(_) => inject(lv, cl, &lv.freeze(&coef, u, self.exec)),
        };
        let sigma_c = restrict_full_weight(lv, cl, &sigma);
        let uc = inject(lv, cl, u);
        let rc = restrict_full_weight(lv, cl, &r);
        let auc = cl.apply(&coef, &uc, &grad_c, &sigma_c, self.exec);
        let fc: Vec<f64> = (0..uc.len()).map(|k| auc[k] + rc[k]).collect();
        let mut vc = uc.clone();
        self.cycle(l + 1, &mut vc, Rhs::Coarse(&fc, &grad_c, &sigma_c));
        let e: Vec<f64> = vc.iter().zip(&uc).map(|(a, b)| a - b).collect();
        prolong_add(lv, cl, &e, u);
        for _ in 0..POST {
            lv.sweep(&coef, u, rhs, self.omega, self.exec, &mut scratch);
        }
        if l == 0 {
            self.fine_sweeps += POST;
        }
    }
}

/// Coons-patch (transfinite bilinear) interpolation of the boundary values;
/// exact on affine data.
pub fn initial_guess(spec: &ProblemSpec) -> ScalarField {
    let d = *spec.domain();
    let g = spec.boundary.values();
    let n = d.n_pts();
    let (m0, m1) = (n[0] - 1, n[1] - 1);
    let at = |i: usize, j: usize| g[d.index(i, j)];
    let mut v = g.to_vec();
    for i in 1..m0 {
        for j in 1..m1 {
            let s = i as f64 / m0 as f64;
            let t = j as f64 / m1 as f64;
            let edges = (1.0 - s) * at(0, j) + s * at(m0, j) + (1.0 - t) * at(i, 0) + t * at(i, m1);
            let corners = (1.0 - s) * (1.0 - t) * at(0, 0)
                + s * (1.0 - t) * at(m0, 0)
                + (1.0 - s) * t * at(0, m1)
                + s * t * at(m0, m1);
            v[d.index(i, j)] = edges - corners;
        }
    }
    ScalarField::new(d, v).expect("interpolated boundary data is finite")
}

/// Pointwise defect `a(Du) Op(D^2 u) - f` of the regularized equation on
/// interior nodes; zero on the boundary.
pub fn residual(u: &ScalarField, spec: &ProblemSpec) -> Result<ScalarField> {
    if !u.domain().same_grid(spec.domain()) {
        return Err(Error::GridMismatch);
    }
    spec.validate()?;
    let lv = Level {
        d: *u.domain(),
        n1: u.domain().n_pts()[1],
    };
    let coef = Coef::new(spec);
    let v = (0..u.domain().len())
        .map(|k| lv.defect(&coef, u.values(), spec.rhs.values(), k))
        .collect();
    ScalarField::new(*u.domain(), v)
}

/// Iterates from `u0` (whose boundary values are replaced by the spec's
/// boundary data) until the interior defect drops below `tol_res` or the
/// iteration budget runs out. Non-convergence is reported, not raised.
pub fn relax_solve(spec: &ProblemSpec, u0: &ScalarField) -> Result<(ScalarField, SolveReport)> {
    relax_solve_with(spec, u0, Exec::default())
}

pub fn relax_solve_with(
    spec: &ProblemSpec,
    u0: &ScalarField,
    exec: Exec,
) -> Result<(ScalarField, SolveReport)> {
    spec.validate()?;
    let d = *spec.domain();
    if !u0.domain().same_grid(&d) {
        return Err(Error::GridMismatch);
    }
    let n = d.n_pts();
    if n[0] < 3 || n[1] < 3 {
        return Err(Error::DomainTooSmall {
            needed: 3,
            have: n[0].min(n[1]),
        });
    }
    let start = Instant::now();
    let coef = Coef::new(spec);
    let g = spec.boundary.values();
    let mut u: Vec<f64> = (0..d.len())
        .map(|k| if d.is_boundary(k) { g[k] } else { u0.get(k) })
        .collect();
    let f = spec.rhs.values();
    let levels = hierarchy(&d);
    let fine = &levels[0];
    let mut res = fine.defect_norm(&coef, &u, f, exec);
    let mut iterations = 0;
    let mut sweeps = 0;
    let mut scratch = Vec::new();
    while res > spec.tol_res && res.is_finite() && iterations < spec.max_iters {
        match spec.method {
            Method::Relaxation => {
                fine.sweep(&coef, &mut u, Rhs::Fine(f), spec.cfl, exec, &mut scratch);
                sweeps += 1;
            }
            Method::Multigrid => {
                let before = u.clone();
                let mut mg = Multigrid {
                    levels: &levels,
                    coef,
                    omega: spec.cfl,
                    exec,
                    fine_sweeps: 0,
                };
                mg.cycle(0, &mut u, Rhs::Fine(f));
                sweeps += mg.fine_sweeps;
                let after = fine.defect_norm(&coef, &u, f, exec);
                if !(after < BLOWUP * res) {
                    u = before;
                    for _ in 0..FALLBACK_SWEEPS {
                        fine.sweep(&coef, &mut u, Rhs::Fine(f), spec.cfl, exec, &mut scratch);
                    }
                    sweeps += FALLBACK_SWEEPS;
                }
            }
        }
        iterations += 1;
        res = fine.defect_norm(&coef, &u, f, exec);
    }
    let converged = res <= spec.tol_res;
    let report = SolveReport {
        iterations,
        sweeps,
        residual: res,
        converged,
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    if u.iter().any(|v| !v.is_finite()) {
        // Keep the field valid; the report already says the run failed.
        let field = initial_guess(spec);
        return Ok((
            field,
            SolveReport {
                converged: false,
                residual: f64::INFINITY,
                ..report
            },
        ));
    }
    Ok((ScalarField::new(d, u)?, report))
}

/// `|x - center|^-s` with the value at the singular node (if any) replaced
/// by the mean of its finite neighbors. Returns the clamped node indices.
pub fn singular_power_rhs(
    d: &GridDomain,
    s: f64,
    center: &Vector,
    scale: f64,
) -> Result<(ScalarField, Vec<usize>)> {
    let mut v: Vec<f64> = (0..d.len())
        .map(|k| scale * (d.coord(k) - *center).norm().powf(-s))
        .collect();
    let bad: Vec<usize> = (0..d.len()).filter(|&k| !v[k].is_finite()).collect();
    for &k in &bad {
        let (i, j) = d.multi_index(k);
        let n = d.n_pts();
        let mut sum = 0.0;
        let mut cnt = 0.0;
        let nb = [
            (i.wrapping_sub(1), j),
            (i + 1, j),
            (i, j.wrapping_sub(1)),
            (i, j + 1),
        ];
        for (a, b) in nb {
            if a < n[0] && b < n[1] {
                let x = v[d.index(a, b)];
                if x.is_finite() {
                    sum += x;
                    cnt += 1.0;
                }
            }
        }
        v[k] = if cnt > 0.0 { sum / cnt } else { 0.0 };
    }
    Ok((ScalarField::new(*d, v)?, bad))
}

/// One row of a refinement study.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RefineRow {
    pub h: f64,
    /// L-infinity error on the annulus, `None` when the level failed.
    pub error: Option<f64>,
    /// `log2(err_prev / err)` against the previous level.
    pub order: Option<f64>,
    /// Both this and the previous error sit at the floating-point floor.
    pub exact: bool,
    pub report: Option<SolveReport>,
    pub failure: Option<String>,
}

const EXACT_FLOOR: f64 = 1e-10;

/// Solves each level from its boundary interpolant and compares with the
/// exact solution on the nodes selected by `annulus`.
pub fn refine_study(
    levels: &[ProblemSpec],
    reference: &dyn Fn(&Vector) -> f64,
    annulus: &dyn Fn(&Vector) -> bool,
) -> Result<Vec<RefineRow>> {
    let mut rows: Vec<RefineRow> = Vec::with_capacity(levels.len());
    for spec in levels {
        let d = *spec.domain();
        let (u, report) = relax_solve(spec, &initial_guess(spec))?;
        let row = if report.converged {
            let mask = RegionMask::from_fn(d, |_, x| annulus(x));
            let err = mask
                .indices()
                .map(|k| (u.get(k) - reference(&d.coord(k))).abs())
                .fold(0.0, f64::max);
            let prev = rows.last().and_then(|r| r.error);
            let exact = err < EXACT_FLOOR && prev.is_some_and(|p| p < EXACT_FLOOR);
            let order = match prev {
                Some(p) if !exact && err > 0.0 => Some((p / err).log2()),
                _ => None,
            };
            RefineRow {
                h: d.h(),
                error: Some(err),
                order,
                exact,
                report: Some(report),
                failure: None,
            }
        } else {
            let msg = Error::NotConverged {
                iterations: report.iterations,
                residual: report.residual,
            }
            .to_string();
            RefineRow {
                h: d.h(),
                error: None,
                order: None,
                exact: false,
                report: Some(report),
                failure: Some(msg),
            }
        };
        rows.push(row);
    }
    Ok(rows)
}
