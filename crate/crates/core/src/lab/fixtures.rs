use super::config::{ExperimentConfig, Fixture};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::field::{GridDomain, ScalarField};
use crate::linalg::{SymMatrix, Vector};
use crate::operators::{degenerate_op, p_laplacian, DegeneracyParams, PucciSign, RadialSolution};
use crate::solver::{
    initial_guess, relax_solve_with, singular_power_rhs, Operator, ProblemSpec, SolveReport,
};

/// A fixture sampled or solved on one grid.
#[derive(Clone, Debug)]
pub struct FixtureData {
    pub u: ScalarField,
    pub f: ScalarField,
    /// `u` is the exact solution rather than a discrete one.
    pub exact: bool,
    pub report: Option<SolveReport>,
}

pub fn params(cfg: &ExperimentConfig) -> Result<DegeneracyParams> {
    DegeneracyParams::new(cfg.gamma, cfg.lambda, cfg.big_lambda)
}

pub fn domain(cfg: &ExperimentConfig, n: usize) -> Result<GridDomain> {
    GridDomain::square(cfg.lo, cfg.hi, n)
}

fn apply(op: Operator, p: &Vector, m: &SymMatrix, params: &DegeneracyParams) -> Result<f64> {
    match op {
        Operator::PucciPlus => degenerate_op(p, m, params, PucciSign::Plus),
        Operator::PucciMinus => degenerate_op(p, m, params, PucciSign::Minus),
        Operator::PLaplacian => Ok(p_laplacian(p, m, params.gamma())),
    }
}

/// Closed-form `(u, f)` for every fixture except [`Fixture::Singular`].
pub fn analytic(
    cfg: &ExperimentConfig,
    d: &GridDomain,
) -> Result<Option<(ScalarField, ScalarField)>> {
    let p = params(cfg)?;
    let op = cfg.operator;
    let out = match cfg.fixture {
        Fixture::Zero => (ScalarField::zeros(*d), ScalarField::zeros(*d)),
        Fixture::Affine => (
            ScalarField::from_fn(*d, |x| 0.5 * x[0] - 0.25 * x[1] + 0.1)?,
            ScalarField::zeros(*d),
        ),
        Fixture::Quadratic => {
            let q = cfg.quad_q;
            let m = SymMatrix::identity(2).scale(q);
            let u = ScalarField::from_fn(*d, |x| 0.5 * q * x.norm_sq())?;
            let f: Result<Vec<f64>> = (0..d.len())
                .map(|k| apply(op, &d.coord(k).scale(q), &m, &p))
                .collect();
            (u, ScalarField::new(*d, f?)?)
        }
        Fixture::Radial => {
            let rs = RadialSolution::new(cfg.radial_c, p, Vector::new2(0.0, 0.0))?;
            let (fp, fm) = rs.rhs(2);
            // |Du|^gamma (tr D^2u + gamma u_rr) = n (|c| beta)^(1+gamma) sign(c).
            let fl = cfg.radial_c.signum()
                * 2.0
                * (cfg.radial_c.abs() * rs.beta()).powf(1.0 + p.gamma());
            let f = match op {
                Operator::PucciPlus => fp,
                Operator::PucciMinus => fm,
                Operator::PLaplacian => fl,
            };
            (
                ScalarField::from_fn(*d, |x| rs.value(x))?,
                ScalarField::constant(*d, f),
            )
        }
        Fixture::Singular => return Ok(None),
    };
    Ok(Some(out))
}

/// Solver problem for the fixture: exact boundary data and right-hand side
/// for the closed-form fixtures, zero boundary data for the singular one.
pub fn problem(cfg: &ExperimentConfig, d: &GridDomain) -> Result<ProblemSpec> {
    let p = params(cfg)?;
    let (rhs, boundary) = match analytic(cfg, d)? {
        Some((u, f)) => (f, u),
        None => (
            singular_power_rhs(
                d,
                cfg.singular_s,
                &Vector::new2(0.0, 0.0),
                cfg.singular_scale,
            )?
            .0,
            ScalarField::zeros(*d),
        ),
    };
    let mut spec = ProblemSpec::new(p, cfg.operator, rhs, boundary)?;
    if let Some(e) = cfg.reg_eps {
        spec.reg_eps = e;
    }
    spec.cfl = cfg.cfl;
    spec.tol_res = cfg.tol_res;
    spec.max_iters = cfg.max_iters;
    spec.method = cfg.method;
    Ok(spec)
}

/// Discrete solution of [`problem`]; fails unless the solver converged.
pub fn solve(
    cfg: &ExperimentConfig,
    d: &GridDomain,
    exec: Exec,
) -> Result<(ScalarField, ScalarField, SolveReport)> {
    let spec = problem(cfg, d)?;
    let (u, report) = relax_solve_with(&spec, &initial_guess(&spec), exec)?;
    if !report.converged {
        return Err(Error::NotConverged {
            iterations: report.iterations,
            residual: report.residual,
        });
    }
    Ok((u, spec.rhs, report))
}

/// The fixture on an `n x n` grid: sampled when closed-form, solved
/// otherwise.
pub fn build(cfg: &ExperimentConfig, n: usize, exec: Exec) -> Result<FixtureData> {
    let d = domain(cfg, n)?;
    match analytic(cfg, &d)? {
        Some((u, f)) => Ok(FixtureData {
            u,
            f,
            exact: true,
            report: None,
        }),
        None => {
            let (u, f, report) = solve(cfg, &d, exec)?;
            Ok(FixtureData {
                u,
                f,
                exact: false,
                report: Some(report),
            })
        }
    }
}
