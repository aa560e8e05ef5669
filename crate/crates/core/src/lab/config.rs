use crate::cones::Side;
use crate::error::{Error, Result};
use crate::solver::{Method, Operator};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// What an invocation runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Solve,
    Contact,
    Decay,
    Seminorm,
    Verify,
    Density,
}

impl std::str::FromStr for Kind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Kind> {
        Ok(match s {
            "solve" => Kind::Solve,
            "contact" => Kind::Contact,
            "decay" => Kind::Decay,
            "seminorm" => Kind::Seminorm,
            "verify" => Kind::Verify,
            "density" => Kind::Density,
            _ => return Err(Error::Config(format!("unknown experiment kind `{s}`"))),
        })
    }
}

/// Field the experiment runs on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fixture {
    /// `u = 0`, `f = 0`.
    Zero,
    /// `u = x1/2 - x2/4 + 1/10`, `f = 0`.
    Affine,
    /// `u = q |x|^2 / 2` with its exact right-hand side.
    Quadratic,
    /// `u = c |x|^(1+alpha)` with its constant right-hand side.
    Radial,
    /// Discrete solution with `f = scale |x|^-s` and zero boundary data.
    Singular,
}

/// Flat experiment configuration. Every key is optional; unknown keys are
/// rejected.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: Option<Kind>,
    /// Nodes per axis of the square grid `[lo, hi]^2`.
    pub n: usize,
    pub lo: f64,
    pub hi: f64,
    pub gamma: f64,
    pub lambda: f64,
    #[serde(rename = "Lambda")]
    pub big_lambda: f64,
    pub operator: Operator,
    pub fixture: Fixture,
    pub radial_c: f64,
    pub quad_q: f64,
    pub singular_s: f64,
    pub singular_scale: f64,
    /// Solver regularization; the grid spacing when absent.
    pub reg_eps: Option<f64>,
    pub cfl: f64,
    pub tol_res: f64,
    pub max_iters: usize,
    pub method: Method,
    pub k_min: f64,
    #[serde(rename = "M")]
    pub base: f64,
    pub k_max: usize,
    /// Opening of the `contact` experiment.
    pub contact_k: f64,
    pub side: Side,
    /// Vertex ball radius of the `contact` experiment.
    pub vertex_radius: f64,
    pub eps1: f64,
    pub eps_pad: f64,
    /// Maximal-function level of the density check.
    pub density_eps: f64,
    pub density_threshold: f64,
    pub sigma_min: f64,
    pub residual_max: f64,
    pub drift_max: f64,
    pub censor_max: f64,
    /// Integrability exponent; derived from the decay fit when absent.
    pub delta: Option<f64>,
    /// Exponent used when the decay fit reports an infinite rate.
    pub delta_fallback: f64,
    pub seminorm_r_max: f64,
    pub out: PathBuf,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            kind: None,
            n: 65,
            lo: -1.0,
            hi: 1.0,
            gamma: 1.0,
            lambda: 1.0,
            big_lambda: 1.0,
            operator: Operator::PLaplacian,
            fixture: Fixture::Radial,
            radial_c: 1.0,
            quad_q: 1.0,
            singular_s: 0.5,
            singular_scale: 1.0,
            reg_eps: None,
            cfl: 0.8,
            tol_res: 1e-8,
            max_iters: 1000,
            method: Method::Multigrid,
            k_min: 0.25,
            base: 2.0,
            k_max: 6,
            contact_k: 1.0,
            side: Side::Below,
            vertex_radius: 0.5,
            eps1: 1.0,
            eps_pad: 0.0,
            density_eps: 1.0,
            density_threshold: 0.05,
            sigma_min: 0.1,
            residual_max: 0.3,
            drift_max: 0.2,
            censor_max: 0.05,
            delta: None,
            delta_fallback: 2.0,
            seminorm_r_max: 0.25,
            out: PathBuf::from("out"),
            seed: 0,
        }
    }
}

fn need(ok: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Config(msg()))
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn kind(&self) -> Result<Kind> {
        self.kind
            .ok_or_else(|| Error::Config("no experiment kind given".into()))
    }

    pub fn validate(&self) -> Result<()> {
        need(self.n >= 5, || {
            format!("n must be at least 5, got {}", self.n)
        })?;
        need(
            self.lo.is_finite() && self.hi.is_finite() && self.lo < self.hi,
            || format!("need lo < hi, got {} and {}", self.lo, self.hi),
        )?;
        crate::operators::DegeneracyParams::new(self.gamma, self.lambda, self.big_lambda)
            .map_err(|e| Error::Config(e.to_string()))?;
        need(self.radial_c != 0.0 && self.radial_c.is_finite(), || {
            "radial_c must be nonzero".into()
        })?;
        need(self.quad_q.is_finite(), || "quad_q must be finite".into())?;
        need(self.singular_s > 0.0 && self.singular_s < 2.0, || {
            format!("singular_s must lie in (0, 2), got {}", self.singular_s)
        })?;
        need(self.singular_scale.is_finite(), || {
            "singular_scale must be finite".into()
        })?;
        need(self.reg_eps.is_none_or(|e| e >= 0.0), || {
            "reg_eps must be >= 0".into()
        })?;
        need(self.cfl > 0.0 && self.cfl <= 1.0, || {
            format!("cfl must lie in (0, 1], got {}", self.cfl)
        })?;
        need(self.tol_res > 0.0, || "tol_res must be positive".into())?;
        need(self.max_iters >= 1, || {
            "max_iters must be at least 1".into()
        })?;
        need(self.k_min > 0.0 && self.k_min.is_finite(), || {
            "k_min must be positive".into()
        })?;
        need(self.base > 1.0 && self.base.is_finite(), || {
            format!("M must exceed 1, got {}", self.base)
        })?;
        need((1..=40).contains(&self.k_max), || {
            format!("k_max must lie in 1..=40, got {}", self.k_max)
        })?;
        need(self.contact_k > 0.0 && self.contact_k.is_finite(), || {
            "contact_k must be positive".into()
        })?;
        need(self.vertex_radius > 0.0, || {
            "vertex_radius must be positive".into()
        })?;
        need(self.eps1 > 0.0, || "eps1 must be positive".into())?;
        need(self.eps_pad >= 0.0, || "eps_pad must be >= 0".into())?;
        need(self.density_eps > 0.0, || {
            "density_eps must be positive".into()
        })?;
        for (name, v) in [
            ("density_threshold", self.density_threshold),
            ("censor_max", self.censor_max),
        ] {
            need((0.0..=1.0).contains(&v), || {
                format!("{name} must lie in [0, 1], got {v}")
            })?;
        }
        for (name, v) in [
            ("sigma_min", self.sigma_min),
            ("residual_max", self.residual_max),
            ("drift_max", self.drift_max),
        ] {
            need(v >= 0.0 && v.is_finite(), || {
                format!("{name} must be finite and >= 0, got {v}")
            })?;
        }
        need(self.delta.is_none_or(|d| d > 0.0 && d.is_finite()), || {
            "delta must be positive".into()
        })?;
        need(
            self.delta_fallback > 0.0 && self.delta_fallback.is_finite(),
            || "delta_fallback must be positive".into(),
        )?;
        need(self.seminorm_r_max > 0.0, || {
            "seminorm_r_max must be positive".into()
        })?;
        Ok(())
    }
}
