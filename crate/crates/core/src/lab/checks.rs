use crate::cones::Side;
use crate::contact::{
    default_radii, maximal_function, opening_function, slide_transform, OpeningField,
};
use crate::error::{Error, Result};
use crate::field::{
    gradient_central, lp_norm, measure, w1p_seminorm, RegionMask, ScalarField, VectorField,
};
use crate::operators::stress;
use serde::Serialize;
use serde_json::json;

/// Where a reference value comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    /// A bound or quantity stated in the source theory.
    Paper,
    /// An identity that holds by construction.
    Trivial,
    /// Computed by this crate from an independent route.
    Derived,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub tolerance: Option<f64>,
    pub reference: Option<f64>,
    pub provenance: Provenance,
}

impl Check {
    pub fn new(
        name: &str,
        passed: bool,
        measured: f64,
        tolerance: Option<f64>,
        reference: Option<f64>,
        provenance: Provenance,
    ) -> Check {
        Check {
            name: name.to_string(),
            passed,
            measured,
            tolerance,
            reference,
            provenance,
        }
    }

    /// `name: PASS (measured ..., tolerance ...)`.
    pub fn line(&self) -> String {
        let status = if self.passed { "PASS" } else { "FAIL" };
        let tol = self
            .tolerance
            .map_or(String::new(), |t| format!(", tolerance {}", short(t)));
        format!(
            "{}: {status} (measured {}{tol})",
            self.name,
            short(self.measured)
        )
    }
}

fn short(x: f64) -> String {
    if x == 0.0 || (1e-3..1e6).contains(&x.abs()) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// Result of a surrogate `W^{1,delta}` estimate. The overall status is the
/// conjunction of the checks.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    pub delta: f64,
    /// `||D V(Du)||_{L^delta(B_half)}` by forward differences.
    pub left_seminorm: f64,
    /// `||V(Du)||_{L^delta(B_half)}`.
    pub left_lp: f64,
    pub left: f64,
    /// `||u||_inf(B_1)^(1+gamma) + ||f||_{L^n(B_1)}`.
    pub right: f64,
    pub ratio: f64,
    /// `||g||_{L^delta}` over the uncensored part of `B_half`.
    pub g_norm: f64,
    pub censored_fraction: f64,
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("report serializes");
        v["passed"] = json!(self.passed());
        v
    }
}

/// `(u/a, f/a^(1+gamma), a)` with
/// `a = 16 ||u||_inf + (||f||_{L^n} / eps1)^(1/(1+gamma)) + eps_pad`, both
/// norms over the whole grid.
pub fn normalize(
    u: &ScalarField,
    f: &ScalarField,
    gamma: f64,
    eps1: f64,
    eps_pad: f64,
) -> Result<(ScalarField, ScalarField, f64)> {
    if !u.domain().same_grid(f.domain()) {
        return Err(Error::GridMismatch);
    }
    if u.values().iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("u"));
    }
    if f.values().iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("f"));
    }
    if !(eps1 > 0.0) || !(eps_pad >= 0.0) || !(gamma >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need eps1 > 0, eps_pad >= 0, gamma >= 0; got {eps1}, {eps_pad}, {gamma}"
        )));
    }
    let d = *u.domain();
    let fnorm = lp_norm(f, d.dim() as f64, &RegionMask::full(d))?;
    let a = 16.0 * u.max_abs() + (fnorm / eps1).powf(1.0 / (1.0 + gamma)) + eps_pad;
    if !(a > 0.0) {
        return Err(Error::Precondition(
            "normalization constant is zero; supply eps_pad > 0".into(),
        ));
    }
    let s = a.powf(1.0 + gamma);
    Ok((u.map(|v| v / a)?, f.map(|v| v / s)?, a))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Density {
    /// `|B_1 ∩ T^-_1 ∩ {M(|f|^n) <= eps}| / |B_1|`.
    pub fraction: f64,
    pub threshold: f64,
    pub passed: bool,
    pub oscillation: f64,
}

/// Density of good points: touched from below by an opening-1 cone with
/// vertex anywhere on the grid and with small maximal function of `|f|^n`.
/// Requires `osc u <= 1/8` over the grid.
pub fn density_check(
    u: &ScalarField,
    f: &ScalarField,
    gamma: f64,
    eps: f64,
    b1: &RegionMask,
    threshold: f64,
) -> Result<Density> {
    let d = *u.domain();
    if !d.same_grid(f.domain()) || !d.same_grid(b1.domain()) {
        return Err(Error::GridMismatch);
    }
    if b1.is_empty() {
        return Err(Error::EmptyRegion);
    }
    let full = RegionMask::full(d);
    let oscillation = u.oscillation_on(&full);
    if oscillation > 0.125 * (1.0 + 1e-12) {
        return Err(Error::Precondition(format!(
            "oscillation {oscillation} exceeds 1/8; normalize first"
        )));
    }
    let alpha = 1.0 / (1.0 + gamma);
    let touch = slide_transform(u, &full, 1.0, Side::Below, alpha, &full)?.touch;
    let n = d.dim() as i32;
    let mf = maximal_function(&f.map(|v| v.abs().powi(n))?, &full, &default_radii(&d))?;
    let small = RegionMask::from_fn(d, |k, _| mf.get(k) <= eps);
    let good = b1.and(&touch)?.and(&small)?;
    let fraction = measure(&good) / measure(b1);
    Ok(Density {
        fraction,
        threshold,
        passed: fraction >= threshold,
        oscillation,
    })
}

/// Dyadic opening levels used by [`w1delta_verify`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OpeningLevels {
    pub k_min: f64,
    pub base: f64,
    pub k_max: usize,
    pub censor_max: f64,
}

/// `V(Du)` from central differences.
pub fn stress_field(u: &ScalarField, gamma: f64) -> Result<VectorField> {
    gradient_central(u)?.map(|p| stress(p, gamma))
}

/// `||D V||_delta + ||V||_delta` over the region.
pub fn left_surrogate(
    u: &ScalarField,
    gamma: f64,
    delta: f64,
    region: &RegionMask,
) -> Result<(f64, f64)> {
    let v = stress_field(u, gamma)?;
    let semi = w1p_seminorm(&v, delta, region)?;
    let lp = lp_norm(&v.norm_field(), delta, region)?;
    Ok((semi, lp))
}

/// Surrogates for both sides of the `W^{1,delta}` estimate of the stress
/// map, and the opening field behind the `g` route.
pub fn w1delta_verify(
    u: &ScalarField,
    f: &ScalarField,
    gamma: f64,
    delta: f64,
    b_half: &RegionMask,
    b1: &RegionMask,
    levels: &OpeningLevels,
) -> Result<(VerifyReport, OpeningField)> {
    let d = *u.domain();
    if !d.same_grid(f.domain()) || !d.same_grid(b_half.domain()) || !d.same_grid(b1.domain()) {
        return Err(Error::GridMismatch);
    }
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "delta must be positive, got {delta}"
        )));
    }
    let full = RegionMask::full(d);
    let opening = opening_function(
        u,
        &full,
        gamma,
        levels.k_min,
        levels.base,
        levels.k_max,
        &full,
    )?;
    let censored_fraction = opening.censored_fraction(b_half);
    if censored_fraction > levels.censor_max {
        return Err(Error::CensoringTooHigh {
            fraction: censored_fraction,
            limit: levels.censor_max,
        });
    }
    let (left_seminorm, left_lp) = left_surrogate(u, gamma, delta, b_half)?;
    let left = left_seminorm + left_lp;
    let right = u.max_abs_on(b1).powf(1.0 + gamma) + lp_norm(f, d.dim() as f64, b1)?;
    let ratio = if right > 0.0 {
        left / right
    } else if left == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    let uncensored = b_half.minus(&opening.censored)?;
    let g_norm = if uncensored.is_empty() {
        0.0
    } else {
        lp_norm(&opening.g_field(0.0)?, delta, &uncensored)?
    };
    let checks = vec![
        Check::new(
            "left_surrogate_finite",
            left.is_finite(),
            left,
            None,
            None,
            Provenance::Derived,
        ),
        Check::new(
            "g_norm_finite",
            g_norm.is_finite(),
            g_norm,
            None,
            None,
            Provenance::Derived,
        ),
        Check::new(
            "bracket_ratio_finite",
            ratio.is_finite(),
            ratio,
            None,
            Some(right),
            Provenance::Paper,
        ),
        Check::new(
            "censoring",
            censored_fraction <= levels.censor_max,
            censored_fraction,
            Some(levels.censor_max),
            None,
            Provenance::Derived,
        ),
    ];
    let report = VerifyReport {
        delta,
        left_seminorm,
        left_lp,
        left,
        right,
        ratio,
        g_norm,
        censored_fraction,
        checks,
    };
    Ok((report, opening))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::GridDomain;
    use crate::linalg::Vector;

    fn grid() -> GridDomain {
        GridDomain::square(-1.0, 1.0, 33).unwrap()
    }

    #[test]
    fn normalize_zero_with_pad() {
        let d = grid();
        let (u, f, a) = normalize(
            &ScalarField::zeros(d),
            &ScalarField::zeros(d),
            1.0,
            0.5,
            1.0,
        )
        .unwrap();
        assert_eq!(a, 1.0);
        assert_eq!(u.max_abs(), 0.0);
        assert_eq!(f.max_abs(), 0.0);
    }

    #[test]
    fn normalize_unit_sup() {
        let d = grid();
        let u = ScalarField::from_fn(d, |x| x[0]).unwrap();
        let (v, _, a) = normalize(&u, &ScalarField::zeros(d), 1.0, 0.5, 0.0).unwrap();
        assert_eq!(a, 16.0);
        assert_eq!(v.max_abs(), 1.0 / 16.0);
    }

    #[test]
    fn normalize_needs_positive_constant() {
        let d = grid();
        assert!(normalize(
            &ScalarField::zeros(d),
            &ScalarField::zeros(d),
            1.0,
            0.5,
            0.0
        )
        .is_err());
        assert!(normalize(
            &ScalarField::zeros(d),
            &ScalarField::zeros(d),
            1.0,
            0.0,
            1.0
        )
        .is_err());
    }

    #[test]
    fn density_of_flat_field_is_one() {
        let d = grid();
        let b1 = RegionMask::ball(d, Vector::new2(0.0, 0.0), 1.0);
        let r = density_check(
            &ScalarField::zeros(d),
            &ScalarField::zeros(d),
            1.0,
            1.0,
            &b1,
            0.05,
        )
        .unwrap();
        assert_eq!(r.fraction, 1.0);
        assert!(r.passed);
    }

    #[test]
    fn density_rejects_large_oscillation() {
        let d = grid();
        let b1 = RegionMask::ball(d, Vector::new2(0.0, 0.0), 1.0);
        let u = ScalarField::from_fn(d, |x| 0.5 * x[0]).unwrap();
        let e = density_check(&u, &ScalarField::zeros(d), 1.0, 1.0, &b1, 0.05).unwrap_err();
        assert!(matches!(e, Error::Precondition(_)));
    }

    #[test]
    fn affine_field_has_zero_derivative_surrogate() {
        let d = grid();
        let u = ScalarField::from_fn(d, |x| 0.3 * x[0] - 0.2 * x[1] + 0.1).unwrap();
        let half = RegionMask::ball(d, Vector::new2(0.0, 0.0), 0.5);
        let b1 = RegionMask::ball(d, Vector::new2(0.0, 0.0), 1.0);
        let lv = OpeningLevels {
            k_min: 0.25,
            base: 2.0,
            k_max: 6,
            censor_max: 0.05,
        };
        let (r, _) = w1delta_verify(&u, &ScalarField::zeros(d), 1.0, 2.0, &half, &b1, &lv).unwrap();
        assert!(r.left_seminorm < 1e-12, "{}", r.left_seminorm);
        assert!(r.left <= r.right);
        assert!(r.passed());
        let j = r.to_json();
        assert_eq!(j["passed"], true);
        assert_eq!(j["checks"][2]["provenance"], "paper");
    }

    #[test]
    fn heavy_censoring_is_an_error() {
        let d = grid();
        let u = ScalarField::from_fn(d, |x| 4.0 * x.norm_sq()).unwrap();
        let half = RegionMask::ball(d, Vector::new2(0.0, 0.0), 0.5);
        let lv = OpeningLevels {
            k_min: 0.25,
            base: 2.0,
            k_max: 1,
            censor_max: 0.05,
        };
        let e =
            w1delta_verify(&u, &ScalarField::zeros(d), 0.0, 2.0, &half, &half, &lv).unwrap_err();
        assert!(matches!(e, Error::CensoringTooHigh { .. }));
    }
}
