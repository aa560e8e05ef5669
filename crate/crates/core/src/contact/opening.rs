use super::slide::{slide_transform_with, Variant};
use crate::cones::Side;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::field::{measure, RegionMask, ScalarField};
use serde::Serialize;

/// `T^-_K`, `T^+_K` and their intersection `T_K`.
#[derive(Clone, Debug, PartialEq)]
pub struct TouchingSets {
    pub minus: RegionMask,
    pub plus: RegionMask,
    pub both: RegionMask,
}

fn alpha_of(gamma: f64) -> Result<f64> {
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "gamma must be finite and >= 0, got {gamma}"
        )));
    }
    Ok(1.0 / (1.0 + gamma))
}

pub fn touching_sets(
    u: &ScalarField,
    v: &RegionMask,
    k: f64,
    gamma: f64,
    search: &RegionMask,
) -> Result<TouchingSets> {
    touching_sets_with(u, v, k, gamma, search, Exec::default())
}

pub fn touching_sets_with(
    u: &ScalarField,
    v: &RegionMask,
    k: f64,
    gamma: f64,
    search: &RegionMask,
    exec: Exec,
) -> Result<TouchingSets> {
    let alpha = alpha_of(gamma)?;
    let minus =
        slide_transform_with(u, v, k, Side::Below, alpha, search, exec, Variant::Blocked)?.touch;
    let plus =
        slide_transform_with(u, v, k, Side::Above, alpha, search, exec, Variant::Blocked)?.touch;
    let both = minus.and(&plus)?;
    Ok(TouchingSets { minus, plus, both })
}

/// Smallest dyadic opening `K_min M^k` (`k <= k_max`) whose touching set
/// holds each node. Nodes never touched are censored and carry NaN in
/// `k_star` and `g`.
#[derive(Clone, Debug, PartialEq)]
pub struct OpeningField {
    pub gamma: f64,
    pub levels: Vec<f64>,
    pub k_star: Vec<f64>,
    /// `g = K*^(1/(1+gamma)) / 2`.
    pub g: Vec<f64>,
    pub censored: RegionMask,
}

impl OpeningField {
    /// Fraction of the region's nodes that are censored.
    pub fn censored_fraction(&self, region: &RegionMask) -> f64 {
        let n = region.count();
        if n == 0 {
            return 0.0;
        }
        region
            .indices()
            .filter(|&i| self.censored.contains(i))
            .count() as f64
            / n as f64
    }

    /// `g` with censored nodes replaced by `fill`.
    pub fn g_field(&self, fill: f64) -> Result<ScalarField> {
        let v = self
            .g
            .iter()
            .map(|&g| if g.is_nan() { fill } else { g })
            .collect();
        ScalarField::new(*self.censored.domain(), v)
    }
}

fn dyadic_levels(k_min: f64, m: f64, k_max: usize) -> Result<Vec<f64>> {
    if !(k_min > 0.0) || !(m > 1.0) || k_max < 1 {
        return Err(Error::InvalidParameter(format!(
            "need K_min > 0, M > 1, k_max >= 1; got {k_min}, {m}, {k_max}"
        )));
    }
    Ok((0..=k_max).map(|k| k_min * m.powi(k as i32)).collect())
}

#[allow(clippy::too_many_arguments)]
pub fn opening_function(
    u: &ScalarField,
    v: &RegionMask,
    gamma: f64,
    k_min: f64,
    m: f64,
    k_max: usize,
    search: &RegionMask,
) -> Result<OpeningField> {
    opening_function_with(u, v, gamma, k_min, m, k_max, search, Exec::default())
}

#[allow(clippy::too_many_arguments)]
pub fn opening_function_with(
    u: &ScalarField,
    v: &RegionMask,
    gamma: f64,
    k_min: f64,
    m: f64,
    k_max: usize,
    search: &RegionMask,
    exec: Exec,
) -> Result<OpeningField> {
    let levels = dyadic_levels(k_min, m, k_max)?;
    let d = *u.domain();
    let mut k_star = vec![f64::NAN; d.len()];
    let mut open = search.count();
    for &k in &levels {
        if open == 0 {
            break;
        }
        let t = touching_sets_with(u, v, k, gamma, search, exec)?;
        for i in t.both.indices() {
            if k_star[i].is_nan() {
                k_star[i] = k;
                open -= usize::from(search.contains(i));
            }
        }
    }
    let e = 1.0 / (1.0 + gamma);
    let g = k_star.iter().map(|&k| 0.5 * k.powf(e)).collect();
    let censored = RegionMask::from_mask(d, k_star.iter().map(|k| k.is_nan()).collect())?;
    Ok(OpeningField {
        gamma,
        levels,
        k_star,
        g,
        censored,
    })
}

/// How the decay exponent came out.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FitStatus {
    Fitted,
    /// Every level beyond `k = 0` sits at or below the noise floor.
    Infinite,
    /// Fewer than two levels above the floor, but not all of them empty.
    Undefined,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DecayLevel {
    pub k: usize,
    pub t: f64,
    pub measure: f64,
    pub in_fit: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecayCurve {
    #[serde(rename = "M")]
    pub base: f64,
    pub levels: Vec<DecayLevel>,
    /// `-slope` of the least-squares line through `(ln t_k, ln m_k)`;
    /// `None` unless the fit succeeded.
    pub sigma: Option<f64>,
    pub fit: FitStatus,
    /// Root-mean-square residual of the fit in log space.
    pub residual: Option<f64>,
    pub noise_floor: f64,
}

impl DecayCurve {
    pub fn measures(&self) -> Vec<f64> {
        self.levels.iter().map(|l| l.measure).collect()
    }

    pub fn is_nonincreasing(&self) -> bool {
        self.levels.windows(2).all(|w| w[1].measure <= w[0].measure)
    }

    /// `sigma` with the infinite case mapped to `+inf`.
    pub fn sigma_value(&self) -> Option<f64> {
        match self.fit {
            FitStatus::Fitted => self.sigma,
            FitStatus::Infinite => Some(f64::INFINITY),
            FitStatus::Undefined => None,
        }
    }
}

/// Least-squares slope and RMS residual.
pub(crate) fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let ss: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - icpt - slope * a).powi(2))
        .sum();
    (slope, icpt, (ss / n).sqrt())
}

/// `m_k = |B_1 \ T_{M^k}|` for `k = 0..=k_max` with vertices in `v` and the
/// whole grid as search region, and the fitted decay exponent.
pub fn decay_curve(
    u: &ScalarField,
    gamma: f64,
    m: f64,
    k_max: usize,
    b1: &RegionMask,
    v: &RegionMask,
) -> Result<DecayCurve> {
    decay_curve_with(u, gamma, m, k_max, b1, v, Exec::default())
}

#[allow(clippy::too_many_arguments)]
pub fn decay_curve_with(
    u: &ScalarField,
    gamma: f64,
    m: f64,
    k_max: usize,
    b1: &RegionMask,
    v: &RegionMask,
    exec: Exec,
) -> Result<DecayCurve> {
    let ts = dyadic_levels(1.0, m, k_max)?;
    let d = *u.domain();
    if !d.same_grid(b1.domain()) {
        return Err(Error::GridMismatch);
    }
    let search = RegionMask::full(d);
    let floor = 5.0 * d.cell_measure();
    let mut levels = Vec::with_capacity(ts.len());
    for (k, &t) in ts.iter().enumerate() {
        let tk = touching_sets_with(u, v, t, gamma, &search, exec)?;
        let mk = measure(&b1.minus(&tk.both)?);
        levels.push(DecayLevel {
            k,
            t,
            measure: mk,
            in_fit: mk > floor,
        });
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = levels
        .iter()
        .filter(|l| l.in_fit)
        .map(|l| (l.t.ln(), l.measure.ln()))
        .unzip();
    let (sigma, fit, residual) = if levels.iter().skip(1).all(|l| !l.in_fit) {
        (None, FitStatus::Infinite, None)
    } else if xs.len() < 2 {
        (None, FitStatus::Undefined, None)
    } else {
        let (slope, _, res) = linear_fit(&xs, &ys);
        (Some(-slope), FitStatus::Fitted, Some(res))
    };
    Ok(DecayCurve {
        base: m,
        levels,
        sigma,
        fit,
        residual,
        noise_floor: floor,
    })
}
