use super::opening::{DecayCurve, OpeningField};
use super::slide::ContactSet;
use crate::error::Result;
use crate::field::io::{write_csv, write_values};
use serde_json::json;
use std::io::Write;

fn flag(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

/// Columns `x1[,x2],vertex,touched`.
pub fn contact_csv<W: Write>(w: &mut W, c: &ContactSet) -> Result<()> {
    let d = c.touch.domain();
    let vertex: Vec<f64> = c.vertices.as_slice().iter().map(|&b| flag(b)).collect();
    let touched: Vec<f64> = c.touch.as_slice().iter().map(|&b| flag(b)).collect();
    write_csv(w, d, &[("vertex", &vertex), ("touched", &touched)])
}

/// Binary container with 1 on touched nodes and 0 elsewhere.
pub fn contact_fld<W: Write>(w: &mut W, c: &ContactSet) -> Result<()> {
    let touched: Vec<f64> = c.touch.as_slice().iter().map(|&b| flag(b)).collect();
    write_values(w, c.touch.domain(), &touched)
}

/// Columns `x1[,x2],K_star,g,censored`; censored nodes carry NaN.
pub fn opening_csv<W: Write>(w: &mut W, o: &OpeningField) -> Result<()> {
    let censored: Vec<f64> = o.censored.as_slice().iter().map(|&b| flag(b)).collect();
    write_csv(
        w,
        o.censored.domain(),
        &[("K_star", &o.k_star), ("g", &o.g), ("censored", &censored)],
    )
}

/// Binary container of `K*` (NaN where censored).
pub fn opening_fld<W: Write>(w: &mut W, o: &OpeningField) -> Result<()> {
    write_values(w, o.censored.domain(), &o.k_star)
}

/// Columns `k,t_k,measure,in_fit_window`.
pub fn decay_csv<W: Write>(w: &mut W, c: &DecayCurve) -> Result<()> {
    writeln!(w, "k,t_k,measure,in_fit_window")?;
    for l in &c.levels {
        writeln!(w, "{},{},{},{}", l.k, l.t, l.measure, u8::from(l.in_fit))?;
    }
    Ok(())
}

/// `{M, sigma, residual, noise_floor, fit}`; `sigma` is the string `"inf"`
/// when every level beyond the first is below the floor.
pub fn decay_summary(c: &DecayCurve) -> serde_json::Value {
    let sigma = match (c.fit, c.sigma) {
        (super::opening::FitStatus::Infinite, _) => json!("inf"),
        (_, Some(s)) => json!(s),
        _ => serde_json::Value::Null,
    };
    json!({
        "M": c.base,
        "sigma": sigma,
        "residual": c.residual,
        "noise_floor": c.noise_floor,
        "fit": c.fit,
    })
}
