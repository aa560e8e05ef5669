use super::checks::{
    density_check, left_surrogate, normalize, w1delta_verify, Check, OpeningLevels, Provenance,
};
use super::config::{ExperimentConfig, Kind};
use super::fixtures::{self, FixtureData};
use crate::cones::Side;
use crate::contact::export::{
    contact_csv, contact_fld, decay_csv, decay_summary, opening_csv, opening_fld,
};
use crate::contact::{
    decay_curve_with, seminorm_field, slide_transform_with, vertex_map, FitStatus, Variant,
};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::field::io::{write_csv, write_field, write_field_csv};
use crate::field::{lp_norm, RegionMask};
use crate::linalg::Vector;
use crate::solver::SolveReport;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use std::path::Path;

/// Lowest determinant accepted on a touch set.
const DET_FLOOR: f64 = -1e-8;
/// Relative tolerance of exact scaling identities.
const SCALING_TOL: f64 = 1e-10;

/// Everything an experiment produced, not yet written.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub kind: Kind,
    pub checks: Vec<Check>,
    /// `(file name, contents)` in write order; `summary.json` comes last.
    pub files: Vec<(String, Vec<u8>)>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// 0 when every check passed, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            1
        }
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        for (name, bytes) in &self.files {
            std::fs::write(dir.join(name), bytes)?;
        }
        Ok(())
    }

    pub fn summary(&self) -> Result<Value> {
        let (_, bytes) = self
            .files
            .last()
            .ok_or_else(|| Error::Format("no summary".into()))?;
        Ok(serde_json::from_slice(bytes)?)
    }
}

fn report_json(r: &SolveReport) -> Value {
    json!({ "iterations": r.iterations, "sweeps": r.sweeps, "residual": r.residual, "converged": r.converged })
}

fn origin() -> Vector {
    Vector::new2(0.0, 0.0)
}

fn bytes(f: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    f(&mut out)?;
    Ok(out)
}

struct Run<'a> {
    cfg: &'a ExperimentConfig,
    exec: Exec,
    checks: Vec<Check>,
    files: Vec<(String, Vec<u8>)>,
}

impl Run<'_> {
    fn file(&mut self, name: &str, contents: Vec<u8>) {
        self.files.push((name.to_string(), contents));
    }

    fn fixture(&self, n: usize) -> Result<FixtureData> {
        fixtures::build(self.cfg, n, self.exec)
    }

    fn solve(&mut self) -> Result<Value> {
        let d = fixtures::domain(self.cfg, self.cfg.n)?;
        let spec = fixtures::problem(self.cfg, &d)?;
        let (u, report) = crate::solver::relax_solve_with(
            &spec,
            &crate::solver::initial_guess(&spec),
            self.exec,
        )?;
        self.checks.push(Check::new(
            "converged",
            report.converged,
            report.residual,
            Some(spec.tol_res),
            None,
            Provenance::Trivial,
        ));
        let error = fixtures::analytic(self.cfg, &d)?.map(|(exact, _)| {
            u.values()
                .iter()
                .zip(exact.values())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
        });
        self.file("solution.csv", bytes(|w| write_field_csv(w, &u))?);
        self.file("solution.fld", bytes(|w| write_field(w, &u))?);
        Ok(json!({ "report": report_json(&report), "max_error": error }))
    }

    fn contact(&mut self) -> Result<Value> {
        let data = self.fixture(self.cfg.n)?;
        let d = *data.u.domain();
        let full = RegionMask::full(d);
        let v = RegionMask::ball(d, origin(), self.cfg.vertex_radius);
        let alpha = 1.0 / (1.0 + self.cfg.gamma);
        let c = slide_transform_with(
            &data.u,
            &v,
            self.cfg.contact_k,
            self.cfg.side,
            alpha,
            &full,
            self.exec,
            Variant::Blocked,
        )?;
        let mut out = json!({
            "opening": c.opening,
            "tolerance": c.tolerance,
            "vertices": c.vertices.count(),
            "touched": c.touch.count(),
            "touch_measure": crate::field::measure(&c.touch),
        });
        if c.side == Side::Below {
            let m = vertex_map(&data.u, &c, self.cfg.gamma)?;
            let min_det = m.min_det();
            self.checks.push(Check::new(
                "determinant_floor",
                min_det >= DET_FLOOR,
                min_det,
                Some(DET_FLOOR),
                None,
                Provenance::Derived,
            ));
            out["min_det"] = json!(min_det);
            out["measure_ratio"] = json!(m.measure_ratio);
        }
        self.checks.push(Check::new(
            "touch_nonempty",
            !c.touch.is_empty(),
            c.touch.count() as f64,
            None,
            None,
            Provenance::Trivial,
        ));
        self.file("contact.csv", bytes(|w| contact_csv(w, &c))?);
        self.file("contact.fld", bytes(|w| contact_fld(w, &c))?);
        Ok(out)
    }

    fn decay(&mut self) -> Result<Value> {
        let data = self.fixture(self.cfg.n)?;
        let d = *data.u.domain();
        let b1 = RegionMask::ball(d, origin(), 1.0);
        let full = RegionMask::full(d);
        let c = decay_curve_with(
            &data.u,
            self.cfg.gamma,
            self.cfg.base,
            self.cfg.k_max,
            &b1,
            &full,
            self.exec,
        )?;
        let s = c.sigma_value();
        self.checks.push(Check::new(
            "nonincreasing",
            c.is_nonincreasing(),
            c.levels[0].measure,
            None,
            None,
            Provenance::Paper,
        ));
        self.checks.push(Check::new(
            "sigma_min",
            s.is_some_and(|s| s > self.cfg.sigma_min),
            s.unwrap_or(f64::NAN),
            Some(self.cfg.sigma_min),
            None,
            Provenance::Paper,
        ));
        if c.fit == FitStatus::Fitted {
            let r = c.residual.unwrap_or(f64::NAN);
            self.checks.push(Check::new(
                "fit_residual",
                r < self.cfg.residual_max,
                r,
                Some(self.cfg.residual_max),
                None,
                Provenance::Derived,
            ));
        }
        self.file("decay.csv", bytes(|w| decay_csv(w, &c))?);
        Ok(
            json!({ "decay": decay_summary(&c), "measures": c.measures(), "solve": data.report.as_ref().map(report_json) }),
        )
    }

    fn seminorm(&mut self) -> Result<Value> {
        let data = self.fixture(self.cfg.n)?;
        let d = *data.u.domain();
        let mut radii = Vec::new();
        let mut r = 2.0 * d.h();
        while r <= self.cfg.seminorm_r_max * (1.0 + 1e-12) {
            radii.push(r);
            r *= 2.0;
        }
        if radii.is_empty() {
            return Err(Error::Config(format!(
                "seminorm_r_max {} is below 2h",
                self.cfg.seminorm_r_max
            )));
        }
        let region = RegionMask::ball(d, origin(), 0.5);
        let s = seminorm_field(&data.u, 1.0 / (1.0 + self.cfg.gamma), &radii, &region)?;
        let vals: Vec<f64> = s.evaluated.indices().map(|k| s.values.get(k)).collect();
        let max = vals.iter().cloned().fold(0.0, f64::max);
        let finite = vals.iter().all(|v| v.is_finite());
        self.checks.push(Check::new(
            "evaluated",
            !vals.is_empty(),
            vals.len() as f64,
            None,
            None,
            Provenance::Trivial,
        ));
        self.checks.push(Check::new(
            "finite",
            finite,
            max,
            None,
            None,
            Provenance::Derived,
        ));
        let evaluated: Vec<f64> = s
            .evaluated
            .as_slice()
            .iter()
            .map(|&b| f64::from(u8::from(b)))
            .collect();
        self.file(
            "seminorm.csv",
            bytes(|w| {
                write_csv(
                    w,
                    &d,
                    &[("seminorm", s.values.values()), ("evaluated", &evaluated)],
                )
            })?,
        );
        Ok(
            json!({ "radii": radii, "max": max, "evaluated": vals.len(), "skipped": s.skipped.count() }),
        )
    }

    fn density(&mut self) -> Result<Value> {
        let data = self.fixture(self.cfg.n)?;
        let (u, f, a) = normalize(
            &data.u,
            &data.f,
            self.cfg.gamma,
            self.cfg.eps1,
            self.cfg.eps_pad,
        )?;
        let b1 = RegionMask::ball(*u.domain(), origin(), 1.0);
        let r = density_check(
            &u,
            &f,
            self.cfg.gamma,
            self.cfg.density_eps,
            &b1,
            self.cfg.density_threshold,
        )?;
        self.checks.push(Check::new(
            "density",
            r.passed,
            r.fraction,
            Some(r.threshold),
            None,
            Provenance::Derived,
        ));
        self.file("normalized.fld", bytes(|w| write_field(w, &u))?);
        Ok(json!({ "a": a, "fraction": r.fraction, "oscillation": r.oscillation }))
    }

    fn delta(&self, data: &FixtureData) -> Result<(f64, &'static str)> {
        if let Some(d) = self.cfg.delta {
            return Ok((d, "config"));
        }
        let dom = *data.u.domain();
        let b1 = RegionMask::ball(dom, origin(), 1.0);
        let c = decay_curve_with(
            &data.u,
            self.cfg.gamma,
            self.cfg.base,
            self.cfg.k_max,
            &b1,
            &RegionMask::full(dom),
            self.exec,
        )?;
        match c.sigma_value() {
            Some(s) if s.is_finite() && s > 0.0 => Ok((0.5 * s * (1.0 + self.cfg.gamma), "fitted")),
            Some(s) if s.is_infinite() => Ok((self.cfg.delta_fallback, "fallback")),
            _ => Err(Error::Precondition(
                "decay exponent undefined or not positive; set delta explicitly".into(),
            )),
        }
    }

    fn verify(&mut self) -> Result<Value> {
        let g = self.cfg.gamma;
        let base = self.fixture(self.cfg.n)?;
        let (delta, source) = self.delta(&base)?;
        let d = *base.u.domain();
        let half = RegionMask::ball(d, origin(), 0.5);
        let b1 = RegionMask::ball(d, origin(), 1.0);
        let levels = OpeningLevels {
            k_min: self.cfg.k_min,
            base: self.cfg.base,
            k_max: self.cfg.k_max,
            censor_max: self.cfg.censor_max,
        };
        let (mut report, opening) =
            w1delta_verify(&base.u, &base.f, g, delta, &half, &b1, &levels)?;

        let a = ChaCha8Rng::seed_from_u64(self.cfg.seed).gen_range(0.5..2.0);
        let scaled = base.u.scale(a)?;
        let (s1, s2) = left_surrogate(&scaled, g, delta, &half)?;
        let want = a.powf(1.0 + g) * report.left;
        let scale_err = if want == 0.0 {
            (s1 + s2).abs()
        } else {
            ((s1 + s2) / want - 1.0).abs()
        };
        report.checks.push(Check::new(
            "left_scaling",
            scale_err <= SCALING_TOL,
            scale_err,
            Some(SCALING_TOL),
            Some(a.powf(1.0 + g)),
            Provenance::Trivial,
        ));
        let right_scaled = scaled.max_abs_on(&b1).powf(1.0 + g)
            + lp_norm(&base.f.scale(a.powf(1.0 + g))?, d.dim() as f64, &b1)?;
        let ratio_scaled = if right_scaled > 0.0 {
            (s1 + s2) / right_scaled
        } else {
            report.ratio
        };
        let ratio_err = if report.ratio == 0.0 {
            ratio_scaled.abs()
        } else {
            (ratio_scaled / report.ratio - 1.0).abs()
        };
        report.checks.push(Check::new(
            "ratio_scaling",
            ratio_err <= SCALING_TOL,
            ratio_err,
            Some(SCALING_TOL),
            Some(report.ratio),
            Provenance::Trivial,
        ));

        let fine = self.fixture(2 * self.cfg.n - 1)?;
        let fd = *fine.u.domain();
        let (f1, f2) = left_surrogate(&fine.u, g, delta, &RegionMask::ball(fd, origin(), 0.5))?;
        let left_fine = f1 + f2;
        let drift = if left_fine == 0.0 && report.left == 0.0 {
            0.0
        } else {
            (left_fine - report.left).abs() / left_fine.abs()
        };
        report.checks.push(Check::new(
            "refinement_drift",
            drift <= self.cfg.drift_max,
            drift,
            Some(self.cfg.drift_max),
            Some(left_fine),
            Provenance::Derived,
        ));

        self.checks.extend(report.checks.iter().cloned());
        self.file("opening.csv", bytes(|w| opening_csv(w, &opening))?);
        self.file("opening.fld", bytes(|w| opening_fld(w, &opening))?);
        let mut out = report.to_json();
        out["delta_source"] = json!(source);
        out["scale_factor"] = json!(a);
        out["left_fine"] = json!(left_fine);
        out["solve"] = json!([
            base.report.as_ref().map(report_json),
            fine.report.as_ref().map(report_json)
        ]);
        Ok(out)
    }
}

/// Runs one experiment without touching the file system. Configuration and
/// runtime problems come back as errors.
pub fn run_experiment(cfg: &ExperimentConfig, exec: Exec) -> Result<Outcome> {
    cfg.validate()?;
    let kind = cfg.kind()?;
    let mut run = Run {
        cfg,
        exec,
        checks: Vec::new(),
        files: Vec::new(),
    };
    let result = match kind {
        Kind::Solve => run.solve(),
        Kind::Contact => run.contact(),
        Kind::Decay => run.decay(),
        Kind::Seminorm => run.seminorm(),
        Kind::Verify => run.verify(),
        Kind::Density => run.density(),
    }?;
    let mut echo = serde_json::to_value(cfg)?;
    if let Some(m) = echo.as_object_mut() {
        m.remove("out");
    }
    let passed = run.checks.iter().all(|c| c.passed);
    let summary = json!({
        "kind": kind,
        "config": echo,
        "checks": run.checks,
        "passed": passed,
        "result": result,
    });
    let mut text = serde_json::to_vec_pretty(&summary)?;
    text.push(b'\n');
    run.files.push(("summary.json".into(), text));
    Ok(Outcome {
        kind,
        checks: run.checks,
        files: run.files,
    })
}

/// Runs, writes the outputs to `cfg.out`, prints one line per check and
/// returns the exit status (0 passed, 1 failed checks, 2 error).
pub fn execute(cfg: &ExperimentConfig, exec: Exec) -> i32 {
    let outcome = match run_experiment(cfg, exec) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    if let Err(e) = outcome.write(&cfg.out) {
        eprintln!("error: writing {}: {e}", cfg.out.display());
        return 2;
    }
    for c in &outcome.checks {
        println!("{}", c.line());
    }
    let n = outcome.checks.iter().filter(|c| c.passed).count();
    println!(
        "{n}/{} checks passed; outputs in {}",
        outcome.checks.len(),
        cfg.out.display()
    );
    outcome.exit_code()
}
