use conelab::field::{lp_norm, GridDomain, RegionMask, ScalarField};
use conelab::lab::checks::OpeningLevels;
use conelab::lab::{
    density_check, normalize, run_experiment, w1delta_verify, ExperimentConfig, Fixture, Kind,
};
use conelab::linalg::Vector;
use conelab::operators::DegeneracyParams;
use conelab::solver::Operator;
use conelab::Exec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::path::Path;
use std::process::Command;

fn conelab(args: &[&str], env: &[(&str, &str)]) -> i32 {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_conelab"));
    cmd.args(args);
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().unwrap().status.code().unwrap()
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("run.toml");
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn listing(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().into_string().unwrap(),
                std::fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    v.sort();
    v
}

fn origin() -> Vector {
    Vector::new2(0.0, 0.0)
}

#[test]
fn unknown_key_exits_2_without_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "n = 17\nresolution = 3\n");
    let out = tmp.path().join("out");
    let code = conelab(
        &["decay", "--config", &cfg, "--out", out.to_str().unwrap()],
        &[],
    );
    assert_eq!(code, 2);
    assert!(!out.exists());
}

#[test]
fn kind_mismatch_and_bad_threads_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "kind = \"solve\"\nn = 17\n");
    let out = tmp.path().join("out");
    let o = out.to_str().unwrap();
    assert_eq!(conelab(&["decay", "--config", &cfg, "--out", o], &[]), 2);
    assert_eq!(
        conelab(
            &["solve", "--config", &cfg, "--out", o],
            &[("CONELAB_THREADS", "many")]
        ),
        2
    );
    assert!(!out.exists());
    assert_eq!(
        conelab(
            &["solve", "--config", &cfg, "--out", o, "--threads", "1"],
            &[("CONELAB_THREADS", "many")]
        ),
        0
    );
}

#[test]
fn verify_on_builtin_fixture_passes_and_tags_provenance() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "n = 33\nfixture = \"radial\"\noperator = \"p_laplacian\"\n",
    );
    let out = tmp.path().join("out");
    assert_eq!(
        conelab(
            &["verify", "--config", &cfg, "--out", out.to_str().unwrap()],
            &[]
        ),
        0
    );
    let summary: serde_json::Value =
        serde_json::from_slice(&std::fs::read(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["passed"], true);
    let checks = summary["result"]["checks"].as_array().unwrap();
    assert!(checks.len() >= 7);
    for c in checks {
        let tag = c["provenance"].as_str().unwrap();
        assert!(["paper", "trivial", "derived"].contains(&tag), "{c}");
    }
    assert!(out.join("opening.csv").exists() && out.join("opening.fld").exists());
}

#[test]
fn decay_of_zero_field() {
    let cfg = ExperimentConfig {
        kind: Some(Kind::Decay),
        fixture: Fixture::Zero,
        n: 33,
        ..Default::default()
    };
    let o = run_experiment(&cfg, Exec::Parallel).unwrap();
    assert_eq!(o.exit_code(), 0);
    let s = o.summary().unwrap();
    let m = s["result"]["measures"].as_array().unwrap();
    assert!(m[1..].iter().all(|v| v.as_f64() == Some(0.0)));
    assert_eq!(s["result"]["decay"]["sigma"], "inf");
}

#[test]
fn outputs_are_identical_across_runs_and_thread_counts() {
    let tmp = tempfile::tempdir().unwrap();
    for kind in ["decay", "contact", "verify"] {
        let cfg = write_config(tmp.path(), "n = 33\nfixture = \"singular\"\nseed = 7\n");
        let a = tmp.path().join(format!("{kind}_a"));
        let b = tmp.path().join(format!("{kind}_b"));
        assert_eq!(
            conelab(
                &[
                    kind,
                    "--config",
                    &cfg,
                    "--out",
                    a.to_str().unwrap(),
                    "--threads",
                    "1"
                ],
                &[]
            ),
            0
        );
        assert_eq!(
            conelab(
                &[kind, "--config", &cfg, "--out", b.to_str().unwrap()],
                &[("CONELAB_THREADS", "3")]
            ),
            0
        );
        let (la, lb) = (listing(&a), listing(&b));
        assert!(la.len() >= 2);
        assert_eq!(la, lb, "{kind}");
    }
}

#[test]
fn exit_1_when_a_check_fails() {
    let cfg = ExperimentConfig {
        kind: Some(Kind::Solve),
        n: 33,
        max_iters: 1,
        ..Default::default()
    };
    let o = run_experiment(&cfg, Exec::Parallel).unwrap();
    assert_eq!(o.exit_code(), 1);
    assert!(o.files.iter().any(|(n, _)| n == "summary.json"));
}

#[test]
fn runtime_error_is_an_error() {
    // Censoring far above the limit: a single coarse level on a steep field.
    let cfg = ExperimentConfig {
        kind: Some(Kind::Verify),
        fixture: Fixture::Quadratic,
        quad_q: 40.0,
        gamma: 0.0,
        k_max: 1,
        delta: Some(2.0),
        n: 33,
        ..Default::default()
    };
    assert!(run_experiment(&cfg, Exec::Parallel).is_err());
}

#[test]
fn renormalizing_is_bounded() {
    let d = GridDomain::square(-1.0, 1.0, 33).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let (c0, c1, c2, s): (f64, f64, f64, f64) = (
            rng.gen_range(-3.0..3.0),
            rng.gen_range(-3.0..3.0),
            rng.gen_range(0.0..5.0),
            rng.gen_range(0.0..10.0),
        );
        let gamma = rng.gen_range(0.0..2.0);
        let eps1 = rng.gen_range(0.01..1.0);
        let pad = rng.gen_range(0.0..0.5);
        let u = ScalarField::from_fn(d, |x| c0 * x[0] + c1 * (c2 * x[1]).sin()).unwrap();
        let f = ScalarField::from_fn(d, |x| s * (x[0] * x[1]).cos()).unwrap();
        let (ut, ft, a) = normalize(&u, &f, gamma, eps1, pad).unwrap();
        let full = RegionMask::full(d);
        assert!(lp_norm(&ft, 2.0, &full).unwrap() <= eps1 * (1.0 + 1e-12));
        let back = ft.scale(a.powf(1.0 + gamma)).unwrap();
        assert!(
            back.zip_with(&f, |x, y| (x - y).abs()).unwrap().max_abs()
                <= 1e-12 * (1.0 + f.max_abs())
        );
        let (_, _, a2) = normalize(&ut, &ft, gamma, eps1, pad).unwrap();
        assert!(a2 <= 1.0 + pad + 1e-12, "a' = {a2}");
    }
}

#[test]
fn normalize_then_density_on_builtin_fixtures() {
    for fixture in [
        Fixture::Zero,
        Fixture::Affine,
        Fixture::Quadratic,
        Fixture::Radial,
        Fixture::Singular,
    ] {
        for op in [Operator::PLaplacian, Operator::PucciPlus] {
            let cfg = ExperimentConfig {
                kind: Some(Kind::Density),
                fixture,
                operator: op,
                n: 33,
                eps_pad: 0.1,
                big_lambda: 2.0,
                ..Default::default()
            };
            let o = run_experiment(&cfg, Exec::Parallel)
                .unwrap_or_else(|e| panic!("{fixture:?} {op:?}: {e}"));
            let s = o.summary().unwrap();
            assert!(
                s["result"]["fraction"].as_f64().unwrap() > 0.0,
                "{fixture:?}"
            );
        }
    }
}

#[test]
fn small_radial_fixture_has_positive_density() {
    let p = DegeneracyParams::new(1.0, 1.0, 1.0).unwrap();
    let d = GridDomain::square(-2.0, 2.0, 41).unwrap();
    let rs = conelab::operators::RadialSolution::new(1.0, p, origin()).unwrap();
    let u = ScalarField::from_fn(d, |x| rs.value(x) / 16.0 / 2f64.powf(rs.beta())).unwrap();
    let f = ScalarField::constant(d, 1e-3);
    let b1 = RegionMask::ball(d, origin(), 1.0);
    let r = density_check(&u, &f, 1.0, 1.0, &b1, 0.05).unwrap();
    assert!(r.fraction > 0.0);
    let big = u.scale(8.0).unwrap();
    assert!(density_check(&big, &f, 1.0, 1.0, &b1, 0.05).is_err());
}

#[test]
fn verify_ratio_is_scale_invariant() {
    let d = GridDomain::square(-1.0, 1.0, 33).unwrap();
    let gamma = 1.0;
    let u = ScalarField::from_fn(d, |x| (x[0] + 0.3).abs().powf(1.5) - 0.2 * x[1]).unwrap();
    let f = ScalarField::from_fn(d, |x| 1.0 + x[0]).unwrap();
    let half = RegionMask::ball(d, origin(), 0.5);
    let b1 = RegionMask::ball(d, origin(), 1.0);
    let lv = OpeningLevels {
        k_min: 0.25,
        base: 2.0,
        k_max: 8,
        censor_max: 0.05,
    };
    let (r, _) = w1delta_verify(&u, &f, gamma, 1.5, &half, &b1, &lv).unwrap();
    for a in [0.5, 3.0] {
        let (ra, _) = w1delta_verify(
            &u.scale(a).unwrap(),
            &f.scale(a * a).unwrap(),
            gamma,
            1.5,
            &half,
            &b1,
            &lv,
        )
        .unwrap();
        assert!((ra.left / (a * a * r.left) - 1.0).abs() < 1e-10);
        assert!((ra.ratio / r.ratio - 1.0).abs() < 1e-10);
    }
}
