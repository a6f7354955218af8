// SPDX-License-Identifier: MIT OR Apache-2.0

use std::path::Path;
use std::process::{Command, Output};

use qexp_core::verify::SampleTable;
use qexp_core::{fn_eval, GroupParams, QuadratureSpec, ResidualReport, C64};

fn qexp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qexp"))
        .args(args)
        .env("QEXP_THREADS", "2")
        .output()
        .expect("spawn qexp")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn read_report(p: &Path) -> ResidualReport {
    ResidualReport::from_json(&std::fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn eval_values_and_argument_errors() {
    let o = qexp(&["eval", "fn", "--N", "6", "--zero"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("F_N(0) = 1.000000000000+0.000000000000i"));
    let o = qexp(&["eval", "dfn0", "--N", "6", "--k", "0"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("0.000000000000-0.577350269190i"), "{}", stdout(&o));
    assert_eq!(code(&qexp(&["eval", "fn", "--N", "5", "--k", "1", "--x", "0"])), 2);
    assert_eq!(code(&qexp(&["eval", "fn", "--N", "6", "--k", "1"])), 2);
    assert_eq!(code(&qexp(&["eval", "fo", "--N", "6", "--re", "-1", "--im", "0"])), 2);
    assert_eq!(code(&qexp(&["eval", "fn", "--N", "six", "--zero"])), 2);
    assert_eq!(code(&qexp(&["bogus"])), 2);
}

#[test]
fn eval_fn_matches_the_library() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("v.json");
    let o = qexp(&[
        "eval",
        "fn",
        "--N",
        "8",
        "--k",
        "3",
        "--x",
        "-0.4",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let r = read_report(&out);
    let p = GroupParams::new(8).unwrap();
    let want = fn_eval(p.point(3, -0.4), &p, &QuadratureSpec::default()).unwrap();
    assert_eq!(C64::new(r.get("value.re").unwrap(), r.get("value.im").unwrap()), want);
    assert_eq!(r.meta.n, 8);
}

#[test]
fn gauss_sums_and_contour() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("g.json");
    let o = qexp(&[
        "gauss",
        "--N",
        "2..64",
        "--contour-R",
        "8",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = read_report(&out);
    assert!(r.get("N002.residual").unwrap() <= 1e-15);
    assert!(r.get("N006.contour").unwrap() <= 1e-8);
    assert_eq!(r.residuals.len(), 64);
    assert_eq!(code(&qexp(&["gauss", "--N", "7"])), 2);
    assert_eq!(code(&qexp(&["gauss", "--N", "3..9"])), 2);
}

#[test]
fn verify_suites_pass() {
    for args in [
        &["verify", "conj", "--N", "6"][..],
        &["verify", "overlaps", "--N", "6"],
        &[
            "verify",
            "exp-identity",
            "--N",
            "6",
            "--M",
            "256",
            "--kappa",
            "8",
            "--sweep-h",
            "3",
        ],
        &["verify", "commutation"],
        &["verify", "weak-limit"],
        &["verify", "closure-forms", "--sweep-h", "2"],
    ] {
        let o = qexp(args);
        assert_eq!(code(&o), 0, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn exp_identity_sweep_decreases() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("e.json");
    let o = qexp(&[
        "verify",
        "exp-identity",
        "--sweep-h",
        "3",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let r = read_report(&out);
    let h: Vec<f64> = (0..3).map(|i| r.get(&format!("exp_identity.h{i}")).unwrap()).collect();
    assert!(h[0] <= 1e-3 && h[1] < h[0], "{h:?}");
    assert_eq!(r.get("exp_identity.refinement_law_failures"), Some(0.0));
    assert_eq!((r.meta.n, r.meta.m, r.meta.kappa), (6, 256, 8));
}

#[test]
fn threshold_violation_still_writes_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bad.json");
    // a packet narrower than the grid can resolve breaks the identity
    let o = qexp(&[
        "verify",
        "exp-identity",
        "--width",
        "0.5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 1, "{}", stdout(&o));
    assert!(!read_report(&out).violations().is_empty());
}

#[test]
fn reports_are_deterministic_and_flags_beat_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    std::fs::write(&cfg, "# sweep\nN=8\nM=128\nkappa=8\nseed=42\n").unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for out in [&a, &b] {
        let o = qexp(&[
            "verify",
            "conj",
            "--config",
            cfg.to_str().unwrap(),
            "--N",
            "6",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 0);
    }
    let (ta, tb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(ta, tb);
    let r = read_report(&a);
    assert_eq!((r.meta.n, r.meta.seed), (6, 42));
    let keys: Vec<&String> = r.residuals.keys().collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
    std::fs::write(&cfg, "N=6\nwidth=wide\n").unwrap();
    assert_eq!(
        code(&qexp(&["verify", "overlaps", "--config", cfg.to_str().unwrap()])),
        2
    );
}

#[test]
fn csv_reports_have_a_header() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o.csv");
    let o = qexp(&[
        "verify",
        "overlaps",
        "--N",
        "8",
        "--format",
        "csv",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("name,value,tolerance\n"));
    assert!(text.lines().any(|l| l.starts_with("weyl_relation,")));
    assert_eq!(code(&qexp(&["verify", "overlaps", "--format", "xml"])), 2);
}

#[test]
fn normality_probe_reports_every_mu() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("mu.csv");
    let o = qexp(&[
        "probe",
        "normality",
        "--N",
        "6",
        "--mu-grid",
        "rays+midsector",
        "--format",
        "csv",
        "--out",
        out.to_str().unwrap(),
    ]);
    // the on/off ordering is not observed on the lattice
    assert_eq!(code(&o), 1);
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("mu_re,mu_im,modulus,on_gamma,defect,relative_defect\n"));
    assert_eq!(text.lines().count(), 1 + 3 * 12);
    assert_eq!(code(&qexp(&["probe", "normality", "--N", "6", "--mu", "0+0i"])), 0);
    assert_eq!(code(&qexp(&["probe", "normality", "--N", "6", "--mu", "1+x"])), 2);
    assert_eq!(
        code(&qexp(&["probe", "normality", "--N", "6", "--mu-grid", "circle"])),
        2
    );
}

#[test]
fn fit_round_trip_and_controls() {
    let o = qexp(&["fit", "gamma", "--N", "6", "--self-test", "gamma=k:2,x:0.3"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("k = 2"));
    assert_eq!(code(&qexp(&["fit", "gamma", "--self-test", "gamma=k:2"])), 2);

    let dir = tempfile::tempdir().unwrap();
    let p = GroupParams::new(6).unwrap();
    let quad = QuadratureSpec::default();
    let one = dir.path().join("one.csv");
    std::fs::write(&one, SampleTable::design_csv(&|_| Ok(C64::new(1.0, 0.0)), &p).unwrap()).unwrap();
    let o = qexp(&["fit", "gamma", "--N", "6", "--from-samples", one.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("γ = 0"));
    let sq = dir.path().join("sq.csv");
    let csv = SampleTable::design_csv(&|z| fn_eval(z, &p, &quad).map(|v| v * v), &p).unwrap();
    std::fs::write(&sq, csv).unwrap();
    let o = qexp(&["fit", "gamma", "--N", "6", "--from-samples", sq.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("NotInFamily"));
    let missing = dir.path().join("missing.csv");
    assert_eq!(
        code(&qexp(&["fit", "gamma", "--from-samples", missing.to_str().unwrap()])),
        2
    );
}
