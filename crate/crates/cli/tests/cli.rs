//! End-to-end runs of the binary: exit codes, artifacts, determinism, resume.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const SMALL: &str = r#"
schema_version = 1

[model]
m = 0.5
beta = 1.2
r = 0.9
rbar = 1.0
alpha = 4.0
Cbar = 1.0
x0 = 2.0
s0 = 0.1
eps = 0.25

[grid]
x_left = -10.0
h = 0.1
x_uniform = 5.0
ratio = 1.03
x_right = 1.0e4

[time]
t_first = 2.0
t_end = 20.0
count = 8
extra = []

[analysis]
lambdas = [0.1, 0.5, 0.9]
fit_from = 2.0
"#;

fn reference_config() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/reference.toml")
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("run.toml");
    fs::write(&p, text).unwrap();
    p
}

fn fastfront(config: &Path, out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fastfront"))
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .unwrap()
}

fn text(b: &[u8]) -> String {
    String::from_utf8_lossy(b).into_owned()
}

#[test]
fn regime_of_the_reference_case() {
    let dir = tempfile::tempdir().unwrap();
    let o = fastfront(&reference_config(), dir.path(), &["regime"]);
    assert_eq!(o.status.code(), Some(0), "{}", text(&o.stderr));
    let out = text(&o.stdout);
    assert!(out.contains("\"sigma\": 1.75"), "{out}");
    assert!(dir.path().join("regime.json").exists());
}

#[test]
fn out_of_scope_parameters_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &SMALL.replace("beta = 1.2", "beta = 1.6"));
    let o = fastfront(&cfg, &dir.path().join("out"), &["regime"]);
    assert_eq!(o.status.code(), Some(1), "{}", text(&o.stderr));
}

#[test]
fn malformed_config_exits_2_with_the_key_path() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &SMALL.replace("h = 0.1", "h = \"fine\""));
    let o = fastfront(&cfg, &dir.path().join("out"), &["regime"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(text(&o.stderr).contains("grid.h"), "{}", text(&o.stderr));

    let cfg = write_config(dir.path(), &SMALL.replace("ratio = 1.03", "ratio = 1.03\nspacing = 2"));
    let o = fastfront(&cfg, &dir.path().join("out"), &["regime"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(text(&o.stderr).contains("spacing"), "{}", text(&o.stderr));

    let o = fastfront(&dir.path().join("missing.toml"), &dir.path().join("out"), &["regime"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn zero_rate_profile_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &SMALL.replace("r = 0.9", "r = 0.0"));
    let o = fastfront(&cfg, &dir.path().join("out"), &["profile"]);
    assert_eq!(o.status.code(), Some(2), "{}", text(&o.stderr));
}

#[test]
fn missing_bracket_exits_3_with_the_scan() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &format!("{SMALL}\n[scan]\nk_min = 1\nk_max = 3\n"));
    let o = fastfront(&cfg, &dir.path().join("out"), &["profile"]);
    assert_eq!(o.status.code(), Some(3), "{}", text(&o.stderr));
    let err = text(&o.stderr);
    assert!(err.contains("class") && err.contains("side"), "{err}");
    assert!(err.contains("High"), "{err}");
}

#[test]
fn profiles_are_reproducible_and_replayable() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = fastfront(&cfg, out, &["profile"]);
        assert_eq!(o.status.code(), Some(0), "{}", text(&o.stderr));
        assert!(text(&o.stdout).contains("z* ="), "{}", text(&o.stdout));
    }
    for f in ["profile_lower.csv", "profile_lower.json"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f} differs between runs");
    }
    let o = fastfront(&cfg, &a, &["profile", "--verify-only"]);
    assert_eq!(o.status.code(), Some(0), "{}", text(&o.stderr));
    assert!(text(&o.stdout).contains("matches"), "{}", text(&o.stdout));

    // nothing stored for the upper rate yet
    let o = fastfront(&cfg, &a, &["profile", "--rate", "upper", "--verify-only"]);
    assert_eq!(o.status.code(), Some(2), "{}", text(&o.stderr));
}

#[test]
fn tracks_resume_without_changes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = dir.path().join("out");
    let o = fastfront(&cfg, &out, &["--jobs", "2", "track"]);
    assert_eq!(o.status.code(), Some(0), "{}", text(&o.stderr));
    let names = ["track_lambda_0.1.csv", "track_lambda_0.5.csv", "track_lambda_0.9.csv"];
    let first: Vec<Vec<u8>> = names.iter().map(|n| fs::read(out.join(n)).unwrap()).collect();
    let header = text(&first[0]);
    assert!(header.starts_with("t,x,multiple\n"), "{header}");

    let o = fastfront(&cfg, &out, &["track"]);
    assert_eq!(o.status.code(), Some(0), "{}", text(&o.stderr));
    assert!(text(&o.stdout).contains("reusing stored trajectory"), "{}", text(&o.stdout));
    for (n, before) in names.iter().zip(&first) {
        assert_eq!(&fs::read(out.join(n)).unwrap(), before, "{n} changed on resume");
    }

    // a different configuration may not write into the same directory
    let other = dir.path().join("other.toml");
    fs::write(&other, SMALL.replace("t_end = 20.0", "t_end = 30.0")).unwrap();
    let o = fastfront(&other, &out, &["track"]);
    assert_eq!(o.status.code(), Some(2), "{}", text(&o.stderr));

    let o = fastfront(&cfg, &out, &["report"]);
    assert_eq!(o.status.code(), Some(0), "{}", text(&o.stderr));
    let rep: serde_json::Value = serde_json::from_slice(&fs::read(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(rep["tracks"].as_array().unwrap().len(), 3);
}

#[test]
fn solver_failure_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        &format!("{SMALL}\n[reaction]\nkind = \"zero\"\n").replace("x_right = 1.0e4", "x_right = 12.0"),
    );
    let o = fastfront(&cfg, &dir.path().join("out"), &["simulate"]);
    assert_eq!(o.status.code(), Some(4), "{}\n{}", text(&o.stdout), text(&o.stderr));
}

/// The full reference pipeline. Every comparison and residual certificate
/// passes; the level-set sandwich for the lowest level fails at two early
/// times, so the command exits 5.
#[test]
fn reference_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("reference");
    let o = fastfront(&reference_config(), &out, &["verify"]);
    let stdout = text(&o.stdout);
    println!("{stdout}");
    assert!(matches!(o.status.code(), Some(0 | 5)), "{}", text(&o.stderr));

    let rep: serde_json::Value = serde_json::from_slice(&fs::read(out.join("certificates.json")).unwrap()).unwrap();
    assert_eq!(rep["upper_comparison"]["pass"], true);
    for z in rep["subsolution_zones"].as_array().unwrap() {
        assert_eq!(z["pass"], true, "{z}");
    }
    assert_eq!(rep["lower_comparison"]["pass"], true);
    let sandwich = rep["sandwich"].as_array().unwrap();
    assert_eq!(sandwich.len(), 3);
    for sw in &sandwich[1..] {
        assert_eq!(sw["pass"], true, "{sw}");
    }
    let failing = sandwich.iter().filter(|s| s["pass"] == false).count();
    assert_eq!(o.status.code(), Some(if failing == 0 { 0 } else { 5 }));
}
