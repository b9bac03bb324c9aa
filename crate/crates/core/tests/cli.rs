use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_lowcut");

fn lowcut(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env_remove("LOWCUT_LOG")
        .output()
        .unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

const SMALL: &str = r#"{
  "kind": "convergence",
  "density": "thm2",
  "estimator": "bucketing",
  "sample_sizes": [100, 1000],
  "trials": 4,
  "seed": 3
}"#;

#[test]
fn run_writes_csv_and_summary_named_after_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(dir.path(), "convergence_thm2.json", SMALL);
    let out = dir.path().join("results");
    let o = lowcut(&["run", "--config", &config, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(o.stderr.is_empty());

    let csv = fs::read_to_string(out.join("convergence_thm2.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next(),
        Some("experiment,m,trial,out_dim,out_values,dE,df,dmu,diag,wall_ms")
    );
    assert_eq!(lines.count(), 8);
    let summary: serde_json::Value = serde_json::from_str(
        &fs::read_to_string(out.join("convergence_thm2.summary.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(summary["experiment"], "convergence_thm2");
    assert_eq!(summary["oracle"]["values"][0], 0.25);
    assert_eq!(summary["aggregates"].as_array().unwrap().len(), 2);
}

#[test]
fn seed_override_is_echoed() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(dir.path(), "x.json", SMALL);
    let out = dir.path().join("out");
    assert!(lowcut(&[
        "run",
        "--config",
        &config,
        "--out",
        out.to_str().unwrap(),
        "--seed",
        "7"
    ])
    .status
    .success());
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("x.summary.json")).unwrap()).unwrap();
    assert_eq!(summary["config"]["seed"], 7);
}

#[test]
fn invalid_config_exits_2_naming_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(
        dir.path(),
        "bad.json",
        &SMALL.replace("\"trials\": 4", "\"trials\": -4"),
    );
    let o = lowcut(&[
        "run",
        "--config",
        &config,
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 6") && err.contains("`trials`"), "{err}");
    assert!(o.stdout.is_empty());
}

#[test]
fn degenerate_oracle_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(
        dir.path(),
        "flat.json",
        &SMALL.replace("\"thm2\"", "\"uniform\""),
    );
    let o = lowcut(&[
        "run",
        "--config",
        &config,
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("not unique"));
    assert!(!dir.path().join("flat.csv").exists());
}

#[test]
fn refuses_to_overwrite_without_force() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(dir.path(), "c.json", SMALL);
    let out = dir.path().join("out");
    let args = ["run", "--config", &config, "--out", out.to_str().unwrap()];
    assert!(lowcut(&args).status.success());
    let before = fs::read(out.join("c.csv")).unwrap();
    let o = lowcut(&args);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--force"));
    let mut forced = args.to_vec();
    forced.push("--force");
    assert!(lowcut(&forced).status.success());
    assert_eq!(fs::read(out.join("c.csv")).unwrap(), before);
}

#[test]
fn unknown_demo_exits_2_with_names() {
    let o = lowcut(&["demo", "nope"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    for name in [
        "convergence-1d",
        "convergence-nd",
        "failure",
        "coupon",
        "gaps",
        "lowerbound",
    ] {
        assert!(err.contains(name), "{err}");
    }
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(lowcut(&["run"]).status.code(), Some(2));
    assert_eq!(
        lowcut(&["demo", "coupon", "--parallel", "0"]).status.code(),
        Some(2)
    );
}

#[test]
fn list_names_every_demo() {
    let o = lowcut(&["list"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().count(), 6);
    assert!(text.lines().all(|l| !l.trim().is_empty()));
}

#[test]
fn failure_demo_compares_schedules() {
    let dir = tempfile::tempdir().unwrap();
    let o = lowcut(&["demo", "failure", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success());
    let csv = fs::read_to_string(dir.path().join("failure.csv")).unwrap();
    assert!(csv.lines().any(|l| l.starts_with("failure/identity,")));
    assert!(csv.lines().any(|l| l.starts_with("failure/cbrt,")));
}

#[test]
fn logging_goes_to_stderr_only() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(dir.path(), "c.json", SMALL);
    let o = Command::new(BIN)
        .args([
            "run",
            "--config",
            &config,
            "--out",
            dir.path().to_str().unwrap(),
        ])
        .env("LOWCUT_LOG", "info")
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    assert!(String::from_utf8_lossy(&o.stderr).contains("wrote 8 records"));
}

#[test]
fn timing_fills_wall_ms() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(dir.path(), "c.json", SMALL);
    assert!(lowcut(&[
        "run",
        "--config",
        &config,
        "--out",
        dir.path().to_str().unwrap(),
        "--timing"
    ])
    .status
    .success());
    let csv = fs::read_to_string(dir.path().join("c.csv")).unwrap();
    assert!(csv.lines().skip(1).all(|l| !l.ends_with(',')));
}
