use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn aogd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aogd"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

/// A small separable dataset in LIBSVM format.
fn write_small(dir: &Path) -> String {
    let mut text = String::new();
    for k in 0..200 {
        let (label, a) = if k % 2 == 0 { ("+1", 1) } else { ("-1", 2) };
        text.push_str(&format!("{label} {a}:1 {}:0.5 {}:0.25\n", 3 + k % 7, 10 + k % 3));
    }
    let path = dir.join("small.svm");
    fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

fn data_rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

#[test]
fn classify_is_byte_identical_across_runs() {
    let dir = TempDir::new().unwrap();
    let data = write_small(dir.path());
    let a = aogd(&["classify", "--dataset", &data, "--seed", "3"]);
    let b = aogd(&["classify", "--dataset", &data, "--seed", "3"]);
    assert!(a.status.success(), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    assert!(text.contains("# experiment=classify"));
    assert!(text.contains("# seed=3"));
    assert_eq!(data_rows(&text).len(), 3);
}

#[test]
fn output_goes_to_out_path() {
    let dir = TempDir::new().unwrap();
    let data = write_small(dir.path());
    let out = dir.path().join("result.csv");
    let o = aogd(&["classify", "--dataset", &data, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(o.stdout.is_empty());
    assert!(fs::read_to_string(out).unwrap().contains("per-coord"));
}

#[test]
fn empty_algorithm_list_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let data = write_small(dir.path());
    let o = aogd(&["classify", "--dataset", &data, "--algorithms", ""]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn unknown_algorithm_is_a_usage_error() {
    let o = aogd(&["classify", "--algorithms", "global,cw"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("cw"));
}

#[test]
fn pa_is_rejected_for_logreg() {
    let dir = TempDir::new().unwrap();
    let data = write_small(dir.path());
    let o = aogd(&["logreg", "--dataset", &data, "--algorithms", "pa"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn short_oscillation_is_a_usage_error() {
    let o = aogd(&["separation", "--t0", "7,64,512"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn single_t0_leaves_slope_empty() {
    let o = aogd(&["separation", "--t0", "64"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = data_rows(&stdout(&o));
    assert_eq!(rows.len(), 2);
    for r in rows {
        assert_eq!(r[1], "80");
        assert_eq!(r[6], "");
    }
}

#[test]
fn three_t0_values_give_slopes() {
    let o = aogd(&["separation", "--t0", "64,512,4096"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = data_rows(&stdout(&o));
    assert_eq!(rows.len(), 6);
    let slope = |alg: &str| -> f64 { rows.iter().find(|r| r[2] == alg).unwrap()[6].parse().unwrap() };
    assert!(slope("global") > slope("per-coord"));
}

#[test]
fn zero_lambda_is_allowed() {
    let dir = TempDir::new().unwrap();
    let data = write_small(dir.path());
    let o = aogd(&["logreg", "--dataset", &data, "--lambda", "0"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("# lambda=0"));
    for r in data_rows(&text) {
        assert_eq!(r[4], "0");
        assert_eq!(r[9], "true");
    }
}

#[test]
fn negative_lambda_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let data = write_small(dir.path());
    let o = aogd(&["logreg", "--dataset", &data, "--lambda", "-1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn empty_dataset_fails_before_running() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("empty.svm");
    fs::write(&path, "# nothing here\n\n").unwrap();
    let o = aogd(&["logreg", "--dataset", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(o.stdout.is_empty());
}

#[test]
fn data_errors_exit_with_three() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.svm");
    fs::write(&bad, "+1 1:1\n+1 0:1\n").unwrap();
    let o = aogd(&["classify", "--dataset", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));

    let missing = dir.path().join("missing.svm");
    let o = aogd(&["classify", "--dataset", missing.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn config_file_sets_values_and_flags_override() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# sweep\nexperiment = separation\nt0 = 27, 64, 125\neta-points = 20\n").unwrap();
    let o = aogd(&["separation", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("# t0=27,64,125"));
    assert!(text.contains("# eta-points=20"));
    assert_eq!(data_rows(&text).len(), 6);

    let o = aogd(&["separation", "--config", cfg.to_str().unwrap(), "--t0", "64"]);
    assert!(o.status.success());
    assert_eq!(data_rows(&stdout(&o)).len(), 2);
}

#[test]
fn config_file_errors_are_usage_errors() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "experiment = classify\n").unwrap();
    let o = aogd(&["separation", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));

    fs::write(&cfg, "experiment = separation\nwarp = 9\n").unwrap();
    let o = aogd(&["separation", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bounds_audit_passes() {
    let o = aogd(&["bounds-audit", "--seed", "5"]);
    assert!(o.status.success(), "{}", stdout(&o));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert!(lines.len() >= 6);
    assert!(lines.iter().all(|l| l.starts_with("PASS")), "{text}");
}

#[test]
fn generated_sample_loads_back() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("sample.svm.gz");
    let o = aogd(&["generate", "sentiment", "--examples", "50", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let bytes = fs::read(&out).unwrap();
    assert_eq!(&bytes[..2], &[0x1f, 0x8b]);
    let o = aogd(&["classify", "--dataset", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("sample.svm,"));
}
