use std::path::Path;
use std::process::{Command, Output};

fn scatmask(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_scatmask"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

#[test]
fn help_and_version_exit_zero() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(scatmask(&["--help"], dir.path()).status.code(), Some(0));
    assert_eq!(scatmask(&["--version"], dir.path()).status.code(), Some(0));
}

#[test]
fn bad_flags_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["masking"][..],
        &["frobnicate"],
        &["masking", "--length", "1000", "--out", "m.json"],
        &["masking", "--f1", "9000", "--out", "m.json"],
        &["filterbank-dump", "--profile", "shannon", "--q", "4", "--out", "f.csv"],
        &["filterbank-dump", "--octaves", "0", "--out", "f.csv"],
        &["masking", "--f2", "9000", "--out", "m.json"],
        &["decay", "--n", "1,200", "--out", "d.csv"],
        &["heatmap", "--gap-count", "0", "--out", "h.csv"],
        &["--threads", "0", "decay", "--out", "d.csv"],
    ] {
        let out = scatmask(args, dir.path());
        assert_eq!(out.status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn unwritable_output_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let out = scatmask(&["filterbank-dump", "--out", "missing/dir/fb.csv"], dir.path());
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn filterbank_dump_has_one_column_per_filter() {
    let dir = tempfile::tempdir().unwrap();
    let out = scatmask(&["filterbank-dump", "--profile", "shannon", "--octaves", "7", "--out", "fb.csv"], dir.path());
    assert!(out.status.success());
    let csv = std::fs::read_to_string(dir.path().join("fb.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap().split(',').count(), 7);
    assert_eq!(lines.clone().count(), 65536 / 2);
    assert!(lines.all(|l| l.split(',').count() == 7));
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("fb.json")).unwrap()).unwrap();
    assert_eq!(meta["lambdas"].as_array().unwrap().len(), 7);
}

#[test]
fn decay_table_has_a_row_per_count_and_depth() {
    let dir = tempfile::tempdir().unwrap();
    let out = scatmask(&["decay", "--n", "1,2,4,8", "--depth", "4", "--out", "d.csv"], dir.path());
    assert!(out.status.success());
    let csv = std::fs::read_to_string(dir.path().join("d.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("N,depth,captured,residual"));
    assert_eq!(lines.count(), 16);
    assert!(dir.path().join("d.json").exists());
}

#[test]
fn masking_prints_kappa_and_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = scatmask(&["masking", "--a1", "2", "--a2", "2", "--out", "m.json"], dir.path());
    assert!(out.status.success());
    let printed = String::from_utf8(out.stdout).unwrap().trim().to_string();
    let text = std::fs::read_to_string(dir.path().join("m.json")).unwrap();
    assert!(text.contains(&format!("\"kappa_mean\":{printed}")));
    assert!(printed.parse::<f64>().unwrap() > 0.5);
    let report: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert!(!report["rows"].as_array().unwrap().is_empty());
}

#[test]
fn heatmap_cells_follow_axes() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["heatmap", "--amp-count", "2", "--gap-count", "3", "--gap-max", "0.25", "--out", "h.csv"];
    let out = scatmask(&args, dir.path());
    assert!(out.status.success());
    let csv = std::fs::read_to_string(dir.path().join("h.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("amp_ratio,freq_gap,kappa,dominant_lambda2,snapped_f2"));
    assert_eq!(lines.count(), 6);
}

#[test]
fn masking_without_probe_prints_near_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = scatmask(&["masking", "--a2", "0", "--out", "m.json"], dir.path());
    assert!(out.status.success());
    let kappa: f64 = String::from_utf8(out.stdout).unwrap().trim().parse().unwrap();
    assert!(kappa < 1e-3);
}
