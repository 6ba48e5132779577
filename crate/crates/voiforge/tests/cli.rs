use std::path::Path;
use std::process::{Command, Output};

use voiforge::nrrd::{read_mask, write_image};
use voiforge::tables::read_feature_csv;
use voiforge_core::{Geometry, ImageVolume};

fn voiforge(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_voiforge")).args(args).current_dir(cwd).output().unwrap()
}

fn ok(args: &[&str], cwd: &Path) -> String {
    let out = voiforge(args, cwd);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn code(args: &[&str], cwd: &Path) -> i32 {
    voiforge(args, cwd).status.code().unwrap()
}

const SPEC: &str = r#"{
  "schema_version": 1,
  "n_subjects": 20,
  "dims": [22, 22, 22],
  "radius_mm": 5,
  "signal": {"intensity": 2},
  "seed": 8
}"#;

#[test]
fn cohort_workflow_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("spec.json"), SPEC).unwrap();
    ok(&["phantom", "--spec", "spec.json", "--out", "cohort"], d);
    assert!(d.join("cohort/manifest.csv").is_file());

    ok(&["extract", "--manifest", "cohort/manifest.csv", "--out", "base.csv"], d);
    ok(&["extract", "--manifest", "cohort/manifest.csv", "--modify", "erode1", "--out", "e1.csv"], d);
    let base = read_feature_csv(&d.join("base.csv")).unwrap();
    assert_eq!((base.n_subjects(), base.n_features()), (20, 102));
    assert_eq!(base.labels.iter().filter(|&&l| l == 1).count(), 10);

    ok(&["icc", "--baseline", "base.csv", "--modified", "e1.csv", "--out", "icc.csv", "--plot", "icc.svg"], d);
    let icc = std::fs::read_to_string(d.join("icc.csv")).unwrap();
    assert!(icc.starts_with("feature_name,category,icc,flag\n"));
    assert_eq!(icc.lines().count(), 103);
    assert!(std::fs::read_to_string(d.join("icc.svg")).unwrap().starts_with("<svg"));

    std::fs::write(
        d.join("sel.json"),
        r#"{"schema_version": 1, "methods": ["FScore", "SFS"], "gini_trees": 10}"#,
    )
    .unwrap();
    let printed = ok(&["select", "--features", "base.csv", "--config", "sel.json", "--out", "selection.json"], d);
    assert!(printed.starts_with("1. "));
    ok(&["train", "--features", "base.csv", "--selection", "selection.json", "--budget", "5", "--out", "model.json"], d);
    let eval = ok(&["evaluate", "--model", "model.json", "--features", "e1.csv", "--out", "eval.json"], d);
    assert!(eval.starts_with("AUC "));
    let json = std::fs::read_to_string(d.join("model.json")).unwrap();
    assert!(json.starts_with("{\n  \"schema_version\": 1"));
}

#[test]
fn perturb_writes_mask_and_surface() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("spec.json"), SPEC).unwrap();
    ok(&["phantom", "--spec", "spec.json", "--out", "c"], d);
    let input = d.join("c/masks/P000.nrrd");
    let before = read_mask(&input).unwrap().count();
    ok(&["perturb", "--op", "dilate", "--mm", "1", "--in", "c/masks/P000.nrrd", "--out", "d1.nrrd"], d);
    assert!(read_mask(&d.join("d1.nrrd")).unwrap().count() > before);
    ok(&["perturb", "--op", "erode", "--mm", "2", "--in", "c/masks/P000.nrrd", "--out", "e2.nrrd"], d);
    assert!(read_mask(&d.join("e2.nrrd")).unwrap().count() < before);
    for op in ["randomize", "ellipsoid"] {
        let args = ["perturb", "--op", op, "--seed", "3", "--in", "c/masks/P000.nrrd", "--out", "p.nrrd", "--stl", "p.stl"];
        ok(&args, d);
        let stl = std::fs::read_to_string(d.join("p.stl")).unwrap();
        assert!(stl.starts_with("solid voiforge\n") && stl.contains("facet normal"));
        assert!(read_mask(&d.join("p.nrrd")).unwrap().count() > 0);
    }
    ok(&["extract", "--image", "c/images/P000.nrrd", "--mask", "d1.nrrd", "--out", "one.csv", "--label", "1"], d);
    let one = read_feature_csv(&d.join("one.csv")).unwrap();
    assert_eq!((one.subjects[0].as_str(), one.labels[0]), ("P000", 1));
}

#[test]
fn exit_codes_separate_config_from_data_errors() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("noversion.json"), r#"{"n_subjects": 20}"#).unwrap();
    assert_eq!(code(&["phantom", "--spec", "noversion.json", "--out", "x"], d), 2);
    std::fs::write(d.join("small.json"), r#"{"schema_version": 1, "n_subjects": 5}"#).unwrap();
    assert_eq!(code(&["phantom", "--spec", "small.json", "--out", "x"], d), 2);
    std::fs::write(d.join("unknown.json"), r#"{"schema_version": 1, "phantom": {}, "colour": 3}"#).unwrap();
    assert_eq!(code(&["run", "--config", "unknown.json"], d), 2);
    assert_eq!(code(&["run", "--config", "missing.json"], d), 2);

    let g = Geometry::new([4; 3], [1.0; 3], [0.0; 3]).unwrap();
    write_image(&ImageVolume::new(g, (0..64).map(|i| (i % 3) as f64).collect()).unwrap(), &d.join("img.nrrd")).unwrap();
    assert_eq!(code(&["perturb", "--op", "dilate", "--in", "img.nrrd", "--out", "o.nrrd"], d), 3);
    assert_eq!(code(&["perturb", "--op", "dilate", "--mm", "-1", "--in", "img.nrrd", "--out", "o.nrrd"], d), 2);

    std::fs::write(d.join("spec.json"), SPEC).unwrap();
    ok(&["phantom", "--spec", "spec.json", "--out", "c"], d);
    assert_eq!(code(&["extract", "--manifest", "c/manifest.csv", "--modify", "melt", "--out", "f.csv"], d), 2);
    assert_eq!(code(&["report", "--record", "c/manifest.csv", "--out", "r"], d), 3);
    assert!(!d.join("r").exists());
}
