use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use potmask_core::image::write_mask_pgm;
use potmask_core::io::{write_feature_file, write_weight_file};
use potmask_core::synthetic::{disk_image, DiskParams};

fn potmask(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_potmask"))
        .args(args)
        .output()
        .expect("binary runs")
}

/// Writes a disk instance as `<name>.feat`, `<name>.w` and `<name>_gt.pgm`.
fn write_disk(dir: &Path, name: &str, seed: u64) {
    let img = disk_image(&DiskParams {
        seed,
        ..DiskParams::default()
    });
    write_feature_file(&img.features, dir.join(format!("{name}.feat"))).unwrap();
    write_weight_file(&img.weights, dir.join(format!("{name}.w"))).unwrap();
    write_mask_pgm(&img.truth, dir.join(format!("{name}_gt.pgm"))).unwrap();
}

fn report_lines(path: &Path) -> Vec<String> {
    fs::read_to_string(path).unwrap().lines().map(str::to_owned).collect()
}

#[test]
fn run_writes_outputs_and_report() {
    let dir = tempfile::tempdir().unwrap();
    write_disk(dir.path(), "a", 1);
    write_disk(dir.path(), "b", 2);
    fs::write(
        dir.path().join("manifest.txt"),
        "# two disks\na.feat a.w out/a a_gt.pgm\nb.feat b.w out/b\n",
    )
    .unwrap();
    fs::create_dir(dir.path().join("out")).unwrap();
    let report = dir.path().join("report.csv");
    let out = potmask(&[
        "run",
        "--manifest",
        dir.path().join("manifest.txt").to_str().unwrap(),
        "--report",
        report.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let lines = report_lines(&report);
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("image_id,status,rounds"));
    assert!(lines[1].contains(",ok,"));
    let iou: f64 = lines[1].rsplit(',').next().unwrap().parse().unwrap();
    assert!(iou >= 0.95, "{}", lines[1]);
    assert!(lines[2].ends_with(",,,"), "no ground truth, no metrics: {}", lines[2]);
    for name in ["a_mask.pgm", "a_map.pgm", "b_mask.pgm", "b_map.pgm"] {
        assert!(dir.path().join("out").join(name).exists(), "{name}");
    }
}

#[test]
fn bad_entry_fails_alone() {
    let dir = tempfile::tempdir().unwrap();
    write_disk(dir.path(), "a", 1);
    fs::write(
        dir.path().join("m.txt"),
        "missing.feat a.w x\na.feat a.w y\n",
    )
    .unwrap();
    let report = dir.path().join("r.csv");
    let out = potmask(&[
        "run",
        "--manifest",
        dir.path().join("m.txt").to_str().unwrap(),
        "--report",
        report.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let lines = report_lines(&report);
    assert!(lines[1].contains("failed"), "{}", lines[1]);
    assert!(lines[2].contains(",ok,"), "{}", lines[2]);
    assert!(dir.path().join("y_mask.pgm").exists());
}

#[test]
fn empty_manifest_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("m.txt"), "").unwrap();
    let out = potmask(&["run", "--manifest", dir.path().join("m.txt").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 1);
}

#[test]
fn config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = dir.path().join("m.txt");
    fs::write(&manifest, "").unwrap();
    let m = manifest.to_str().unwrap();
    let cfg = dir.path().join("c.txt");
    fs::write(&cfg, "tau=1.5\n").unwrap();
    let out = potmask(&["run", "--manifest", m, "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("tau"));

    fs::write(&cfg, "colour=blue\n").unwrap();
    assert_eq!(potmask(&["run", "--manifest", m, "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(potmask(&["run", "--manifest", m, "--k", "many"]).status.code(), Some(2));
    assert_eq!(potmask(&["run", "--manifest", m, "--bogus"]).status.code(), Some(2));

    fs::write(&manifest, "only_one_field\n").unwrap();
    let out = potmask(&["run", "--manifest", m]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 1"));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    write_disk(dir.path(), "a", 1);
    fs::write(dir.path().join("m.txt"), "a.feat a.w a\n").unwrap();
    let cfg = dir.path().join("c.txt");
    fs::write(&cfg, "rounds=2\n").unwrap();
    let manifest = dir.path().join("m.txt");
    let run = |extra: &[&str]| {
        let mut args = vec!["run", "--manifest", manifest.to_str().unwrap(), "--config", cfg.to_str().unwrap()];
        args.extend(extra);
        let out = potmask(&args);
        assert_eq!(out.status.code(), Some(0));
        let text = String::from_utf8(out.stdout).unwrap();
        text.lines().nth(1).unwrap().split(',').nth(2).unwrap().to_owned()
    };
    assert_eq!(run(&[]), "2");
    assert_eq!(run(&["--rounds", "1"]), "1");
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    write_disk(dir.path(), "a", 3);
    fs::write(dir.path().join("m.txt"), "a.feat a.w first\na.feat a.w second\n").unwrap();
    let out = potmask(&["run", "--manifest", dir.path().join("m.txt").to_str().unwrap(), "--seed", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let read = |n: &str| fs::read(dir.path().join(n)).unwrap();
    assert_eq!(read("first_mask.pgm"), read("second_mask.pgm"));
    assert_eq!(read("first_map.pgm"), read("second_map.pgm"));
}

#[test]
fn eval_scores_prediction_directory() {
    let dir = tempfile::tempdir().unwrap();
    let (pred, gt) = (dir.path().join("pred"), dir.path().join("gt"));
    fs::create_dir_all(&pred).unwrap();
    fs::create_dir_all(&gt).unwrap();
    let truth = disk_image(&DiskParams::default()).truth;
    write_mask_pgm(&truth, pred.join("x.pgm")).unwrap();
    write_mask_pgm(&truth, gt.join("x.pgm")).unwrap();
    let report = dir.path().join("eval.csv");
    let out = potmask(&[
        "eval",
        "--pred-dir",
        pred.to_str().unwrap(),
        "--gt-dir",
        gt.to_str().unwrap(),
        "--report",
        report.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report_lines(&report), ["image_id,status,mae,f_beta,iou", "x.pgm,ok,0,1,1"]);

    write_mask_pgm(&truth, pred.join("orphan.pgm")).unwrap();
    let out = potmask(&["eval", "--pred-dir", pred.to_str().unwrap(), "--gt-dir", gt.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn oracle_harness() {
    let out = potmask(&["oracle", "--n", "4", "--p", "3", "--trials", "20"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("trials=20") && text.contains("failed=0"), "{text}");
    assert_eq!(potmask(&["oracle", "--n", "9", "--p", "8"]).status.code(), Some(2));
}
