use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use spinladder_cli::output::sha256_hex;

fn spinladder(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spinladder")).args(args).current_dir(cwd).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.display().to_string()
}

const SHORT: &str = "twice_s=20\nd=0.1\nhz=0\nh_ac=0.005\nprotocol=full-gqoab\nframe=lab\nt_max=20\nrecord_stride=10\n";

#[test]
fn simulate_writes_csv_and_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "short.cfg", SHORT);
    let out = tmp.path().join("run");
    let o = spinladder(&["simulate", "--config", &cfg, "--out", out.to_str().unwrap()], tmp.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));

    let mut names: Vec<String> =
        fs::read_dir(&out).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    names.sort();
    assert_eq!(names, ["manifest.json", "trajectory.csv"]);

    let csv = fs::read(out.join("trajectory.csv")).unwrap();
    let text = String::from_utf8(csv.clone()).unwrap();
    assert!(text.starts_with("t,sx,sy,sz,sf,stotal,norm\n0,0,0,10,100,110"));
    assert_eq!(text.lines().count(), 1 + 201);
    assert!(!text.contains('\r'));

    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["files"][0]["path"], "trajectory.csv");
    assert_eq!(manifest["files"][0]["sha256"], sha256_hex(&csv));
    assert_eq!(manifest["config"]["protocol"], "full-gqoab");
    assert_eq!(manifest["protocol_label"], "full-gqoab");
    assert!(manifest["convergence_report"].as_f64().unwrap() < 1e-6);
    assert!(manifest["wall_time_s"].as_f64().unwrap() >= 0.0);
}

#[test]
fn identical_configs_give_identical_bytes() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "short.cfg", SHORT);
    for dir in ["a", "b"] {
        let o = spinladder(
            &["simulate", "--config", &cfg, "--out", dir, "--populations", "--skip-convergence"],
            tmp.path(),
        );
        assert_eq!(o.status.code(), Some(0));
    }
    let a = fs::read(tmp.path().join("a/trajectory.csv")).unwrap();
    let b = fs::read(tmp.path().join("b/trajectory.csv")).unwrap();
    assert_eq!(a, b);
    assert!(String::from_utf8(a).unwrap().lines().next().unwrap().ends_with(",p_-9,p_-10"));
}

#[test]
fn single_resonance_extrema_round_to_levels() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "single.cfg",
        "twice_s=20\nd=0.1\nhz=0\nh_ac=0.005\nprotocol=single\nm_single=10\nt_max=3000\n",
    );
    let o = spinladder(&["simulate", "--config", &cfg, "--out", "run", "--skip-convergence"], tmp.path());
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(tmp.path().join("run/trajectory.csv")).unwrap();
    let sz: Vec<f64> = text.lines().skip(1).map(|l| l.split(',').nth(3).unwrap().parse().unwrap()).collect();
    let lo = sz.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = sz.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    assert_eq!(format!("{lo:.1}"), "9.0");
    assert_eq!(format!("{hi:.1}"), "10.0");
}

#[test]
fn default_output_directory_is_under_runs() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "short.cfg", SHORT);
    let o = spinladder(&["simulate", "--config", &cfg, "--skip-convergence"], tmp.path());
    assert_eq!(o.status.code(), Some(0));
    let runs: Vec<_> = fs::read_dir(tmp.path().join("runs")).unwrap().collect();
    assert_eq!(runs.len(), 1);
    let name = runs[0].as_ref().unwrap().file_name().into_string().unwrap();
    assert!(name.ends_with("-full-gqoab"), "{name}");
}

fn stderr_line(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).lines().last().unwrap_or_default().to_string()
}

#[test]
fn validation_failures_exit_1_with_line_numbers() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "bad.cfg", "twice_s=20\ncolour=blue\n");
    let o = spinladder(&["simulate", "--config", &cfg], tmp.path());
    assert_eq!(o.status.code(), Some(1));
    let line = stderr_line(&o);
    assert!(line.starts_with("error: kind=validation code=1 message=line 2: unknown key 'colour'"), "{line}");

    let o = spinladder(&["simulate"], tmp.path());
    assert_eq!(o.status.code(), Some(1));

    let pinned =
        write(tmp.path(), "pinned.cfg", &SHORT.replace("d=0.1", "d=0.5").replace("t_max=20", "t_max=20\ndt=0.01"));
    let o = spinladder(&["simulate", "--config", &pinned], tmp.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr_line(&o).contains("exceeds"), "{}", stderr_line(&o));
}

#[test]
fn missing_files_exit_4() {
    let tmp = tempfile::tempdir().unwrap();
    let o = spinladder(&["simulate", "--config", "nope.cfg"], tmp.path());
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr_line(&o).starts_with("error: kind=io code=4"));
    let o = spinladder(&["plot-script", "--csv", "nope.csv"], tmp.path());
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn sweep_writes_table_and_row_manifests() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "short.cfg", SHORT);
    let o =
        spinladder(&["sweep", "--config", &cfg, "--axis", "d", "--values", "0.1,-1,0.2", "--out", "sw"], tmp.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let table = fs::read_to_string(tmp.path().join("sw/sweep.csv")).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines.len(), 4);
    assert!(lines[1].starts_with("0.1,"));
    // 20 time units are far too short for a reversal, so the period is an error
    assert!(lines[1].contains("period not found") || lines[1].contains("search window"), "{}", lines[1]);
    assert!(lines[2].starts_with("-1,,"));
    for i in 0..3 {
        assert!(tmp.path().join(format!("sw/row_{i:03}/manifest.json")).exists());
    }
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("sw/manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["files"].as_array().unwrap().len(), 4);

    let o = spinladder(&["sweep", "--config", &cfg, "--axis", "colour", "--values", "1"], tmp.path());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn check_reports_per_criterion() {
    let tmp = tempfile::tempdir().unwrap();
    let o = spinladder(&["check", "--only", "6"], tmp.path());
    assert_eq!(o.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("[PASS] criterion  6 kernel-identity"), "{stdout}");
    assert!(stdout.contains("1 of 1 criteria passed"));

    let o = spinladder(&["check", "--only", "13"], tmp.path());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn plot_script_from_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "short.cfg", SHORT);
    assert_eq!(
        spinladder(&["simulate", "--config", &cfg, "--out", "r", "--skip-convergence"], tmp.path()).status.code(),
        Some(0)
    );
    let o = spinladder(&["plot-script", "--csv", "r/trajectory.csv", "--columns", "sx,sz"], tmp.path());
    assert_eq!(o.status.code(), Some(0));
    let script = String::from_utf8_lossy(&o.stdout);
    assert!(script.contains("S = 10"));
    assert!(script.contains("'r/trajectory.csv' skip 1 using 1:($4/S) with lines lw 3"));

    let o = spinladder(&["plot-script", "--csv", "r/trajectory.csv", "--columns", ""], tmp.path());
    assert_eq!(o.status.code(), Some(1));
    let o = spinladder(&["plot-script", "--csv", "r/trajectory.csv", "--columns", "bogus"], tmp.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr_line(&o).contains("unknown column 'bogus'"));
}
