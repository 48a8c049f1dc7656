use orthant_cli::{run_experiment, ExperimentConfig};
use orthant_lamperti::csvio::{read_map, read_skeleton};
use orthant_lamperti::lamperti::skeleton_distance;
use orthant_lamperti::verify::TestReport;
use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn orthant(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_orthant")).args(args).env_remove("ORTHANT_OUT_DIR").output().unwrap()
}

fn small_suite(seed: u64) -> ExperimentConfig {
    let text = fs::read_to_string(configs().join("symmetric_d2_suite.toml")).unwrap();
    let mut cfg = ExperimentConfig::parse(&text).unwrap();
    cfg.ensemble.n_paths = 1500;
    cfg.ensemble.seed = seed;
    cfg.tests.bins = 2;
    cfg
}

/// Relative path to contents, skipping the timestamped metadata.
fn bundle_bytes(root: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for e in fs::read_dir(dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else if p.file_name().unwrap() != "metadata.json" {
                out.insert(p.strip_prefix(root).unwrap().display().to_string(), fs::read(&p).unwrap());
            }
        }
    }
    out
}

#[test]
fn checked_in_configs_parse() {
    for e in fs::read_dir(configs()).unwrap() {
        let p = e.unwrap().path();
        let r = ExperimentConfig::load(&p);
        if p.file_name().unwrap() == "rejected_skorokhod.toml" {
            assert!(r.is_err());
        } else {
            let c = r.unwrap_or_else(|e| panic!("{}: {e:#}", p.display()));
            assert_eq!(ExperimentConfig::parse(&c.to_flat().unwrap()).unwrap(), c);
        }
    }
}

#[test]
fn cf_only_config_gives_one_passing_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = orthant(&["verify", "--config", configs().join("cf_quick.toml").to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let reports: Vec<TestReport> = serde_json::from_str(&fs::read_to_string(dir.path().join("reports.json")).unwrap()).unwrap();
    assert_eq!(reports.len(), 1);
    assert!(reports[0].pass);
    assert_eq!(fs::read_to_string(dir.path().join("failures.json")).unwrap().trim(), "[]");
}

#[test]
fn invalid_regime_is_rejected_with_failure_list() {
    let out = orthant(&["verify", "--config", configs().join("rejected_skorokhod.toml").to_str().unwrap(), "--out", "/nonexistent"]);
    assert_eq!(out.status.code(), Some(2));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let why = v["failures"][0]["summary"].as_str().unwrap();
    assert!(why.contains("spectrally positive"), "{why}");
}

#[test]
fn suite_is_deterministic_and_csvs_parse_back() {
    let cfg = small_suite(7);
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let ba = run_experiment(&cfg, a.path()).unwrap();
    run_experiment(&cfg, b.path()).unwrap();
    assert_eq!(bundle_bytes(a.path()), bundle_bytes(b.path()));
    // killing, power, two compensation functionals, corrective bins and survival
    assert_eq!(ba.reports.len(), 6);
    let back = ExperimentConfig::load(&a.path().join("config.toml")).unwrap();
    assert_eq!(back, cfg);
    for f in &ba.files {
        let name = f.file_name().unwrap().to_str().unwrap();
        if name.starts_with("ssmp_") {
            let z = read_skeleton(fs::File::open(f).unwrap()).unwrap();
            z.validate().unwrap();
        } else if name.starts_with("map_") {
            read_map(fs::File::open(f).unwrap()).unwrap().validate().unwrap();
        } else if name.ends_with(".details.csv") {
            let mut r = csv::Reader::from_path(f).unwrap();
            assert_eq!(&r.headers().unwrap()[0], "label");
            for rec in r.records() {
                let rec = rec.unwrap();
                rec[1].parse::<usize>().unwrap();
                for v in rec.iter().skip(2).take(5).filter(|v| !v.is_empty()) {
                    v.parse::<f64>().unwrap();
                }
                rec[7].parse::<bool>().unwrap();
            }
        } else if name.ends_with(".csv") {
            let mut r = csv::Reader::from_path(f).unwrap();
            assert!(!r.headers().unwrap().is_empty(), "{name} lacks a header");
            for rec in r.records() {
                assert!(rec.unwrap().iter().all(|v| v.parse::<f64>().is_ok()), "{name} has a non-numeric field");
            }
        }
    }
    let hazard = fs::read_to_string(a.path().join("plots/hazard.csv")).unwrap();
    assert!(hazard.starts_with("window,empirical,std_error,analytic"));
    assert!(a.path().join("plots/corrective_hist.csv").exists());
}

#[test]
fn other_seed_changes_the_bundle() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let mut cfg = small_suite(7);
    cfg.tests.select.truncate(1);
    run_experiment(&cfg, a.path()).unwrap();
    cfg.ensemble.seed = 8;
    run_experiment(&cfg, b.path()).unwrap();
    assert_ne!(fs::read(a.path().join("reports.json")).unwrap(), fs::read(b.path().join("reports.json")).unwrap());
}

/// CSV on stdout as a header and numeric rows.
fn table(out: &std::process::Output) -> (Vec<String>, Vec<Vec<f64>>) {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let mut r = csv::Reader::from_reader(out.stdout.as_slice());
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|rec| rec.unwrap().iter().map(|v| v.parse().unwrap()).collect()).collect();
    (header, rows)
}

#[test]
fn transform_subcommand_roundtrips_a_path() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = orthant(&["simulate", "--model", "killed", "--d", "3", "--start", "0.2,0.5,0.3", "--alpha", "1", "--rho", "0.5", "--paths", "1", "--out", d]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let ssmp = format!("{d}/paths/ssmp_0.csv");
    let map = format!("{d}/map.csv");
    let again = format!("{d}/again.csv");
    assert!(orthant(&["transform", "--direction", "to-map", "--alpha", "1", "--in", &ssmp, "--out", &map]).status.success());
    assert!(orthant(&["transform", "--direction", "to-ssmp", "--alpha", "1", "--in", &map, "--out", &again]).status.success());
    let a = read_skeleton(fs::File::open(&ssmp).unwrap()).unwrap();
    let b = read_skeleton(fs::File::open(&again).unwrap()).unwrap();
    assert_eq!(a.value(0), &[0.2, 0.5, 0.3]);
    assert!(skeleton_distance(&a, &b) <= 1e-9);
    assert_eq!(fs::read(format!("{d}/paths/map_0.csv")).unwrap(), fs::read(&map).unwrap());
}

#[test]
fn simulate_rejects_boundary_start_for_killed_model() {
    let out = orthant(&["simulate", "--model", "killed", "--start", "0,1", "--alpha", "1", "--rho", "0.5", "--out", "/nonexistent"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn analytics_subcommands() {
    let (h, rows) = table(&orthant(&["analytics", "q", "--alpha", "1", "--rho", "0.5", "--theta", "0.5,0.5"]));
    assert_eq!(h, ["closed_form", "quadrature"]);
    assert!((rows[0][0] - 4.0 / std::f64::consts::PI).abs() < 1e-12);
    assert!((rows[0][0] - rows[0][1]).abs() < 1e-8);
    let (h, rows) = table(&orthant(&["analytics", "sde", "--theta", "0.3,0.7"]));
    assert_eq!(h[0], "row");
    assert!((rows[0][5] * rows[0][6] - 2.0).abs() < 1e-12);
    let (h, rows) = table(&orthant(&["analytics", "corrective", "--alpha", "1", "--theta", "0.5,0.5", "--points", "11"]));
    assert_eq!(h, ["x", "density1", "density2"]);
    assert_eq!(rows.len(), 11);
    let (h, rows) = table(&orthant(&["analytics", "kernel", "--alpha", "1.5", "--rho", "0.5", "--theta", "0.3,0.7", "--from", "-1", "--to", "1", "--points", "5"]));
    assert_eq!(h, ["y", "density1", "density2"]);
    // y = 0 is singular and skipped; y = −1 lies beyond log(1 − 0.3) for coordinate 1 and kills.
    assert_eq!(rows.len(), 4);
    assert_eq!(rows[0][1], 0.0);
    assert!(rows[0][2] > 0.0);
    let (_, rows) = table(&orthant(&["analytics", "generator", "--model", "skorokhod-bm", "--function", "gaussian", "--x", "0.2", "--theta", "0.4,0.6"]));
    assert!(rows[0][3].is_finite());
    let lit = orthant(&["analytics", "generator", "--model", "skorokhod-stable", "--function", "gaussian", "--variant", "literal", "--x", "0", "--theta", "0.4,0.6"]);
    assert_eq!(lit.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&lit.stderr).contains("divergent"));
}

#[test]
fn report_exit_status_follows_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let pass = TestReport::moment("ok", 1.0, 0.1, 1.0, 10, 0.01);
    let fail = TestReport::moment("bad", 1.0, 0.1, 2.0, 10, 0.01);
    fs::write(dir.path().join("reports.json"), serde_json::to_string(&vec![pass.clone()]).unwrap()).unwrap();
    assert!(orthant(&["report", "--dir", d]).status.success());
    fs::write(dir.path().join("reports.json"), serde_json::to_string(&vec![pass, fail]).unwrap()).unwrap();
    let out = orthant(&["report", "--dir", d]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("\"name\": \"bad\""));
}
