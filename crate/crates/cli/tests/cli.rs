use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::{json, Value};
use tempfile::TempDir;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

struct Run {
    code: i32,
    stderr: String,
    out: PathBuf,
}

fn cornerlab(config: &Path, out: &Path, extra: &[&str]) -> Run {
    let o = Command::new(env!("CARGO_BIN_EXE_cornerlab"))
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(extra)
        .output()
        .unwrap();
    Run { code: o.status.code().unwrap(), stderr: String::from_utf8_lossy(&o.stderr).into_owned(), out: out.to_path_buf() }
}

/// Writes `cfg` into a fresh directory and runs it with output in `<dir>/out`.
fn run_value(cfg: &Value, extra: &[&str]) -> (TempDir, Run) {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("config.json");
    std::fs::write(&path, serde_json::to_string_pretty(cfg).unwrap()).unwrap();
    let r = cornerlab(&path, &dir.path().join("out"), extra);
    (dir, r)
}

fn csv_rows(path: &Path) -> Vec<BTreeMap<String, String>> {
    let mut rd = csv::Reader::from_path(path).unwrap();
    let header: Vec<String> = rd.headers().unwrap().iter().map(String::from).collect();
    rd.records().map(|r| header.iter().cloned().zip(r.unwrap().iter().map(String::from)).collect()).collect()
}

fn report(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

fn f(row: &BTreeMap<String, String>, k: &str) -> f64 {
    row[k].parse().unwrap()
}

#[test]
fn flat_cube_prism_row_has_zero_slack() {
    let dir = TempDir::new().unwrap();
    let r = cornerlab(&configs().join("prism_flat_cube.json"), dir.path(), &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let rows = csv_rows(&r.out.join("prism.csv"));
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0]["family"], "flat");
    assert!(f(&rows[0], "slack").abs() < 1e-3);
    assert_ne!(rows[0]["verdict"], "violated");
    let rep = report(&r.out);
    assert_eq!(rep["config"]["options"]["kappa"], 0.0);
    assert!(rep["config"].get("outputs").map_or(true, |o| o["dir"].is_null()));
    assert!(rep["result"].get("surface").is_none());
    assert!(r.out.join("surface.json").is_file() && r.out.join("alphas.csv").is_file());
}

#[test]
fn flat_sphere_trajectory_matches_the_closed_form() {
    let dir = TempDir::new().unwrap();
    let r = cornerlab(&configs().join("tube_flat_sphere.json"), dir.path(), &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let rows = csv_rows(&r.out.join("trajectory.csv"));
    assert!(rows.len() > 50);
    let radius = 1.0;
    for row in &rows {
        let t = f(row, "t");
        // inward flow: principal curvatures −1/(r − t) relative to the flow normal
        let want = 1.0 / (radius - t);
        for k in ["kappa_0", "kappa_1"] {
            assert!((f(row, k).abs() - want).abs() < 1e-8, "t={t}: {}", row[k]);
        }
        assert!((f(row, "g_00") - ((radius - t) / radius).powi(2)).abs() < 1e-8);
    }
    assert!((f(rows.last().unwrap(), "t") - 0.8).abs() < 1e-12);
}

#[test]
fn inverse_eps_law_for_a_concave_neighbour() {
    let dir = TempDir::new().unwrap();
    let r = cornerlab(&configs().join("glue_asymptotics.json"), dir.path(), &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let s = &report(&r.out)["summary"];
    assert!((s["exponent"].as_f64().unwrap() - 1.0).abs() < 0.05);
    assert_eq!(s["sign"], 1.0);
    let rows = csv_rows(&r.out.join("asymptotics.csv"));
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| f(r, "min_scal") > 0.0));
}

#[test]
fn every_shipped_config_is_valid() {
    for e in std::fs::read_dir(configs()).unwrap() {
        let p = e.unwrap().path();
        let text = std::fs::read_to_string(&p).unwrap();
        let cfg = cornerlab_cli::parse_config_str(&text).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
        if cfg.command != cornerlab_cli::Command::Sweep {
            cornerlab_cli::commands::prepare(&cfg, &configs()).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
        }
    }
}

#[test]
fn validation_errors_exit_1_with_a_path() {
    let (_d, r) = run_value(&json!({"command": "prism", "options": {"run": {"resolutoin": 8}}}), &[]);
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("options.run.resolutoin"), "{}", r.stderr);

    let (_d, r) = run_value(&json!({"command": "curv", "metric": {"family": "flat", "n": "three"}}), &[]);
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("metric"), "{}", r.stderr);

    let (_d, r) = run_value(&json!({"command": "curv", "metric": {"family": "grid", "path": "missing.json"}}), &[]);
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("metric.path") && r.stderr.contains("does not exist"), "{}", r.stderr);

    let (_d, r) = run_value(&json!({"command": "bubble", "metric": {"family": "flat", "n": 3}}), &[]);
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("domain"), "{}", r.stderr);

    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"command\": \"tube\",\n  \"options\": }").unwrap();
    let r = cornerlab(&bad, &dir.path().join("out"), &[]);
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("<config>:2:"), "{}", r.stderr);
}

#[test]
fn numeric_failures_exit_2() {
    let cfg = json!({
        "command": "tube",
        "options": {"initial": {"kind": "explicit", "gform": [[-1.0, 0.0], [0.0, 1.0]], "shapeop": [[0.0, 0.0], [0.0, 0.0]]}, "length": 1.0}
    });
    let (_d, r) = run_value(&cfg, &[]);
    assert_eq!(r.code, 2, "{}", r.stderr);
    assert!(r.stderr.contains("positive definite"), "{}", r.stderr);
}

fn concave_glue() -> Value {
    let warped = |rate: f64, t: [f64; 2]| {
        json!({"family": "warped", "base": {"family": "flat", "n": 2, "chart": {"lower": [-1.0, -1.0], "upper": [1.0, 1.0]}},
               "profile": {"kind": "exp", "rate": rate}, "t_range": t})
    };
    json!({
        "command": "glue",
        "metric": warped(-1.0, [-1.0, 0.5]),
        "domain": {"kind": "cube", "lower": [-0.5, -0.5, -0.5], "upper": [0.5, 0.5, 0.0]},
        "options": {"mode": "gluing", "face": 5, "second": {
            "metric": warped(1.0, [-0.5, 1.0]),
            "domain": {"kind": "cube", "lower": [-0.5, -0.5, 0.0], "upper": [0.5, 0.5, 0.5]},
            "face": 4
        }}
    })
}

#[test]
fn violated_verdicts_exit_3_only_in_check_mode() {
    let (_d, r) = run_value(&concave_glue(), &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let rep = report(&r.out);
    assert_eq!(rep["verdict"], "violated");
    assert!((rep["summary"]["inf_sum"].as_f64().unwrap() + 4.0).abs() < 1e-6);
    let (_d, r) = run_value(&concave_glue(), &["--check"]);
    assert_eq!(r.code, 3);
    let mut cfg = concave_glue();
    cfg["check"] = json!(true);
    assert_eq!(run_value(&cfg, &[]).1.code, 3);
}

#[test]
fn tolerance_scale_reaches_the_verdict() {
    let (_d, r) = run_value(&concave_glue(), &["--tolerance-scale", "10"]);
    assert_eq!(report(&r.out)["config"]["tolerance_scale"], 10.0);
    // −4 is far outside any sane budget, but the scale is applied to the glue tolerance
    assert_eq!(report(&r.out)["result"]["tolerance"], 1e-7);
    let (_d, r) = run_value(&concave_glue(), &["--tolerance-scale", "0"]);
    assert_eq!(r.code, 1);
}

fn files_of(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p.strip_prefix(dir).unwrap().to_path_buf(), std::fs::read(&p).unwrap());
            }
        }
    }
    out
}

fn seeded_sweep() -> Value {
    json!({
        "command": "sweep",
        "perturbation": {"amplitude": [0.0, 0.01], "wavenumber": [0.0, 1.5], "bowl": [0.1, 0.2], "bias": [-0.05, 0.0],
                         "center": [0.0, 0.0, 0.5], "chart": {"lower": [-1.5, -1.5, -0.5], "upper": [1.5, 1.5, 1.5]}},
        "options": {"per_axis": 3},
        "sweep": {"command": "curv", "axes": [{"parameter": "seed", "values": [3, 4, 5]}, {"parameter": "options.per_axis", "values": [2, 3]}]}
    })
}

#[test]
fn sweeps_write_per_job_files_and_one_summary() {
    let (_d, r) = run_value(&seeded_sweep(), &["--jobs", "3"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let rows = csv_rows(&r.out.join("summary.csv"));
    assert_eq!(rows.len(), 6);
    assert_eq!((rows[1]["seed"].as_str(), rows[1]["options.per_axis"].as_str()), ("3", "3"));
    assert_eq!(f(&rows[5], "samples"), 27.0);
    for j in 0..6 {
        let rep = report(&r.out.join(format!("jobs/job-{j:04}")));
        assert_eq!(rep["config"]["metric"]["family"], "perturbed-flat");
        assert_eq!(rep["config"]["command"], "curv");
    }
    // the seed alone fixes the draw
    let m = |j: usize| report(&r.out.join(format!("jobs/job-{j:04}")))["config"]["metric"].clone();
    assert_eq!(m(0), m(1));
    assert_ne!(m(0), m(2));
}

#[test]
fn sweep_failures_do_not_stop_siblings() {
    let cfg = json!({
        "command": "sweep",
        "options": {"initial": {"kind": "explicit", "gform": [[1.0, 0.0], [0.0, 1.0]], "shapeop": [[0.5, 0.0], [0.0, 0.5]]}, "length": 0.5},
        "sweep": {"command": "tube", "axes": [{"parameter": "options.initial.gform", "values": [
            [[1.0, 0.0], [0.0, 1.0]], [[-1.0, 0.0], [0.0, 1.0]], [[2.0, 0.0], [0.0, 2.0]]
        ]}]}
    });
    let (_d, r) = run_value(&cfg, &["--jobs", "2"]);
    assert_eq!(r.code, 2);
    let rows = csv_rows(&r.out.join("summary.csv"));
    let status: Vec<&str> = rows.iter().map(|r| r["status"].as_str()).collect();
    assert_eq!(status, ["ok", "failed", "ok"]);
    assert!(rows[1]["error"].contains("positive definite"));
    assert!(r.out.join("jobs/job-0002/trajectory.csv").is_file());
    assert!(!r.out.join("jobs/job-0001").exists());
}

#[test]
fn sweep_axes_must_name_declared_parameters() {
    let mut cfg = seeded_sweep();
    cfg["sweep"]["axes"][1]["parameter"] = json!("options.colour");
    let (_d, r) = run_value(&cfg, &[]);
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("sweep.axes.1.parameter"), "{}", r.stderr);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let (_a, r1) = run_value(&seeded_sweep(), &["--jobs", "1"]);
    let (_b, r2) = run_value(&seeded_sweep(), &["--jobs", "4"]);
    let (f1, f2) = (files_of(&r1.out), files_of(&r2.out));
    assert_eq!(f1.keys().collect::<Vec<_>>(), f2.keys().collect::<Vec<_>>());
    for (k, v) in &f1 {
        assert!(v == &f2[k], "{} differs", k.display());
    }
    let (_c, r3) = run_value(&seeded_sweep(), &["--seed", "99"]);
    assert_eq!(r3.code, 0);
}

#[test]
fn seed_flag_overrides_the_config() {
    let cfg = json!({
        "command": "curv",
        "perturbation": {"amplitude": [0.0, 0.01], "wavenumber": [0.0, 1.5]},
        "options": {"per_axis": 2}
    });
    let (_a, r1) = run_value(&cfg, &["--seed", "5"]);
    let mut c2 = cfg.clone();
    c2["seed"] = json!(5);
    let (_b, r2) = run_value(&c2, &[]);
    assert_eq!(std::fs::read(r1.out.join("report.json")).unwrap(), std::fs::read(r2.out.join("report.json")).unwrap());
    assert_eq!(report(&r1.out)["config"]["seed"], 5);
}

#[test]
fn develop_classifies_interfaces() {
    let dir = TempDir::new().unwrap();
    let r = cornerlab(&configs().join("develop_cosh_double.json"), dir.path(), &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let rep = report(&r.out);
    assert_eq!(rep["result"]["interfaces"][0]["class"], "c1");

    let flat = json!({
        "command": "develop",
        "metric": {"family": "flat", "n": 2, "chart": {"lower": [0.0, 0.0], "upper": [1.0, 1.0]}},
        "options": {"operation": "develop"}
    });
    let (_d, r) = run_value(&flat, &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let rep = report(&r.out);
    let faces = rep["result"]["interfaces"].as_array().unwrap();
    assert_eq!(faces.len(), 4);
    assert!(faces.iter().all(|f| f["class"] == "seamless"));
}

#[test]
fn bubble_writes_a_reusable_surface() {
    let dir = TempDir::new().unwrap();
    let r = cornerlab(&configs().join("bubble_flat_slice.json"), dir.path(), &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let s = &report(&r.out)["summary"];
    assert!((s["area"].as_f64().unwrap() - 1.0).abs() < 1e-6);
    assert!(s["interior_sup"].as_f64().unwrap() < 1e-2);

    // restart from the stored surface: already converged
    let cfg = json!({
        "command": "bubble",
        "metric": {"family": "flat", "n": 3, "chart": {"lower": [-0.5, -0.5, -0.5], "upper": [1.5, 1.5, 1.5]}},
        "domain": {"kind": "cube", "lower": [0.0, 0.0, 0.0], "upper": [1.0, 1.0, 1.0]},
        "options": {"resolution": 16, "init": {"kind": "file", "path": r.out.join("surface.json")}}
    });
    let (_d, r2) = run_value(&cfg, &[]);
    assert_eq!(r2.code, 0, "{}", r2.stderr);
    assert!(report(&r2.out)["summary"]["iterations"].as_u64().unwrap() <= 1);
}

#[test]
fn curvature_tables_cover_the_grid() {
    let dir = TempDir::new().unwrap();
    let r = cornerlab(&configs().join("curv_hyperbolic.json"), dir.path(), &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let rows = csv_rows(&r.out.join("curvature.csv"));
    assert_eq!(rows.len(), 64);
    for row in &rows {
        assert!((f(row, "scalar") + 6.0).abs() < 1e-4);
        // symmetric Ricci: upper triangle only
        assert_eq!(row.keys().filter(|k| k.starts_with("ricci_")).count(), 6);
    }
}
