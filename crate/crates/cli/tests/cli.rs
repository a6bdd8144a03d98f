use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn pvlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pvlab"))
        .args(args)
        .env_remove("PVLAB_THREADS")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap_or(-1)
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

const SMALL: &[&str] = &["--config", "ball-d2", "--lambda-grid", "400,500,600,800", "--replicates", "3"];

fn simulate(dir: &Path, threads: &str) -> Output {
    let out = dir.to_str().unwrap();
    let mut args = vec!["simulate"];
    args.extend_from_slice(SMALL);
    args.extend_from_slice(&["--out", out, "--threads", threads]);
    pvlab(&args)
}

#[test]
fn lists_and_prints_bundled_configs() {
    let o = pvlab(&["configs"]);
    assert_eq!(code(&o), 0);
    let names = String::from_utf8(o.stdout).unwrap();
    for n in ["ball-d2", "ball-d3", "square-d2", "iterate-ball-d2"] {
        assert!(names.lines().any(|l| l == n), "{names}");
    }
    let o = pvlab(&["configs", "square-d2"]);
    assert!(String::from_utf8(o.stdout).unwrap().contains("half_widths"));
}

#[test]
fn simulate_writes_hashed_outputs_independent_of_threads() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let o = simulate(a.path(), "1");
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(code(&simulate(b.path(), "2")), 0);

    let csv_a = fs::read_to_string(a.path().join("replicates.csv")).unwrap();
    assert_eq!(csv_a, fs::read_to_string(b.path().join("replicates.csv")).unwrap());
    assert_eq!(csv_a.lines().count(), 2 + 4 * 3);

    let m = json(&a.path().join("manifest.json"));
    let hash = m["config_hash"].as_str().unwrap();
    assert_eq!(hash.len(), 64);
    assert_eq!(m["command"], "simulate");
    assert_eq!(m["threads"], 1);
    assert!(csv_a.lines().next().unwrap().starts_with("# pvlab-table") && csv_a.contains(hash));
    let summary = json(&a.path().join("summary.json"));
    assert_eq!(summary["config_hash"], hash);
    assert_eq!(summary["data"]["groups"].as_array().unwrap().len(), 4);
    let files: Vec<&str> = m["files"].as_array().unwrap().iter().map(|f| f["path"].as_str().unwrap()).collect();
    for f in ["config.toml", "replicates.csv", "summary.json"] {
        assert!(files.contains(&f), "{files:?}");
    }
    // Three replicates are too few for the configured fits.
    assert!(stderr(&o).contains("skipping fit"));
}

#[test]
fn fit_and_report_post_process_a_run() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(code(&simulate(d.path(), "1")), 0);
    let table = d.path().join("replicates.csv");
    let o = pvlab(&[
        "fit",
        "--table",
        table.to_str().unwrap(),
        "--statistic",
        "face_count_0",
        "--min-replicates",
        "3",
        "--bootstrap",
        "50",
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let line: Value = serde_json::from_slice(&o.stdout).unwrap();
    let slope = line["slope"].as_f64().unwrap();
    assert!((0.0..1.0).contains(&slope), "{slope}");
    let fit = json(&d.path().join("fit_face_count_0_mean.json"));
    assert_eq!(fit["kind"], "fit");
    assert!(fs::read_to_string(d.path().join("plot_face_count_0_mean.svg")).unwrap().contains("<svg"));

    let o = pvlab(&["report", "--dir", d.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let md = fs::read_to_string(d.path().join("report.md")).unwrap();
    assert!(md.contains("face_count_0") && md.contains("plot_face_count_0_mean.svg"));
    let m = json(&d.path().join("manifest.json"));
    let files: Vec<&str> = m["files"].as_array().unwrap().iter().map(|f| f["path"].as_str().unwrap()).collect();
    assert!(files.contains(&"report.json") && files.contains(&"fit_face_count_0_mean.json"), "{files:?}");

    let o = pvlab(&["fit", "--table", table.to_str().unwrap(), "--statistic", "no_such_column"]);
    assert_eq!(code(&o), 1, "{}", stderr(&o));
}

#[test]
fn config_errors_exit_with_one_and_point_at_the_line() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path().join("bad.toml");
    fs::write(
        &p,
        "name = \"bad\"\ndim = 2\nlambda_grid = [500.0]\nreplicats = 3\n\n[shape]\nkind = \"ball\"\ncenter = [0.0, 0.0]\nradius = 0.25\n",
    )
    .unwrap();
    let o = pvlab(&["simulate", "--config", p.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    let e = stderr(&o);
    assert!(e.contains("bad.toml:4:1") && e.contains("did you mean `replicates`"), "{e}");

    assert_eq!(code(&pvlab(&["simulate"])), 1);
    assert_eq!(code(&pvlab(&["simulate", "--config", "no-such-config"])), 1);
    // Lambda too small for the margin policy.
    let mut args = vec!["simulate", "--config", "ball-d2", "--lambda-grid", "10,20,30,40"];
    args.extend_from_slice(&["--out", d.path().to_str().unwrap()]);
    assert_eq!(code(&pvlab(&args)), 1);
}

#[test]
fn tainted_runs_exit_with_three_and_are_flagged() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path().join("big.toml");
    let out = d.path().join("out");
    fs::write(
        &p,
        format!(
            "name = \"big\"\ndim = 2\nlambda_grid = [40.0]\nreplicates = 4\nmargin_multiple = 0.1\n\n\
             [shape]\nkind = \"ball\"\ncenter = [0.0, 0.0]\nradius = 0.48\n\n[output]\ndir = {:?}\n",
            out.to_str().unwrap()
        ),
    )
    .unwrap();
    let o = pvlab(&["simulate", "--config", p.to_str().unwrap()]);
    assert_eq!(code(&o), 3, "{}", stderr(&o));
    let m = json(&out.join("manifest.json"));
    assert_eq!(m["experiments"][0]["tainted"], true);
    assert_eq!(json(&out.join("summary.json"))["data"]["tainted"], true);
}

#[test]
fn constants_report_value_error_and_convergence() {
    let d = tempfile::tempdir().unwrap();
    let o = pvlab(&[
        "constants",
        "--score",
        "surface,signed_volume",
        "--lateral",
        "10",
        "--half-height",
        "5",
        "--replicates",
        "20",
        "--out",
        d.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let est: Value = serde_json::from_slice(&o.stdout).unwrap();
    let s = &est[0];
    assert_eq!(s["score_kind"], "surface");
    assert!(s["value"].as_f64().unwrap() > 0.5 && s["std_error"].as_f64().unwrap() > 0.0);
    assert!(s["convergence_flag"].is_boolean());
    let file = json(&d.path().join("constants.json"));
    assert_eq!(file["data"].as_array().unwrap().len(), 2);
    assert_eq!(file["config_hash"].as_str().unwrap().len(), 64);

    assert_eq!(code(&pvlab(&["constants", "--score", "face_count_2"])), 1);
    assert_eq!(code(&pvlab(&["constants", "--score", "bogus"])), 1);
}

#[test]
fn iterate_records_every_depth() {
    let d = tempfile::tempdir().unwrap();
    let o = pvlab(&[
        "iterate",
        "--config",
        "iterate-ball-d2",
        "--replicates",
        "2",
        "--lambda-grid",
        "500",
        "--c2",
        "1.276",
        "--c2-se",
        "0.002",
        "--out",
        d.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = fs::read_to_string(d.path().join("replicates.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2 + 2 * 3);
    let header: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    let it = header.iter().position(|h| *h == "iteration").unwrap();
    let depths: Vec<&str> = csv.lines().skip(2).map(|l| l.split(',').nth(it).unwrap()).collect();
    assert_eq!(depths, ["1", "2", "3", "1", "2", "3"]);
    // Two replicates are too few for the prediction test, which says so.
    assert!(stderr(&o).contains("replicates"), "{}", stderr(&o));
}

#[test]
fn zone_and_maxima_switch_their_statistics_on() {
    for cmd in ["zone", "maxima"] {
        let d = tempfile::tempdir().unwrap();
        let mut args = vec![cmd];
        args.extend_from_slice(&["--config", "square-d2", "--lambda-grid", "500,600,700,800", "--replicates", "2"]);
        args.extend_from_slice(&["--out", d.path().to_str().unwrap()]);
        let o = pvlab(&args);
        assert_eq!(code(&o), 0, "{cmd}: {}", stderr(&o));
        let csv = fs::read_to_string(d.path().join("replicates.csv")).unwrap();
        let col = if cmd == "zone" { "zone_complexity" } else { "maximal_points" };
        let header: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
        let k = header.iter().position(|h| *h == col).unwrap();
        for l in csv.lines().skip(2) {
            let v: f64 = l.split(',').nth(k).unwrap().parse().unwrap();
            assert!(v > 0.0, "{cmd}: {l}");
        }
    }
}

#[test]
fn selftest_passes() {
    let o = pvlab(&["selftest"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().count(), 7);
    assert!(text.lines().all(|l| l.starts_with("ok")), "{text}");
}
