use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn innosearch(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_innosearch"))
        .args(args)
        .env_remove("INNOSEARCH_WORKERS")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

/// Every numeric CSV cell equals its JSON twin to 1e-12.
fn assert_twins(dir: &Path, stem: &str) {
    let (header, rows) = read_csv(&dir.join(format!("{stem}.csv")));
    let json = read_json(&dir.join(format!("{stem}.json")));
    let columns: Vec<&str> = json["columns"].as_array().unwrap().iter().map(|c| c.as_str().unwrap()).collect();
    assert_eq!(header, columns);
    let jrows = json["rows"].as_array().unwrap();
    assert_eq!(rows.len(), jrows.len());
    for (row, jrow) in rows.iter().zip(jrows) {
        for (cell, j) in row.iter().zip(jrow.as_array().unwrap()) {
            if let (Ok(x), Some(y)) = (cell.parse::<f64>(), j.as_f64()) {
                assert!((x - y).abs() <= 1e-12 * x.abs().max(1.0), "{cell} vs {j}");
            }
        }
    }
}

#[test]
fn solve_writes_tables_plots_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("solve");
    let o = innosearch(&["solve", "--out", out.to_str().unwrap(), "--grid-size", "256", "--horizon", "30"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["value.csv", "value.json", "frontier.csv", "frontier.json", "frontier.svg", "value.svg", "summary.json"] {
        assert!(out.join(f).exists(), "{f}");
    }
    assert_twins(&out, "value");
    assert_twins(&out, "frontier");
    let (header, rows) = read_csv(&out.join("frontier.csv"));
    assert_eq!(header[0], "t");
    assert_eq!(rows.len(), 30);
    let summary = read_json(&out.join("summary.json"));
    assert_eq!(summary["status"], "ok");
    let w0 = summary["value_at_origin"].as_f64().unwrap();
    assert!((w0 - 0.32938).abs() < 1e-3, "{w0}");
    let svg = fs::read_to_string(out.join("frontier.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    assert!(!fs::read_to_string(out.join("value.csv")).unwrap().contains('\r'));
}

#[test]
fn format_selection_limits_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("csv_only");
    let o = innosearch(&["solve", "--out", out.to_str().unwrap(), "--grid-size", "128", "--format", "csv"]);
    assert_eq!(code(&o), 0);
    assert!(out.join("value.csv").exists());
    assert!(!out.join("value.json").exists());
    assert!(!out.join("frontier.svg").exists());
}

#[test]
fn no_search_instance_writes_marker() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("none");
    let o = innosearch(&["solve", "--out", out.to_str().unwrap(), "--p", "0.1", "--v", "1", "--c0", "0.2"]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).contains("no search optimal"));
    let summary = read_json(&out.join("summary.json"));
    assert_eq!(summary["reason"], "no search optimal");
    assert_eq!(summary["policy"], "empty");
}

#[test]
fn invalid_configuration_exits_2_with_field() {
    let dir = tempfile::tempdir().unwrap();
    let o = innosearch(&["solve", "--out", dir.path().to_str().unwrap(), "--grid-size", "0"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("grid_size"));

    let o = innosearch(&["solve", "--p", "not-a-number"]);
    assert_eq!(code(&o), 2);

    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "p = 0.5\ngrid = 100\n").unwrap();
    let o = innosearch(&["solve", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown key 'grid'"));
}

#[test]
fn config_file_with_command_line_override() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cfg");
    let cfg = dir.path().join("run.cfg");
    fs::write(
        &cfg,
        format!(
            "# logarithmic instance\np = 0.5\nv = 2\ncost_family = logarithmic\ngrid_size = 128\nout = {}\n",
            out.display()
        ),
    )
    .unwrap();
    let o = innosearch(&["solve", "--config", cfg.to_str().unwrap(), "--v", "3", "--format", "json"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let summary = read_json(&out.join("summary.json"));
    assert_eq!(summary["params"]["v"], 3.0);
    assert_eq!(summary["params"]["cost_family"], "logarithmic");
}

#[test]
fn nonconvergence_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("short.cfg");
    fs::write(&cfg, "max_iters = 2\ngrid_size = 128\n").unwrap();
    let o = innosearch(&["solve", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("sup-norm"));
}

#[test]
fn simulate_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = innosearch(&[
            "simulate", "--out", out.to_str().unwrap(), "--runs", "20000", "--seed", "42", "--horizon", "60",
            "--grid-size", "256",
        ]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        out
    };
    let (a, b) = (run("a"), run("b"));
    let bytes = |d: &Path| fs::read(d.join("simulate.csv")).unwrap();
    assert_eq!(bytes(&a), bytes(&b));
    assert_eq!(fs::read(a.join("active.svg")).unwrap(), fs::read(b.join("active.svg")).unwrap());
    assert_twins(&a, "simulate");
    let (header, rows) = read_csv(&a.join("simulate.csv"));
    let active = header.iter().position(|h| h == "active_fraction").unwrap();
    let half = header.iter().position(|h| h == "halfwidth_3sigma").unwrap();
    for row in &rows {
        let x: f64 = row[active].parse().unwrap();
        let h: f64 = row[half].parse().unwrap();
        assert!(x >= 0.5 - h);
    }
}

#[test]
fn simulate_single_period() {
    let dir = tempfile::tempdir().unwrap();
    let o = innosearch(&[
        "simulate", "--out", dir.path().to_str().unwrap(), "--runs", "100", "--horizon", "1", "--grid-size", "128",
    ]);
    assert_eq!(code(&o), 0);
    let (_, rows) = read_csv(&dir.path().join("simulate.csv"));
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][1].parse::<f64>().unwrap(), 1.0);
}

#[test]
fn oracle_reports_structure_and_budget() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("oracle");
    let o = innosearch(&["oracle", "--out", out.to_str().unwrap(), "--slots", "6", "--horizon", "3", "--grid-size", "256"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let s = read_json(&out.join("oracle_summary.json"));
    for flag in ["no_gaps", "increasing_order", "no_breaks"] {
        assert_eq!(s[flag], true, "{flag}");
    }
    assert_twins(&out, "oracle");

    let o = innosearch(&["oracle", "--out", out.to_str().unwrap(), "--slots", "20", "--horizon", "5"]);
    assert_eq!(code(&o), 4);

    let costly = dir.path().join("costly");
    let o = innosearch(&[
        "oracle", "--out", costly.to_str().unwrap(), "--slots", "4", "--horizon", "2", "--c0", "1.5",
    ]);
    assert_eq!(code(&o), 0);
    let s = read_json(&costly.join("oracle_summary.json"));
    assert_eq!(s["assignment"], "[never,never,never,never]");
    assert_eq!(s["value"], 0.0);
    assert_eq!(s["no_gaps"], true);
}

fn sweep_rows(out: &Path) -> Vec<Value> {
    read_json(&out.join("sweep.json"))["rows"].as_array().unwrap().clone()
}

#[test]
fn sweep_over_prize_is_monotone() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep");
    let o = innosearch(&[
        "sweep", "--out", out.to_str().unwrap(), "--param", "v", "--values", "1,2,4", "--grid-size", "256",
        "--horizon", "20", "--workers", "2",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let w: Vec<f64> = sweep_rows(&out).iter().map(|r| r[4].as_f64().unwrap()).collect();
    assert_eq!(w.len(), 3);
    assert!(w.windows(2).all(|p| p[1] >= p[0]), "{w:?}");
    assert!(out.join("instances").read_dir().unwrap().count() == 3);
    assert_twins(&out, "sweep");
}

#[test]
fn single_value_sweep_matches_solve() {
    let dir = tempfile::tempdir().unwrap();
    let sweep = dir.path().join("sweep");
    let solve = dir.path().join("solve");
    let args = ["--grid-size", "256", "--horizon", "20", "--format", "json"];
    let mut a = vec!["sweep", "--out", sweep.to_str().unwrap(), "--param", "delta", "--values", "0.9"];
    a.extend(args);
    assert_eq!(code(&innosearch(&a)), 0);
    let mut b = vec!["solve", "--out", solve.to_str().unwrap()];
    b.extend(args);
    assert_eq!(code(&innosearch(&b)), 0);
    let row = &sweep_rows(&sweep)[0];
    let summary = read_json(&solve.join("summary.json"));
    assert_eq!(row[4], summary["value_at_origin"]);
    assert_eq!(row[5], summary["first_boundary"]);
}

#[test]
fn scale_sweep_is_homogeneous() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("scale");
    let o = innosearch(&[
        "sweep", "--out", out.to_str().unwrap(), "--param", "scale", "--values", "1,10", "--grid-size", "256",
        "--tol", "1e-12", "--horizon", "10",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows = sweep_rows(&out);
    let (w1, w10) = (rows[0][4].as_f64().unwrap(), rows[1][4].as_f64().unwrap());
    assert!((w10 / w1 - 10.0).abs() < 1e-8, "{w1} {w10}");
    let (b1, b10) = (rows[0][5].as_f64().unwrap(), rows[1][5].as_f64().unwrap());
    assert!((b1 - b10).abs() < 1e-8, "{b1} {b10}");
}

#[test]
fn sweep_range_and_all_failed() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("range");
    let o = innosearch(&[
        "sweep", "--out", out.to_str().unwrap(), "--param", "p", "--range", "0.3,0.7,3", "--grid-size", "128",
        "--horizon", "5", "--format", "csv",
    ]);
    assert_eq!(code(&o), 0);
    let (_, rows) = read_csv(&out.join("sweep.csv"));
    let values: Vec<f64> = rows.iter().map(|r| r[2].parse().unwrap()).collect();
    assert_eq!(values, vec![0.3, 0.5, 0.7]);

    let cfg = dir.path().join("short.cfg");
    fs::write(&cfg, "max_iters = 1\ngrid_size = 128\n").unwrap();
    let failing = dir.path().join("fail");
    let o = innosearch(&[
        "sweep", "--config", cfg.to_str().unwrap(), "--out", failing.to_str().unwrap(), "--param", "v",
        "--values", "2,3",
    ]);
    assert_eq!(code(&o), 3);
    let (_, rows) = read_csv(&failing.join("sweep.csv"));
    assert!(rows.iter().all(|r| r[3] == "error"));

    let o = innosearch(&["sweep", "--out", failing.to_str().unwrap(), "--param", "p", "--values", "1.5"]);
    assert_eq!(code(&o), 2);
    let o = innosearch(&["sweep", "--param", "gamma", "--values", "1"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn workers_variable_validated() {
    let o = Command::new(env!("CARGO_BIN_EXE_innosearch"))
        .args(["solve", "--grid-size", "0"])
        .env("INNOSEARCH_WORKERS", "0")
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
}
