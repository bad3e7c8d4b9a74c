use std::fs;
use std::process::{Command, Output};

fn vne(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vne")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn tmp(name: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("vne-cli-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn entropy_json_has_required_fields() {
    let o = vne(&["entropy", "--gen", "grid2d:12", "--method", "probing", "--eps", "1e-3"]);
    assert!(o.status.success());
    let r: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    for key in ["matrix", "n", "nnz", "method", "eps_rel", "value", "d", "colors", "poly_iters", "rat_iters", "factorizations", "wall_time_s"] {
        assert!(r.get(key).is_some(), "missing {key}");
    }
    assert_eq!(r["n"], 144);
    assert_eq!(r["method"], "probing");
}

#[test]
fn stochastic_report_carries_seed_and_counts() {
    let o = vne(&["entropy", "--gen", "grid2d:10", "--method", "hutchpp", "--eps", "1e-1", "--seed", "3"]);
    assert!(o.status.success());
    let r: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(r["seed"], 3);
    assert!(r["N_H"].as_u64().unwrap() > 0);
    assert!(r.get("delta").is_some());
}

#[test]
fn exit_codes() {
    let missing = vne(&["entropy", "--in", "/nonexistent/matrix.mtx"]);
    assert_eq!(missing.status.code(), Some(1));

    let bad_mtx = tmp("bad.mtx");
    fs::write(&bad_mtx, "%%MatrixMarket matrix coordinate real symmetric\n3 3 1\n1 x 2\n").unwrap();
    assert_eq!(vne(&["entropy", "--in", bad_mtx.to_str().unwrap()]).status.code(), Some(1));

    let budget = vne(&["entropy", "--gen", "grid2d:20", "--method", "hutchinson", "--eps", "1e-3", "--max-vectors", "5"]);
    assert_eq!(budget.status.code(), Some(2));

    assert_eq!(vne(&["entropy", "--gen", "grid2d:5", "--eps", "2"]).status.code(), Some(3));
    assert_eq!(vne(&["entropy", "--gen", "grid2d:5", "--method", "magic"]).status.code(), Some(3));
    assert_eq!(vne(&["entropy"]).status.code(), Some(3));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let cfg = tmp("run.conf");
    fs::write(&cfg, "# defaults\ngen = grid2d:8\nmethod = hutchpp\neps = 0.1\nseed = 5\n").unwrap();
    let path = cfg.to_str().unwrap();

    let r: serde_json::Value = serde_json::from_str(&stdout(&vne(&["entropy", "--config", path]))).unwrap();
    assert_eq!(r["method"], "hutchpp");
    assert_eq!(r["seed"], 5);

    let o = vne(&["entropy", "--config", path, "--method", "probing", "--eps", "1e-3"]);
    let r: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(r["method"], "probing");
    assert_eq!(r["eps_rel"], 1e-3);
}

#[test]
fn bounds_csv_matches_closed_form() {
    let o = vne(&["bounds", "--a", "0", "--b", "1", "--k-min", "2", "--k-max", "4", "--oracle"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "k,cheb_bound,thm22_bound,oracle");
    let first: Vec<f64> = lines.next().unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!(first[0], 2.0);
    assert!((first[1] - 1.0 / 12.0).abs() < 1e-15);
    assert!(first[2] <= first[1]);
}

#[test]
fn color_stats_reports_valid_coloring() {
    let o = vne(&["color-stats", "--gen", "grid2d:30", "--d", "2"]);
    assert!(o.status.success());
    let r: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(r["validated"], true);
    assert_eq!(r["s"], 7);
    assert!(r["max_class"].as_u64() >= r["min_class"].as_u64());
}

#[test]
fn probing_sweep_errors_stay_under_bound() {
    let o = vne(&["probing-sweep", "--gen", "grid2d:12", "--d-max", "6"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let headers = rdr.headers().unwrap().clone();
    let col = |name: &str| headers.iter().position(|h| h == name).unwrap();
    let (err, bound) = (col("error"), col("bound"));
    let rows: Vec<_> = rdr.records().map(|r| r.unwrap()).collect();
    assert!(rows.len() >= 6);
    for r in rows.iter().filter(|r| !r[bound].is_empty()) {
        assert!(r[err].parse::<f64>().unwrap() <= r[bound].parse::<f64>().unwrap());
    }
}

#[test]
fn krylov_trace_sandwich_holds() {
    let out = tmp("trace.csv");
    let o = vne(&["krylov-trace", "--schedule", "mixed:10", "--iters", "20", "--csv", out.to_str().unwrap()]);
    assert!(o.status.success());
    let text = fs::read_to_string(&out).unwrap();
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let sandwich = rdr.headers().unwrap().iter().position(|h| h == "sandwich").unwrap();
    let rows: Vec<_> = rdr.records().map(|r| r.unwrap()).collect();
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|r| &r[sandwich] == "true"));
}
