use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn fmrbench(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fmrbench")).args(args).output().unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn ok(out: Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn impute_leaves_complete_file_unchanged() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("a.csv");
    let text = "group,x1,x2,y\na,1.50,2,3\na,2,3e0,4\nb,3,4,5.25\nb,4,5,6\n";
    fs::write(&input, text).unwrap();
    let out = dir.path().join("b.csv");
    ok(fmrbench(&["impute", "--in", p(&input), "--out", p(&out)]));
    assert_eq!(fs::read_to_string(&out).unwrap(), text);
    assert!(!dir.path().join("b.standardization.json").exists());
}

#[test]
fn impute_fills_missing_cells_and_writes_sidecar() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("a.csv");
    fs::write(&input, "group,x1,x2,y\na,1,,3\na,2,3,4\nb,,4,5\nb,4,5,\nc,5,7,8\n").unwrap();
    let out = dir.path().join("b.csv");
    ok(fmrbench(&["impute", "--in", p(&input), "--out", p(&out), "--standardize", "--response-cols", "y"]));
    let written = fs::read_to_string(&out).unwrap();
    assert!(written.lines().skip(1).all(|l| l.split(',').all(|c| !c.is_empty())));
    assert_eq!(written.lines().next(), Some("group,x1,x2,y"));
    let sidecar: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("b.standardization.json")).unwrap()).unwrap();
    let cols = sidecar["columns"].as_array().unwrap();
    assert_eq!(cols.len(), 3);
    assert_eq!(cols[2]["role"], "response");
    assert_eq!(cols[0]["role"], "feature");
}

#[test]
fn impute_reports_bad_cell_location() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("a.csv");
    fs::write(&input, "group,x1,y\na,1,2\na,oops,3\n").unwrap();
    let out = fmrbench(&["impute", "--in", p(&input), "--out", p(&dir.path().join("b.csv"))]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("row 2") && err.contains("x1"), "{err}");
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(fmrbench(&["cluster", "--in", "x.csv"]).status.code(), Some(2));
    assert_eq!(fmrbench(&["frobnicate"]).status.code(), Some(2));
}

fn synth_sample(dir: &Path, noise: &str) -> std::path::PathBuf {
    let out = dir.join("synth");
    ok(fmrbench(&[
        "synth", "--noise", noise, "--d2", "1.8", "--runs", "1", "--seed", "3", "--out-dir", p(&out), "--emit-sample",
    ]));
    out.join("sample.csv")
}

#[test]
fn cluster_recovers_low_noise_laws() {
    let dir = TempDir::new().unwrap();
    let sample = synth_sample(dir.path(), "0.1");
    let out = dir.path().join("cl");
    let stdout = ok(fmrbench(&[
        "cluster", "--in", p(&sample), "--group-col", "group", "--response-cols", "y", "--truth-col", "truth",
        "--k", "2", "--seed", "5", "--out-dir", p(&out),
    ]));
    assert!(stdout.contains("NMI"));
    let run: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("run.json")).unwrap()).unwrap();
    assert!(run["nmi"].as_f64().unwrap() >= 0.9, "{run}");
    for c in 0..2 {
        assert!(out.join(format!("cluster_{c}_y.json")).exists());
    }
    let sweep = fs::read_to_string(out.join("sweep.csv")).unwrap();
    assert_eq!(sweep.lines().count(), 3, "K=1 baseline plus K=2");
}

#[test]
fn single_cluster_puts_every_group_in_zero() {
    let dir = TempDir::new().unwrap();
    let sample = synth_sample(dir.path(), "1");
    let out = dir.path().join("cl");
    ok(fmrbench(&[
        "cluster", "--in", p(&sample), "--group-col", "group", "--response-cols", "y", "--passthrough-cols", "truth",
        "--k", "1", "--seed", "5", "--out-dir", p(&out),
    ]));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("mmcl.json")).unwrap()).unwrap();
    assert_eq!(report["models"].as_array().unwrap().len(), 1);
    let assignment = report["assignment"].as_object().unwrap();
    assert_eq!(assignment.len(), 20);
    assert!(assignment.values().all(|v| v == 0));
}

#[test]
fn too_many_clusters_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let sample = synth_sample(dir.path(), "1");
    let out = fmrbench(&[
        "cluster", "--in", p(&sample), "--group-col", "group", "--response-cols", "y", "--passthrough-cols", "truth",
        "--k", "21", "--seed", "5", "--out-dir", p(&dir.path().join("cl")),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn synth_aggregate_matches_per_run_rows() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("s");
    ok(fmrbench(&["synth", "--runs", "3", "--seed", "9", "--out-dir", p(&out)]));
    let runs = fs::read_to_string(out.join("runs.csv")).unwrap();
    let agg = fs::read_to_string(out.join("aggregate.csv")).unwrap();
    assert_eq!(runs.lines().count(), 1 + 15 * 3);
    assert_eq!(agg.lines().count(), 1 + 15);
    assert!(!out.join("mean_nmi.svg").exists());
    for line in agg.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        let members: Vec<Vec<&str>> =
            runs.lines().skip(1).map(|l| l.split(',').collect::<Vec<_>>()).filter(|r| r[0] == f[0] && r[1] == f[1]).collect();
        let mean_nmi = members.iter().map(|r| r[3].parse::<f64>().unwrap()).sum::<f64>() / members.len() as f64;
        let mean_it = members.iter().map(|r| r[4].parse::<f64>().unwrap()).sum::<f64>() / members.len() as f64;
        assert!((mean_nmi - f[2].parse::<f64>().unwrap()).abs() < 1e-12);
        assert!((mean_it - f[6].parse::<f64>().unwrap()).abs() < 1e-12);
    }
}

fn clustered_dealers(dir: &Path) -> (std::path::PathBuf, std::path::PathBuf) {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/dealership_like.csv");
    let imputed = dir.join("imputed.csv");
    ok(fmrbench(&[
        "impute", "--in", p(&data), "--out", p(&imputed), "--standardize", "--group-col", "dealer",
        "--response-cols", "P,SE", "--passthrough-cols", "segment",
    ]));
    let models = dir.join("models");
    ok(fmrbench(&[
        "cluster", "--in", p(&imputed), "--group-col", "dealer", "--response-cols", "P,SE", "--passthrough-cols",
        "segment", "--k", "3", "--seed", "2", "--out-dir", p(&models),
    ]));
    (imputed, models)
}

#[test]
fn recommend_writes_monotone_frontier_and_raw_units() {
    let dir = TempDir::new().unwrap();
    let (imputed, models) = clustered_dealers(dir.path());
    let out = dir.path().join("rec");
    ok(fmrbench(&[
        "recommend", "--models", p(&models), "--in", p(&imputed), "--objective", "P", "--constraint", "SE",
        "--se-grid", "-1:3:0.25", "--out-dir", p(&out), "--svg", "--freeze", "service_bays", "--store", "D003",
    ]));
    for c in 0..3 {
        let csv = fs::read_to_string(out.join(format!("frontier_cluster_{c}.csv"))).unwrap();
        let stars: Vec<f64> = csv
            .lines()
            .skip(1)
            .filter(|l| l.split(',').nth(1) == Some("optimal"))
            .map(|l| l.split(',').nth(3).unwrap().parse().unwrap())
            .collect();
        assert!(!stars.is_empty());
        assert!(stars.windows(2).all(|w| w[1] <= w[0] + 1e-9), "{stars:?}");
        assert!(out.join(format!("frontier_cluster_{c}.svg")).exists());
        let rec: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(out.join(format!("recommendation_cluster_{c}.json"))).unwrap())
                .unwrap();
        if rec["status"] == "optimal" {
            assert_eq!(rec["x_star_raw"].as_array().unwrap().len(), 6);
        }
    }
}

#[test]
fn infeasible_floor_is_not_an_error() {
    let dir = TempDir::new().unwrap();
    let (imputed, models) = clustered_dealers(dir.path());
    let out = dir.path().join("rec");
    ok(fmrbench(&[
        "recommend", "--models", p(&models), "--in", p(&imputed), "--cluster", "0", "--objective", "P",
        "--constraint", "SE", "--se-floor", "1000", "--out-dir", p(&out),
    ]));
    let rec = fs::read_to_string(out.join("recommendation_cluster_0.json")).unwrap();
    assert!(rec.contains("\"infeasible\""), "{rec}");
}

#[test]
fn missing_model_file_exits_with_two() {
    let dir = TempDir::new().unwrap();
    let (imputed, models) = clustered_dealers(dir.path());
    fs::remove_file(models.join("cluster_1_SE.json")).unwrap();
    let out = fmrbench(&[
        "recommend", "--models", p(&models), "--in", p(&imputed), "--cluster", "1", "--objective", "P",
        "--constraint", "SE", "--out-dir", p(&dir.path().join("rec")),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cluster_1_SE.json"));
}
