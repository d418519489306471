//! End-to-end runs of the `gssl` binary.

use std::path::Path;
use std::process::{Command, Output};

use gssl::io::{load_class_file, load_edge_list, read_features_csv};
use gssl::TrajectoryRecord;

fn gssl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gssl")).args(args).output().expect("spawn gssl")
}

fn ok(args: &[&str]) -> String {
    let out = gssl(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn missing_label_file_exits_2_and_names_it() {
    let tmp = tempfile::tempdir().unwrap();
    let edges = tmp.path().join("g.edges");
    std::fs::write(&edges, "0 1 1\n").unwrap();
    let missing = tmp.path().join("nope.labels");
    let out = gssl(&["solve", "--graph", p(&edges), "--labels", p(&missing), "--out-dir", p(tmp.path())]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nope.labels"));
}

#[test]
fn zero_degree_and_bad_config_fail() {
    let tmp = tempfile::tempdir().unwrap();
    let edges = tmp.path().join("g.edges");
    std::fs::write(&edges, "0 1 1\n").unwrap();
    let labels = tmp.path().join("l");
    std::fs::write(&labels, "0 0\n3 1\n").unwrap();
    let out = gssl(&["solve", "--graph", p(&edges), "--labels", p(&labels), "--out-dir", p(tmp.path())]);
    assert_eq!(out.status.code(), Some(2));
    let out = gssl(&["solve", "--mu", "0", "--out-dir", p(tmp.path())]);
    assert_eq!(out.status.code(), Some(2));
    let out = gssl(&["solve", "--schedule", "dec:0", "--out-dir", p(tmp.path())]);
    assert!(!out.status.success());
}

#[test]
fn solve_outputs_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    ok(&["solve", "--method", "power", "--sigma", "0.5", "--mu", "1", "--iters", "500", "--out-dir", p(dir)]);
    let table = read_features_csv(std::fs::File::open(dir.join("features.csv")).unwrap()).unwrap();
    assert_eq!(table.ids.len(), 77);
    assert_eq!(table.features.cols(), 6);
    assert_eq!(gssl::classify(&table.features), table.classes);
    let traj = TrajectoryRecord::read_csv(std::fs::File::open(dir.join("trajectory.csv")).unwrap()).unwrap();
    let final_err = traj.last().unwrap().error_pct;

    let sweep_dir = dir.join("sweep");
    ok(&["sweep", "--out-dir", p(&sweep_dir)]);
    let text = std::fs::read_to_string(sweep_dir.join("sweep.csv")).unwrap();
    let rows: Vec<Vec<f64>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 9);
    let cell = rows.iter().find(|r| r[0] == 0.5 && r[1] == 1.0).unwrap();
    assert_eq!(cell[2], final_err);
    let best = rows.iter().map(|r| r[2]).fold(f64::INFINITY, f64::min);
    assert_eq!(cell[2], best);
}

#[test]
fn normalized_trajectory_column() {
    let tmp = tempfile::tempdir().unwrap();
    ok(&["solve", "--method", "sampling", "--iters", "5", "--normalize-x", "--out-dir", p(tmp.path())]);
    let text = std::fs::read_to_string(tmp.path().join("trajectory.csv")).unwrap();
    assert!(text.starts_with("iteration,error_count,error_pct,n_nodes,iter_per_avg_degree\n"));
}

#[test]
fn generated_graph_reloads_and_solves() {
    let tmp = tempfile::tempdir().unwrap();
    let g = tmp.path().join("g");
    ok(&["generate", "gaussian", "--n", "500", "--seed", "1", "--out-dir", p(&g)]);
    let graph = load_edge_list(g.join("graph.edges"), false).unwrap();
    let truth = load_class_file(g.join("truth.txt")).unwrap();
    let labels = load_class_file(g.join("labels.txt")).unwrap();
    assert_eq!(truth.len(), graph.node_count());
    assert_eq!(labels.len(), 6);
    let positions = std::fs::read_to_string(g.join("positions.txt")).unwrap();
    assert_eq!(positions.lines().count(), graph.node_count());
    let out = ok(&[
        "solve",
        "--graph", p(&g.join("graph.edges")),
        "--labels", p(&g.join("labels.txt")),
        "--truth", p(&g.join("truth.txt")),
        "--method", "sampling",
        "--iters", "50",
        "--out-dir", p(&g.join("solve")),
    ]);
    assert!(out.contains("misclassified"));

    let s = tmp.path().join("s");
    ok(&["generate", "sbm", "--sizes", "50,50", "--p-in", "0.3", "--p-out", "0.01", "--out-dir", p(&s)]);
    assert!(load_edge_list(s.join("graph.edges"), false).unwrap().node_count() > 90);
}

#[test]
fn simulate_and_track_emit_reports() {
    let tmp = tempfile::tempdir().unwrap();
    let out = ok(&[
        "simulate", "dsbm", "--cap", "100", "--init", "50", "--lambda", "1e-2", "--mu-dep", "2e-4",
        "--steps", "1e5", "--p-in", "0.3", "--out-dir", p(tmp.path()),
    ]);
    assert!(out.contains("mean size over second half"));
    let traj = TrajectoryRecord::read_csv(std::fs::File::open(tmp.path().join("trajectory.csv")).unwrap()).unwrap();
    assert_eq!(traj.rows.len(), 1000);
    let log = std::fs::read_to_string(tmp.path().join("events.log")).unwrap();
    let times: Vec<f64> = log.lines().map(|l| l.split(' ').next().unwrap().parse().unwrap()).collect();
    assert!(times.windows(2).all(|w| w[0] <= w[1]));

    let out = ok(&["track", "--n", "300", "--pretrain", "20", "--post", "5", "--out-dir", p(tmp.path())]);
    assert!(out.contains("planted class"));
    let track = std::fs::read_to_string(tmp.path().join("track.csv")).unwrap();
    assert_eq!(track.lines().count(), 6);
}
