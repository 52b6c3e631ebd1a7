use std::path::PathBuf;
use std::process::{Command, Output};

fn camcast(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_camcast")).args(args).output().expect("binary runs")
}

fn configs() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn small() -> String {
    configs().join("small.toml").display().to_string()
}

#[test]
fn simulate_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("rows.csv");
    let o = camcast(&["simulate", "--config", &small(), "--trials", "3", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("scheme,M,load_mean,load_se,trials"));
    assert_eq!(lines.count(), 5 * 4);
}

#[test]
fn simulate_is_reproducible() {
    let a = camcast(&["simulate", "--config", &small(), "--trials", "4", "--seed", "9"]);
    let b = camcast(&["simulate", "--config", &small(), "--trials", "4", "--seed", "9"]);
    let c = camcast(&["simulate", "--config", &small(), "--trials", "4", "--seed", "10"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn plot_data_groups_schemes() {
    let o = camcast(&["simulate", "--config", &small(), "--trials", "2", "--format", "plot-data"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.matches("# M load_mean load_se trials").count(), 5);
    assert!(text.contains("# LFU-CC\n"));
}

#[test]
fn analytic_sweep() {
    let cfg = configs().join("zipf-0.2.toml");
    let o = camcast(&["analytic", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("M,phi,m_bar,expected_psi,load,network_rate,distortion\n"));
    let loads: Vec<f64> = text.lines().skip(1).map(|l| l.split(',').nth(4).unwrap().parse().unwrap()).collect();
    assert_eq!(loads.len(), 5);
    assert!(loads.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn example_trace_and_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("g.txt");
    let o = camcast(&["example", "--graph-out", graph.to_str().unwrap()]);
    assert!(o.status.success());
    let trace = String::from_utf8(o.stdout).unwrap();
    assert!(trace.contains("receiver 1 requests b: d = 2"));
    assert!(trace.contains("clusters: {v1,v2} {v3} {v4}"));
    assert!(trace.contains("2 colors"));
    assert!(trace.contains("total channel uses: 8"));
    let fill = String::from_utf8(camcast(&["example", "--growth", "fill-on-join"]).stdout).unwrap();
    assert!(fill.contains("GIS 1: {v1,v2,v3}"));

    let o = camcast(&["oracle", graph.to_str().unwrap(), "--caps", "2,1,1"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("exact 2\nheuristic 2\n"));
}

#[test]
fn config_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(
        &bad,
        std::fs::read_to_string(small()).unwrap().replace("sweep = [0, 5, 10, 20]", "sweep = [0, 500]"),
    )
    .unwrap();
    for args in [
        vec!["simulate", "--config", bad.to_str().unwrap()],
        vec!["simulate", "--config", "/nonexistent.toml"],
        vec!["analytic"],
        vec!["frobnicate"],
        vec!["oracle", "/nonexistent.txt"],
    ] {
        assert_eq!(camcast(&args).status.code(), Some(1), "{args:?}");
    }
}

#[test]
fn contract_violation_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("g.txt");
    assert!(camcast(&["example", "--graph-out", graph.to_str().unwrap()]).status.success());
    // Receiver 1 has vertices but a cap of zero: no valid cover exists.
    let o = camcast(&["oracle", graph.to_str().unwrap(), "--caps", "0,1,1"]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn malformed_graph_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("g.txt");
    // Vertices 1 and 2 share receiver 1 but lack the cluster edge.
    std::fs::write(&graph, "graph 2 2 0\nv 1 1 1 1 K=1\nv 2 1 2 1 K=1\n").unwrap();
    assert_eq!(camcast(&["oracle", graph.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn help_exits_zero() {
    assert_eq!(camcast(&["--help"]).status.code(), Some(0));
}
