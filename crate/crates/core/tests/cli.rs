use std::path::Path;
use std::process::{Command, Output};

fn scforge(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_scforge")).current_dir(dir).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).trim().to_string()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

const SMALL: &str = "seed = 5\n[ensemble]\nl = 3\nr = 6\nL = 6\nw = 3\nM = 30\n";

#[test]
fn rate_and_threshold() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("run.toml"), "[ensemble]\nl = 4\nr = 8\nL = 10\nw = 3\nM = 990\n").unwrap();
    let o = scforge(dir.path(), &["rate", "--config", "run.toml"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "0.400000");

    let o = scforge(dir.path(), &["threshold", "--config", "run.toml", "--out", "res"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let t: f64 = stdout(&o).parse().unwrap();
    assert!((t - 0.4981).abs() < 5e-4, "{t}");
    let j = json(&dir.path().join("res/threshold.json"));
    assert_eq!(j["command"], "threshold");
    assert_eq!(j["config_hash"].as_str().unwrap().len(), 64);
    let b = j["bracket"].as_array().unwrap();
    assert!(b[0].as_f64().unwrap() < b[1].as_f64().unwrap());
}

#[test]
fn config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    assert_eq!(scforge(p, &["rate"]).status.code(), Some(2));
    assert_eq!(scforge(p, &["rate", "--config", "missing.toml"]).status.code(), Some(2));
    assert_eq!(scforge(p, &["frobnicate"]).status.code(), Some(2));
    std::fs::write(p.join("bad.toml"), "[ensemble]\nl = 4\nr = 8\nL = 10\nw = 3\nM = 990\ncolour = 1\n").unwrap();
    let o = scforge(p, &["rate", "--config", "bad.toml"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("colour"));
    std::fs::write(p.join("ra.toml"), "[ensemble]\nkind = \"sc-ra\"\nq = 5\nL = 4\nM = 40\n[ege]\nepsilon = 0.4\n").unwrap();
    assert_eq!(scforge(p, &["ege", "--config", "ra.toml"]).status.code(), Some(2));
    assert_eq!(scforge(p, &["rate", "--config", "ra.toml", "--jobs", "0"]).status.code(), Some(2));
}

#[test]
fn construction_failure_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    // two checks per position cannot host degree-4 variables without parallel edges
    std::fs::write(dir.path().join("tiny.toml"), "[ensemble]\nl = 4\nr = 8\nL = 4\nw = 2\nM = 4\n[build]\nmethod = \"random\"\n").unwrap();
    let o = scforge(dir.path(), &["build", "--config", "tiny.toml"]);
    assert_eq!(o.status.code(), Some(1), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn build_and_simulate_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let cfg = format!("{SMALL}[build]\nmethod = \"peg\"\n[simulate]\ngraph = \"a/graph.txt\"\neps = [0.3, 0.45]\nmin_errors = 20\nmax_trials = 3000\n");
    std::fs::write(p.join("run.toml"), cfg).unwrap();
    for (out, jobs) in [("a", "1"), ("b", "2")] {
        let o = scforge(p, &["build", "--config", "run.toml", "--out", out, "--jobs", jobs]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let ga = std::fs::read_to_string(p.join("a/graph.txt")).unwrap();
    assert_eq!(ga, std::fs::read_to_string(p.join("b/graph.txt")).unwrap());
    assert!(p.join("a/graph.txt.alist").exists());
    assert_eq!(json(&p.join("a/build.json"))["vars"], 180);

    for (out, jobs) in [("s1", "1"), ("s3", "3")] {
        let o = scforge(p, &["simulate", "--config", "run.toml", "--out", out, "--jobs", jobs]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let csv = std::fs::read_to_string(p.join("s1/simulate.csv")).unwrap();
    assert!(csv.starts_with("epsilon,trials,errors,fer,ci_lo,ci_hi\n"));
    assert_eq!(csv.lines().count(), 3);
    assert_eq!(csv, std::fs::read_to_string(p.join("s3/simulate.csv")).unwrap());

    let seeded = scforge(p, &["build", "--config", "run.toml", "--out", "c", "--seed", "6"]);
    assert_eq!(seeded.status.code(), Some(0));
    assert_ne!(ga, std::fs::read_to_string(p.join("c/graph.txt")).unwrap());
    assert_ne!(json(&p.join("a/build.json"))["config_hash"], json(&p.join("c/build.json"))["config_hash"]);
    assert_eq!(json(&p.join("c/build.json"))["seed"], 6);
}

#[test]
fn delta_and_ege_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let cfg = format!("{SMALL}[delta]\nepsilon = 0.45\nu = 2\nq_grid = 50\n[ege]\nepsilon = 0.4\n");
    std::fs::write(p.join("run.toml"), cfg).unwrap();
    let o = scforge(p, &["delta", "--config", "run.toml"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(std::fs::read_to_string(p.join("delta.csv")).unwrap().lines().count() > 50);
    let o = scforge(p, &["ege", "--config", "run.toml"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).starts_with("success"), "{}", stdout(&o));
    let j = json(&p.join("ege.json"));
    assert!(j["conservation_error"].as_f64().unwrap() < 1e-6);
}
