use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use phasepotts::scheduler::SolveResult;
use phasepotts::RunStats;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_phasepotts"));
    cmd.env_remove("PHASEPOTTS_CONFIG");
    cmd
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn k4(dir: &Path) -> String {
    let path = dir.join("k4.col");
    fs::write(&path, "c complete graph\np edge 4 6\ne 1 2\ne 1 3\ne 1 4\ne 2 3\ne 2 4\ne 3 4\n").unwrap();
    p(&path).to_owned()
}

#[test]
fn gen_kings_graph() {
    let dir = tempfile::tempdir().unwrap();
    let col = dir.path().join("k7.col");
    assert_eq!(ok(&["gen", "--kings", "7", "-o", p(&col)]).trim(), "nodes 49 edges 156");
    let text = fs::read_to_string(&col).unwrap();
    assert!(text.lines().any(|l| l == "p edge 49 156"));

    let json = dir.path().join("k1.json");
    assert_eq!(ok(&["gen", "--kings", "1", "-o", p(&json)]).trim(), "nodes 1 edges 0");

    let out = run(&["gen", "--kings", "0", "-o", p(&dir.path().join("k0.col"))]);
    assert!(!out.status.success());
}

#[test]
fn solve_complete_graph() {
    let dir = tempfile::tempdir().unwrap();
    let graph = k4(dir.path());
    let out = dir.path().join("out");
    let stdout = ok(&["solve", "-g", &graph, "--iters", "20", "--seed", "1", "-o", p(&out)]);
    assert!(stdout.contains("best_accuracy 1.0000"), "{stdout}");

    let stats: RunStats = serde_json::from_str(&fs::read_to_string(out.join("stats.json")).unwrap()).unwrap();
    assert_eq!(stats.per_iteration.len(), 20);
    assert_eq!(stats.best_accuracy, 1.0);
    let csv = fs::read_to_string(out.join("stats.csv")).unwrap();
    assert_eq!(csv.lines().count(), 22);

    let r = SolveResult::from_json(&fs::read_to_string(out.join("result_000.json")).unwrap()).unwrap();
    assert_eq!(r.coloring.len(), 4);
    assert!(r.wall_time.is_none());
    assert!(out.join("result_019.json").exists());
}

#[test]
fn solve_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("k5.col");
    ok(&["gen", "--kings", "5", "-o", p(&graph)]);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out in [&a, &b] {
        ok(&["solve", "-g", p(&graph), "--iters", "3", "--seed", "7", "-o", p(out)]);
    }
    for name in ["result_000.json", "result_002.json", "stats.json", "stats.csv", "config.txt"] {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name}");
    }
    let seq = dir.path().join("seq");
    ok(&["solve", "-g", p(&graph), "--iters", "3", "--seed", "7", "--sequential", "-o", p(&seq)]);
    assert_eq!(fs::read(a.join("stats.json")).unwrap(), fs::read(seq.join("stats.json")).unwrap());
}

#[test]
fn solve_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["solve", "-g", p(&dir.path().join("missing.col")), "-o", p(dir.path())]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));

    let graph = k4(dir.path());
    assert!(!run(&["solve", "-g", &graph, "--colors", "3", "-o", p(dir.path())]).status.success());
    assert!(!run(&["solve", "-g", &graph, "--iters", "0", "-o", p(dir.path())]).status.success());
}

#[test]
fn oracle_answers() {
    let dir = tempfile::tempdir().unwrap();
    let k7 = dir.path().join("k7.col");
    ok(&["gen", "--kings", "7", "-o", p(&k7)]);
    let out = ok(&["oracle", "-g", p(&k7)]);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("colorable"));
    assert_eq!(lines.next().unwrap().split_whitespace().count(), 49);
    assert_eq!(ok(&["oracle", "-g", p(&k7), "--colors", "3"]).trim(), "not colorable");

    let graph = k4(dir.path());
    assert_eq!(ok(&["oracle", "-g", &graph, "--colors", "1"]).trim(), "not colorable");
    assert_eq!(ok(&["oracle", "-g", &graph, "--colors", "4"]).lines().next(), Some("colorable"));
}

#[test]
fn bench_rows_ascend() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("bench.csv");
    let out = ok(&["bench", "--sides", "3,2", "--iters", "2", "-o", p(&csv)]);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("nodes,edges,search_space"));
    assert!(lines[1].starts_with("4,6,4^4,8,2,"));
    assert!(lines[2].starts_with("9,20,4^9,18,2,"));
    assert!(lines[2].ends_with(','));
    assert_eq!(fs::read_to_string(&csv).unwrap(), out);
}

#[test]
fn stats_recomputes_from_results() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("k4.json");
    ok(&["gen", "--kings", "4", "-o", p(&graph)]);
    let out = dir.path().join("run");
    ok(&["solve", "-g", p(&graph), "--iters", "4", "-o", p(&out)]);
    let again = dir.path().join("again.json");
    ok(&["stats", "-g", p(&graph), p(&out), "-o", p(&again)]);
    assert_eq!(fs::read(out.join("stats.json")).unwrap(), fs::read(&again).unwrap());
}

#[test]
fn config_file_and_env() {
    let dir = tempfile::tempdir().unwrap();
    let graph = k4(dir.path());
    let config = dir.path().join("run.conf");
    fs::write(&config, "# short run\niterations = 2\ncolors = 8\nseed = 5\n").unwrap();

    let a = dir.path().join("a");
    ok(&["solve", "-g", &graph, "--config", p(&config), "-o", p(&a)]);
    let r = SolveResult::from_json(&fs::read_to_string(a.join("result_001.json")).unwrap()).unwrap();
    assert_eq!(r.colors, 8);
    assert!(!a.join("result_002.json").exists());

    let b = dir.path().join("b");
    let out = bin()
        .env("PHASEPOTTS_CONFIG", &config)
        .args(["solve", "-g", &graph, "--iters", "3", "-o", p(&b)])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(b.join("result_002.json").exists());
    let text = fs::read_to_string(b.join("config.txt")).unwrap();
    assert!(text.contains("colors = 8") && text.contains("iterations = 3"));
}
