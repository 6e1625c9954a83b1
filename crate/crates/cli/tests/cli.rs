use std::path::Path;
use std::process::{Command, Output};

use lodense::graph::{dijkstra, format_graph, parse_graph};
use lodense::io::WspdFile;
use lodense_cli::CSV_HEADER;

fn lodense(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lodense"))
        .args(args)
        .current_dir(dir)
        .env_remove("LODENSE_SEED")
        .output()
        .expect("spawn lodense")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

#[test]
fn generate_grid() {
    let dir = tempfile::tempdir().unwrap();
    let o = lodense(&["generate", "--kind", "grid", "--k", "3", "--out", "g.txt"], dir.path());
    assert_eq!(code(&o), 0);
    let g = parse_graph(&std::fs::read_to_string(dir.path().join("g.txt")).unwrap()).unwrap();
    assert_eq!((g.n(), g.m()), (9, 12));
}

#[test]
fn text_round_trip_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let o = lodense(&["generate", "--kind", "pgrid", "--k", "6", "--noise", "0.3", "--seed", "4", "--out", "p.txt"], dir.path());
    assert_eq!(code(&o), 0);
    let text = std::fs::read_to_string(dir.path().join("p.txt")).unwrap();
    let g = parse_graph(&text).unwrap();
    assert_eq!(format_graph(&g), text);
    let again = lodense(&["generate", "--kind", "pgrid", "--k", "6", "--noise", "0.3", "--seed", "4"], dir.path());
    assert_eq!(stdout(&again), text);
}

#[test]
fn seed_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let flag = lodense(&["generate", "--kind", "selg", "--k", "5", "--seed", "9"], dir.path());
    let env = Command::new(env!("CARGO_BIN_EXE_lodense"))
        .args(["generate", "--kind", "selg", "--k", "5"])
        .env("LODENSE_SEED", "9")
        .output()
        .unwrap();
    assert_eq!(code(&env), 0);
    assert_eq!(stdout(&flag), stdout(&env));
}

#[test]
fn build_query_verify() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(code(&lodense(&["generate", "--kind", "grid", "--k", "3", "--out", "g.txt"], d)), 0);
    let b = lodense(&["build-ado", "--in", "g.txt", "--eps", "0.5", "--seed", "7", "--out", "g.ado"], d);
    assert_eq!(code(&b), 0, "{}", String::from_utf8_lossy(&b.stderr));
    let q = lodense(&["query", "--oracle", "g.ado", "--u", "0", "--v", "8"], d);
    assert_eq!(code(&q), 0);
    let value: f64 = stdout(&q).trim().parse().unwrap();
    let g = parse_graph(&std::fs::read_to_string(d.join("g.txt")).unwrap()).unwrap();
    let exact = dijkstra(&g, 0)[8];
    assert!(value <= 1.5 * exact && value >= exact / 1.5);
    let v = lodense(&["verify-ado", "--oracle", "g.ado", "--in", "g.txt"], d);
    assert_eq!(code(&v), 0, "{}", stdout(&v));
    let s = lodense(&["stats", "--oracle", "g.ado"], d);
    assert!(stdout(&s).contains("pairs 36"));
}

#[test]
fn unreachable_query() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("two.txt"), "graph 4 2\nv 0 0 0\nv 1 1 0\nv 2 5 5\nv 3 6 5\ne 0 1\ne 2 3\n").unwrap();
    assert_eq!(code(&lodense(&["build-ado", "--in", "two.txt", "--eps", "0.5", "--seed", "1", "--out", "t.ado"], d)), 0);
    let q = lodense(&["query", "--oracle", "t.ado", "--u", "0", "--v", "3"], d);
    assert_eq!((code(&q), stdout(&q).trim()), (0, "unreachable"));
    assert_eq!(code(&lodense(&["verify-ado", "--oracle", "t.ado", "--in", "two.txt"], d)), 0);
    assert_eq!(code(&lodense(&["query", "--oracle", "t.ado", "--u", "0", "--v", "9"], d)), 2);
}

#[test]
fn removed_pair_fails_verification() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(code(&lodense(&["generate", "--kind", "comb", "--k", "5", "--out", "g.txt"], d)), 0);
    let b = lodense(&["build-wspd", "--in", "g.txt", "--eps", "0.5", "--lambda", "4", "--out", "w.bin"], d);
    assert_eq!(code(&b), 0, "{}", String::from_utf8_lossy(&b.stderr));
    assert_eq!(code(&lodense(&["verify-wspd", "--in", "g.txt", "--wspd", "w.bin"], d)), 0);
    let mut f = WspdFile::load(&d.join("w.bin")).unwrap();
    f.pairs.remove(0);
    f.save(&d.join("w2.bin")).unwrap();
    let v = lodense(&["verify-wspd", "--in", "g.txt", "--wspd", "w2.bin"], d);
    assert_eq!(code(&v), 1);
    assert!(String::from_utf8_lossy(&v.stderr).contains("coverage violation"));
    assert!(stdout(&v).contains("coverage missing"));
}

#[test]
fn usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    for args in [
        vec!["frobnicate"],
        vec!["generate", "--kind", "grid", "--k", "3", "--bogus"],
        vec!["generate", "--kind", "selg", "--k", "3"],
        vec!["generate", "--kind", "grid"],
        vec!["build-ado", "--in", "g.txt", "--eps", "0.5", "--out", "x"],
        vec!["build-ado", "--in", "g.txt", "--eps", "1.5", "--seed", "1", "--out", "x"],
        vec!["query", "--oracle", "missing.ado", "--u", "0", "--v", "1"],
        vec!["stats"],
    ] {
        let o = lodense(&args, d);
        assert_eq!(code(&o), 2, "{args:?}");
        assert!(!o.stderr.is_empty());
    }
    assert_eq!(code(&lodense(&["--help"], d)), 0);
}

#[test]
fn bench_csv() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let empty = lodense(&["bench"], d);
    assert_eq!((code(&empty), stdout(&empty)), (0, format!("{CSV_HEADER}\n")));
    let args = ["bench", "--seed", "3", "--instance", "grid:8", "--instance", "grid:16", "--instance", "grid:32", "--eps", "0.5"];
    let a = lodense(&args, d);
    let b = lodense(&args, d);
    assert_eq!(code(&a), 0);
    let rows = |o: &Output| -> Vec<Vec<String>> {
        stdout(o).lines().skip(1).map(|l| l.split(',').map(String::from).collect()).collect()
    };
    let (ra, rb) = (rows(&a), rows(&b));
    assert_eq!(ra.len(), 3);
    let mut last = 0u64;
    for (x, y) in ra.iter().zip(&rb) {
        // timing columns are build_ms, q_p50_ns, q_p99_ns
        for c in [0, 1, 2, 3, 4, 5, 9] {
            assert_eq!(x[c], y[c]);
        }
        let n: f64 = x[1].parse().unwrap();
        let pairs: u64 = x[5].parse().unwrap();
        assert!(pairs > last);
        last = pairs;
        assert!(pairs as f64 <= n * (n - 1.0) / 2.0);
        let ratio: f64 = x[9].parse().unwrap();
        assert!(ratio <= 1.5);
    }
    let missing = lodense(&["bench", "--seed", "1", "--instance", "nope.txt"], d);
    assert_eq!(code(&missing), 2);
}
