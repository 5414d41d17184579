use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn nsw(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nsw"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn write(dir: &Path, name: &str, contents: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, contents).unwrap();
    path
}

fn instance_json(rows: &[&[u64]]) -> String {
    let body: Vec<String> = rows
        .iter()
        .map(|r| format!("[{}]", r.iter().map(u64::to_string).collect::<Vec<_>>().join(", ")))
        .collect();
    format!(
        "{{\"agents\": {}, \"goods\": {}, \"valuations\": [{}]}}",
        rows.len(),
        rows[0].len(),
        body.join(", ")
    )
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn identical_solve_writes_allocation() {
    let dir = TempDir::new().unwrap();
    let inst = write(dir.path(), "i.json", &instance_json(&[&[5, 4, 3, 2], &[5, 4, 3, 2]]));
    let alloc = dir.path().join("a.json");
    let out = nsw(&["solve", "--algo", "identical", "--input", p(&inst), "--output", p(&alloc)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = fs::read_to_string(&alloc).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["owner"], serde_json::json!([1, 2, 2, 1]));
    assert!(stdout(&out).starts_with("NSW = 7"), "{}", stdout(&out));

    let check = nsw(&["check", "--input", p(&inst), "--allocation", p(&alloc), "--property", "efx"]);
    assert_eq!(code(&check), 0);
    assert_eq!(stdout(&check), "EFx: pass\n");
}

#[test]
fn identical_on_non_identical_instance_is_rejected() {
    let dir = TempDir::new().unwrap();
    let inst = write(dir.path(), "i.json", &instance_json(&[&[1, 0, 1], &[0, 1, 1]]));
    let out = nsw(&["solve", "--algo", "identical", "--input", p(&inst)]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("instance is not identical"), "{}", stderr(&out));
}

#[test]
fn infeasible_binary_instance_exits_2() {
    let dir = TempDir::new().unwrap();
    let inst = write(dir.path(), "i.json", &instance_json(&[&[1, 1], &[0, 0]]));
    let out = nsw(&["solve", "--algo", "binary", "--input", p(&inst)]);
    assert_eq!(code(&out), 2, "{}", stderr(&out));
}

#[test]
fn malformed_input_exits_1() {
    let dir = TempDir::new().unwrap();
    let inst = write(dir.path(), "i.json", "{\"agents\": 2, \"goods\": 2, \"valuations\": [[1, -1], [1, 1]]}");
    assert_eq!(code(&nsw(&["solve", "--algo", "binary", "--input", p(&inst)])), 1);
    let missing = dir.path().join("missing.json");
    assert_eq!(code(&nsw(&["solve", "--algo", "binary", "--input", p(&missing)])), 1);
}

#[test]
fn binary_trace_is_strictly_increasing() {
    let dir = TempDir::new().unwrap();
    let inst = write(
        dir.path(),
        "i.json",
        &instance_json(&[&[1, 1, 1, 1, 1, 1], &[1, 1, 1, 1, 1, 1], &[1, 1, 1, 1, 1, 1]]),
    );
    let start = write(dir.path(), "s.json", "{\"owner\": [1, 1, 1, 1, 2, 3]}");
    let trace = dir.path().join("t.csv");
    let out = nsw(&[
        "solve", "--algo", "binary", "--input", p(&inst), "--start", p(&start), "--trace", p(&trace),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = fs::read_to_string(&trace).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "iteration,from_agent,to_agent,path_len,zeros,product_num,product_den"
    );
    let products: Vec<u64> = lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            assert_eq!(f[4], "0");
            assert_eq!(f[6], "1");
            f[5].parse().unwrap()
        })
        .collect();
    assert!(!products.is_empty());
    assert!(products.windows(2).all(|w| w[0] < w[1]), "{products:?}");
    assert_eq!(*products.last().unwrap(), 8);
}

#[test]
fn check_reports_ef_violation_and_nsw() {
    let dir = TempDir::new().unwrap();
    let inst = write(dir.path(), "i.json", &instance_json(&[&[3, 2, 2], &[3, 2, 2]]));
    let all_one = write(dir.path(), "a.json", "{\"owner\": [1, 1, 1]}");
    let out = nsw(&["check", "--input", p(&inst), "--allocation", p(&all_one), "--property", "ef"]);
    assert_eq!(code(&out), 3);
    assert!(stdout(&out).starts_with("EF: violation: agent 2"), "{}", stdout(&out));

    let out = nsw(&["check", "--input", p(&inst), "--allocation", p(&all_one), "--property", "nsw"]);
    assert_eq!(code(&out), 0);
    let report = stdout(&out);
    assert!(report.starts_with("NSW = 0 "), "{report}");
    assert!(report.contains("zeros = 1"), "{report}");

    let bad = write(dir.path(), "b.json", "{\"owner\": [1, 3, 1]}");
    let out = nsw(&["check", "--input", p(&inst), "--allocation", p(&bad), "--property", "ef"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn gen_families() {
    let out = nsw(&["gen", "--family", "tight-efx", "--m", "6"]);
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["valuations"][0], serde_json::json!([4, 4, 1, 1, 1, 1]));
    assert_eq!(v["valuations"][1], serde_json::json!([4, 4, 1, 1, 1, 1]));
    assert_eq!(code(&nsw(&["gen", "--family", "tight-efx", "--m", "5"])), 1);

    let dense = nsw(&["gen", "--family", "random-binary", "--n", "3", "--m", "7", "--density", "1.0"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&dense)).unwrap();
    assert!(v["valuations"].as_array().unwrap().iter().flat_map(|r| r.as_array().unwrap()).all(|x| x == 1));

    let args = ["gen", "--family", "random-identical", "--n", "3", "--m", "9", "--seed", "42"];
    assert_eq!(nsw(&args).stdout, nsw(&args).stdout);
    let other = ["gen", "--family", "random-identical", "--n", "3", "--m", "9", "--seed", "43"];
    assert_ne!(nsw(&args).stdout, nsw(&other).stdout);
}

#[test]
fn generated_instances_feed_the_solvers() {
    let dir = TempDir::new().unwrap();
    let inst = dir.path().join("i.json");
    let out = nsw(&[
        "gen", "--family", "random-binary", "--n", "3", "--m", "6", "--density", "0.7", "--seed", "5",
        "--output", p(&inst),
    ]);
    assert_eq!(code(&out), 0);
    let solved = dir.path().join("s.json");
    let best = dir.path().join("o.json");
    let s = nsw(&["solve", "--algo", "binary", "--input", p(&inst), "--output", p(&solved)]);
    let o = nsw(&["oracle", "--input", p(&inst), "--output", p(&best)]);
    if code(&s) == 2 {
        return;
    }
    assert_eq!(code(&s), 0, "{}", stderr(&s));
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let report = |o: &Output| stdout(o).lines().next().unwrap().to_string();
    assert_eq!(report(&s), report(&o));
    assert!(stdout(&o).contains("explored 729 assignments"));
}

#[test]
fn oracle_budget_is_enforced() {
    let dir = TempDir::new().unwrap();
    let inst = write(dir.path(), "i.json", &instance_json(&[&[1; 8], &[1; 8], &[1; 8]]));
    let out = nsw(&["oracle", "--input", p(&inst), "--budget", "100"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("6561"), "{}", stderr(&out));
}

#[test]
fn caps_flag_uses_instance_caps() {
    let dir = TempDir::new().unwrap();
    let inst = write(
        dir.path(),
        "i.json",
        "{\"agents\": 2, \"goods\": 3, \"valuations\": [[1, 1, 1], [1, 1, 1]], \"caps\": [1, 1]}",
    );
    let out = nsw(&["oracle", "--input", p(&inst), "--caps"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stdout(&out).contains("product = 1/1"), "{}", stdout(&out));
    let plain = write(dir.path(), "p.json", &instance_json(&[&[1, 1], &[1, 1]]));
    assert_eq!(code(&nsw(&["oracle", "--input", p(&plain), "--caps"])), 1);
}

#[test]
fn bench_writes_csv() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("b.csv");
    let out = nsw(&[
        "bench", "--suite", "binary-exact", "--count", "5", "--n-max", "3", "--m-max", "5", "--output", p(&csv),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("instance_id,n,m,seed,algo,nsw_algo,nsw_opt,ratio"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 5);
    assert!(rows.iter().all(|r| r.contains(",true,")), "{rows:?}");
    assert!(stdout(&out).starts_with("5 rows, 5 exact-check passes"));

    let sweep = nsw(&["bench", "--suite", "tightness-sweep", "--m-max", "10"]);
    assert_eq!(code(&sweep), 0, "{}", stderr(&sweep));
    assert_eq!(stdout(&sweep).lines().count(), 1 + 4);
}
