use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::OnceLock;

const BIN: &str = env!("CARGO_BIN_EXE_matrix-reasoner");

fn cli(args: &[&str]) -> Output {
    Command::new(BIN).args(args).env_remove("MATRIX_REASONER_THREADS").output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn field(out: &str, key: &str) -> String {
    out.lines()
        .find_map(|l| l.strip_prefix(&format!("{key}: ")))
        .unwrap_or_else(|| panic!("no {key} in {out}"))
        .to_string()
}

/// One 16-item corpus shared by the tests in this file.
fn corpus() -> &'static Path {
    static DIR: OnceLock<PathBuf> = OnceLock::new();
    DIR.get_or_init(|| {
        let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli-corpus");
        let _ = std::fs::remove_dir_all(&dir);
        let o = cli(&["generate", "--n", "16", "--seed", "11", "--out", dir.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        dir
    })
}

struct Entry {
    manifest: String,
    transform: String,
    answer: usize,
    repetition: Option<usize>,
}

fn index() -> Vec<Entry> {
    let text = std::fs::read_to_string(corpus().join("index.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    v["items"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| Entry {
            manifest: e["manifest"].as_str().unwrap().to_string(),
            transform: e["transform"].as_str().unwrap().to_string(),
            answer: e["answer"].as_u64().unwrap() as usize,
            repetition: e["repetition_option"].as_u64().map(|r| r as usize),
        })
        .collect()
}

#[test]
fn malformed_manifest_exits_2_naming_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.json");
    std::fs::write(&path, r#"{"id":"x","dim":2,"threshold":128,"cells":[]}"#).unwrap();
    let o = cli(&["solve", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("options"));
}

#[test]
fn missing_manifest_and_bad_flags_exit_2() {
    assert_eq!(cli(&["solve", "/nonexistent/m.json"]).status.code(), Some(2));
    let m = corpus().join("item000.json");
    let m = m.to_str().unwrap();
    assert_eq!(cli(&["solve", m, "--analogy-groups", "Q"]).status.code(), Some(2));
    assert_eq!(cli(&["solve", m, "--strategy", "greedy"]).status.code(), Some(2));
    let o = Command::new(BIN).args(["solve", m]).env("MATRIX_REASONER_THREADS", "zero").output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn generated_add_diff_item_is_solved() {
    let idx = index();
    let e = idx.iter().find(|e| e.transform == "add_diff").expect("add_diff item in corpus");
    let o = cli(&["solve", corpus().join(&e.manifest).to_str().unwrap(), "--strategy", "m_prudent"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert_eq!(field(&out, "answer"), e.answer.to_string());
    assert_eq!(field(&out, "mato").parse::<f64>().unwrap(), 1.0);
}

#[test]
fn o_prudent_falls_for_the_repetition() {
    let idx = index();
    let e = idx.iter().find(|e| e.repetition.is_some()).expect("trap item");
    let o = cli(&["solve", corpus().join(&e.manifest).to_str().unwrap(), "--strategy", "o-prudent"]);
    assert!(o.status.success());
    assert_eq!(field(&stdout(&o), "answer"), e.repetition.unwrap().to_string());
}

#[test]
fn ablate_is_byte_identical_across_thread_counts() {
    let tmp = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for threads in ["1", "4"] {
        let out = tmp.path().join(threads);
        let o = Command::new(BIN)
            .args(["ablate", corpus().to_str().unwrap(), "--grid", "per_group", "--out", out.to_str().unwrap()])
            .env("MATRIX_REASONER_THREADS", threads)
            .output()
            .unwrap();
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let grid = std::fs::read(out.join("per_group.csv")).unwrap();
        let choices = std::fs::read(out.join("choices.csv")).unwrap();
        assert_eq!(String::from_utf8_lossy(&grid).lines().count(), 17);
        outputs.push((grid, choices));
    }
    assert_eq!(outputs[0], outputs[1]);

    let report = tmp.path().join("report");
    let choices = tmp.path().join("1").join("choices.csv");
    let o = cli(&["report", choices.to_str().unwrap(), "--out", report.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(report.join("scatter.svg").exists() && report.join("disks.svg").exists());
}

#[test]
fn malformed_csv_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let csv = tmp.path().join("c.csv");
    std::fs::write(&csv, "problem_id,strategy\nx,nope\n").unwrap();
    let o = cli(&["report", csv.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}
