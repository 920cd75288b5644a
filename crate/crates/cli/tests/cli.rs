use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn fixture(name: &str) -> String {
    root().join("fixtures").join(format!("{name}.toml")).display().to_string()
}

fn golden(name: &str) -> String {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    std::fs::read_to_string(path).unwrap()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fiberloom"))
        .args(args)
        .env_remove("FIBERLOOM_THREADS")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

/// A copy of the minimal fixture with `extra` spliced in after `anchor`.
fn patched(dir: &Path, anchor: &str, extra: &str) -> String {
    let text = std::fs::read_to_string(fixture("minimal")).unwrap();
    assert!(text.contains(anchor));
    let text = text.replacen(anchor, &format!("{anchor}\n{extra}"), 1);
    let path = dir.join("patched.toml");
    std::fs::write(&path, text).unwrap();
    path.display().to_string()
}

#[test]
fn derive_table_matches_golden() {
    let o = run(&["derive", &fixture("minimal")]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o), golden("minimal_derive.txt"));
}

#[test]
fn optimize_records_match_golden() {
    let o = run(&["optimize", &fixture("minimal"), "--layers", "6", "--format", "records"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o), golden("minimal_optimize.json"));
}

#[test]
fn zero_layers_is_an_empty_report() {
    let o = run(&["optimize", &fixture("minimal"), "--layers", "0", "--format", "records"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["layers"].as_array().unwrap().len(), 0);
}

#[test]
fn unknown_field_exits_2_and_names_it() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["derive", &patched(dir.path(), "schema_version = 1", "colour = 3")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("colour"), "{}", stderr(&o));
}

#[test]
fn missing_file_exits_2() {
    let o = run(&["derive", "/nonexistent/project.toml"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unreachable_lower_bound_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let mins = format!("min_connections = [50.0{}]", ", 0.0".repeat(9));
    let o = run(&["optimize", &patched(dir.path(), "[params]", &mins), "--layers", "1"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn layer_out_of_range_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().display().to_string();
    let o = run(&["plan", &fixture("minimal"), "--layers", "2", "--layer", "5", "--out", &out]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn plan_writes_one_svg_per_exported_layer() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().display().to_string();
    let o = run(&["plan", &fixture("minimal"), "--layers", "4", "--all", "--out", &out]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let svgs = std::fs::read_dir(dir.path())
        .unwrap()
        .filter(|e| e.as_ref().unwrap().path().extension().is_some_and(|x| x == "svg"))
        .count();
    let paths = std::fs::read_to_string(dir.path().join("paths.txt")).unwrap();
    let layers = fiberloom::export::parse_path_export(&paths).unwrap();
    let mut ids: Vec<usize> = layers.iter().map(|p| p.layer).collect();
    ids.dedup();
    assert_eq!(svgs, 4);
    assert_eq!(ids.len(), svgs);
    assert_eq!(stdout(&o).lines().filter(|l| l.contains("clean")).count(), 4);
}

#[test]
fn plan_from_saved_patterns_matches_fresh_solve() {
    let dir = tempfile::tempdir().unwrap();
    let rec = dir.path().join("p.json");
    std::fs::write(&rec, golden("minimal_optimize.json")).unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let fresh = run(&["plan", &fixture("minimal"), "--layers", "6", "--layer", "3", "--out", a.to_str().unwrap()]);
    let saved = run(&[
        "plan",
        &fixture("minimal"),
        "--patterns",
        rec.to_str().unwrap(),
        "--layer",
        "3",
        "--out",
        b.to_str().unwrap(),
    ]);
    assert_eq!(fresh.status.code(), Some(0));
    assert_eq!(saved.status.code(), Some(0), "{}", stderr(&saved));
    assert_eq!(
        std::fs::read(a.join("paths.txt")).unwrap(),
        std::fs::read(b.join("paths.txt")).unwrap()
    );
}

#[test]
fn enumerate_marks_the_optimum_undominated() {
    let o = run(&["enumerate", &fixture("minimal"), "--layer", "1", "--format", "records"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let rows = v["rows"].as_array().unwrap();
    assert!(!rows.is_empty());
    let best = rows
        .iter()
        .max_by(|a, b| a["objective"].as_f64().unwrap().total_cmp(&b["objective"].as_f64().unwrap()))
        .unwrap();
    assert_eq!(best["dominated"], false);
}

#[test]
fn thread_count_is_validated() {
    let o = Command::new(env!("CARGO_BIN_EXE_fiberloom"))
        .args(["derive", &fixture("minimal")])
        .env("FIBERLOOM_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}
