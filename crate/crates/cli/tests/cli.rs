use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn symtrack(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_symtrack"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn ok(out: &Output) {
    assert!(
        out.status.success(),
        "status {:?}\nstderr: {}",
        out.status,
        String::from_utf8_lossy(&out.stderr)
    );
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn jsonl(path: &Path) -> Vec<Value> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

/// Generates `pieces` random scores with zero-noise renderings and writes a manifest.
fn corpus(dir: &Path, pieces: usize) -> PathBuf {
    let mut manifest = String::new();
    for k in 0..pieces {
        let (s, p, a) = (format!("s{k}.tsv"), format!("p{k}.tsv"), format!("a{k}.tsv"));
        ok(&symtrack(&["gen-score", "--onsets", "100", "--seed", &k.to_string(), "--out", &s], dir));
        ok(&symtrack(&["synth", "--score", &s, "--out-perf", &p, "--out-align", &a], dir));
        manifest.push_str(&format!("{s}\t{p}\t{a}\n"));
    }
    let path = dir.join("manifest.tsv");
    fs::write(&path, manifest).unwrap();
    path
}

#[test]
fn track_two_onsets() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("s.tsv"), "0.0\t60\n1.0\t62\n").unwrap();
    fs::write(dir.path().join("p.tsv"), "0.0\t60\n0.5\t62\n").unwrap();
    ok(&symtrack(&["track", "--score", "s.tsv", "--perf", "p.tsv", "--out", "m.jsonl"], dir.path()));

    let lines = jsonl(&dir.path().join("m.jsonl"));
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0]["score_index"], 0);
    assert_eq!(lines[1]["score_index"], 1);
    assert_eq!(lines[1]["perf_index"], 1);
    assert_eq!(lines[1]["score_beats"], 1.0);
    assert_eq!(lines[1]["tempo_spq"], 0.5);
    assert!(lines[1]["wallclock_s"].as_f64().unwrap() >= 0.0);
    assert!(lines[0].get("extrapolated_beats").is_none());
}

#[test]
fn track_with_lookahead_and_realtime() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("s.tsv"), "0.0\t60\n1.0\t62\n2.0\t64\n4.0\t65\n").unwrap();
    fs::write(dir.path().join("p.tsv"), "0.0\t60\n0.05\t62\n0.1\t64\n").unwrap();
    let out = symtrack(
        &[
            "track", "--score", "s.tsv", "--perf", "p.tsv", "--realtime", "--lookahead-ms", "500", "--out", "m.jsonl",
        ],
        dir.path(),
    );
    ok(&out);
    let lines = jsonl(&dir.path().join("m.jsonl"));
    assert_eq!(lines.len(), 3);
    for l in &lines {
        let ahead = l["extrapolated_beats"].as_f64().unwrap();
        assert!(ahead >= l["score_beats"].as_f64().unwrap() && ahead <= 4.0);
    }
}

#[test]
fn track_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("p.tsv"), "0.0\t60\n").unwrap();
    let missing = symtrack(&["track", "--score", "nope.tsv", "--perf", "p.tsv", "--out", "m.jsonl"], d);
    assert_eq!(missing.status.code(), Some(1));
    assert_eq!(symtrack(&["track", "--score", "s.tsv"], d).status.code(), Some(1));

    fs::write(d.join("bad.tsv"), "0.0\t60\n1.0\tC4\n").unwrap();
    let bad = symtrack(&["track", "--score", "bad.tsv", "--perf", "p.tsv", "--out", "m.jsonl"], d);
    assert_eq!(bad.status.code(), Some(1));

    fs::write(d.join("empty.tsv"), "# nothing\n").unwrap();
    let empty = symtrack(&["track", "--score", "empty.tsv", "--perf", "p.tsv", "--out", "m.jsonl"], d);
    assert_eq!(empty.status.code(), Some(2));

    // The last onset is reached, then a note arrives long after it.
    fs::write(d.join("s.tsv"), "0.0\t60\n1.0\t62\n").unwrap();
    fs::write(d.join("late.tsv"), "0.0\t60\n0.5\t62\n30.0\t64\n31.0\t65\n").unwrap();
    let ended = symtrack(&["track", "--score", "s.tsv", "--perf", "late.tsv", "--out", "m.jsonl"], d);
    assert_eq!(ended.status.code(), Some(3));
    assert_eq!(jsonl(&d.join("m.jsonl")).len(), 2);
}

#[test]
fn eval_clean_corpus_and_unreadable_piece() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = corpus(dir.path(), 3);
    ok(&symtrack(&["eval", "--manifest", "manifest.tsv", "--out", "r.json"], dir.path()));
    let report = read_json(&dir.path().join("r.json"));
    assert_eq!(report["summary"]["robustness"], 100.0);
    assert_eq!(report["summary"]["precision"], serde_json::json!([100.0, 100.0, 100.0, 100.0, 100.0]));

    let mut text = fs::read_to_string(&manifest).unwrap();
    text.push_str("s0.tsv\tgone.tsv\ta0.tsv\n");
    fs::write(&manifest, text).unwrap();
    ok(&symtrack(&["eval", "--manifest", "manifest.tsv", "--out", "r.json"], dir.path()));
    let report = read_json(&dir.path().join("r.json"));
    let pieces = report["pieces"].as_array().unwrap();
    assert_eq!(pieces.len(), 4);
    assert_eq!(pieces[3]["status"], "error");
    assert!(pieces[3]["error"].as_str().unwrap().contains("gone.tsv"));
    assert_eq!(report["summary"]["pieces"], 3);
}

#[test]
fn grid_columns_and_singleton() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    corpus(d, 2);
    fs::write(d.join("grid.txt"), "w = 10, 20, 40\nc = 0.5, 2\ndw0 = 1, 2\n").unwrap();
    ok(&symtrack(&["grid", "--manifest", "manifest.tsv", "--grid", "grid.txt", "--out", "g.tsv"], d));
    let json = read_json(&d.join("g.json"));
    assert_eq!(json["columns"].as_array().unwrap().len(), 12);
    let tsv = fs::read_to_string(d.join("g.tsv")).unwrap();
    assert_eq!(tsv.lines().next().unwrap().split('\t').count(), 13);

    fs::write(d.join("one.txt"), "w = 20\n").unwrap();
    ok(&symtrack(&["grid", "--manifest", "manifest.tsv", "--grid", "one.txt", "--out", "one.tsv"], d));
    ok(&symtrack(&["eval", "--manifest", "manifest.tsv", "--out", "r.json"], d));
    let grid = read_json(&d.join("one.json"));
    let eval = read_json(&d.join("r.json"));
    assert_eq!(grid["columns"][0]["summary"], eval["summary"]);

    fs::write(d.join("empty.txt"), "w =\n").unwrap();
    let bad = symtrack(&["grid", "--manifest", "manifest.tsv", "--grid", "empty.txt", "--out", "x.tsv"], d);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn synth_is_deterministic_and_validates_rates() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&symtrack(&["gen-score", "--onsets", "60", "--seed", "9", "--out", "s.tsv"], d));
    let args = |p: &'static str, a: &'static str| {
        vec![
            "synth", "--score", "s.tsv", "--tempo-curve", "0:0.5,30:0.4", "--jitter-ms", "20", "--chord-spread-ms",
            "10", "--insert-rate", "0.05", "--delete-rate", "0.05", "--seed", "42", "--out-perf", p, "--out-align", a,
        ]
    };
    ok(&symtrack(&args("p1.tsv", "a1.tsv"), d));
    ok(&symtrack(&args("p2.tsv", "a2.tsv"), d));
    assert_eq!(fs::read(d.join("p1.tsv")).unwrap(), fs::read(d.join("p2.tsv")).unwrap());
    assert_eq!(fs::read(d.join("a1.tsv")).unwrap(), fs::read(d.join("a2.tsv")).unwrap());

    let bad = symtrack(
        &["synth", "--score", "s.tsv", "--insert-rate", "2.0", "--out-perf", "x.tsv", "--out-align", "y.tsv"],
        d,
    );
    assert_eq!(bad.status.code(), Some(1));
    assert!(!d.join("x.tsv").exists());
}
