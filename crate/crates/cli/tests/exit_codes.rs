use std::path::Path;
use std::process::{Command, Output};

fn legibility(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_legibility")).args(args).output().unwrap()
}

fn code(args: &[&str]) -> i32 {
    legibility(args).status.code().unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.jsonl");
    assert_eq!(code(&["simulate", "--scenario", "turn", "--cue", "lights", "--mode", "sideways", "--out", p(&out)]), 2);
    assert_eq!(code(&["simulate", "--scenario", "turn", "--cue", "lights", "--out", p(&out)]), 2);
    assert_eq!(code(&["simulate", "--scenario", "turn", "--cue", "none", "--mode", "path", "--out", p(&out)]), 2);
    assert_eq!(code(&["analyze", "--out", p(&out)]), 2);
    assert_eq!(code(&["frobnicate"]), 2);
    assert!(!out.exists());
    assert_eq!(code(&["--help"]), 0);
}

#[test]
fn invalid_rating_exits_3_naming_the_row() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("r.csv");
    let good = dir.path().join("good.csv");
    assert_eq!(code(&["analyze", "--synth", "--participants", "4", "--write-responses", p(&good), "--out", p(&dir.path().join("x.json"))]), 0);
    let text = std::fs::read_to_string(&good).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let mut fields: Vec<&str> = lines[3].split(',').collect();
    fields[5] = "0";
    lines[3] = fields.join(",");
    std::fs::write(&csv, lines.join("\n")).unwrap();

    let out = legibility(&["analyze", "--responses", p(&csv), "--out", p(&dir.path().join("r.json"))]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 4"), "{err}");
}

#[test]
fn missing_files_fail_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let frames = dir.path().join("frames");
    let c = code(&["render", "--trace", p(&dir.path().join("nope.jsonl")), "--out", p(&frames)]);
    assert_ne!(c, 0);
    assert!(!frames.exists());
    let c = code(&["simulate", "--scenario", p(&dir.path().join("nope.scenario")), "--cue", "none", "--out", p(&dir.path().join("t"))]);
    assert_ne!(c, 0);
}

#[test]
fn malformed_trace_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("bad.jsonl");
    std::fs::write(&trace, "{\"schema\":\"something-else\"}\n").unwrap();
    assert_eq!(code(&["render", "--trace", p(&trace), "--out", p(&dir.path().join("f"))]), 3);
}

#[test]
fn simulate_render_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("t.jsonl");
    let out = legibility(&["simulate", "--scenario", "straight", "--cue", "arrows", "--mode", "goal", "--out", p(&trace)]);
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("100 ticks"), "{stdout}");

    let frames = dir.path().join("frames");
    assert_eq!(code(&["render", "--trace", p(&trace), "--out", p(&frames), "--stride", "50"]), 0);
    let n = std::fs::read_dir(&frames).unwrap().count();
    assert!(n > 5, "{n}");

    let scen = dir.path().join("scen");
    assert_eq!(code(&["scenarios", "--out", p(&scen)]), 0);
    let file = scen.join("straight.scenario");
    assert_eq!(code(&["render", "--trace", p(&trace), "--scenario", p(&file), "--format", "gif", "--stride", "50", "--out", p(&dir.path().join("g"))]), 0);
    assert!(dir.path().join("g").join("animation.gif").exists());
}
