use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_tileforge"));
    c.env_remove("TILEFORGE_MAX_TILES");
    c
}

fn run(args: &[&str], stdin: &[u8]) -> Output {
    let mut child = bin()
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(stdin).unwrap();
    child.wait_with_output().unwrap()
}

fn ok(args: &[&str], stdin: &[u8]) -> Vec<u8> {
    let out = run(args, stdin);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out.stdout
}

fn p(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

#[test]
fn piped_equals_staged() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let prog = ok(&["gen", "eff", "--n", "3"], b"");
    let ts = ok(&["compile"], &prog);
    let asm = ok(&["simulate", "--mode", "permissive"], &ts);
    let report = ok(&["analyze"], &asm);

    ok(&["gen", "eff", "--n", "3", "-o", &p(d, "prog.tas")], b"");
    ok(&["compile", &p(d, "prog.tas"), "-o", &p(d, "ts.json"), "--core-out", &p(d, "core.tas")], b"");
    ok(&["simulate", &p(d, "ts.json"), "--mode", "permissive", "-o", &p(d, "asm.json")], b"");
    ok(&["analyze", &p(d, "asm.json"), &p(d, "ts.json"), "--report", &p(d, "report.json")], b"");

    assert_eq!(std::fs::read(d.join("prog.tas")).unwrap(), prog);
    assert_eq!(std::fs::read(d.join("ts.json")).unwrap(), ts);
    assert_eq!(std::fs::read(d.join("asm.json")).unwrap(), asm);
    assert_eq!(std::fs::read(d.join("report.json")).unwrap(), report);

    let core = std::fs::read(d.join("core.tas")).unwrap();
    let core_ts = ok(&["compile"], &core);
    let a: Value = serde_json::from_slice(&ts).unwrap();
    let b: Value = serde_json::from_slice(&core_ts).unwrap();
    assert_eq!(a["tiles"].as_array().unwrap().len(), b["tiles"].as_array().unwrap().len());
}

#[test]
fn eff_17_report() {
    let prog = ok(&["gen", "eff", "--n", "17"], b"");
    let ts = ok(&["compile"], &prog);
    let asm = ok(&["simulate", "--mode", "permissive"], &ts);
    let r: Value = serde_json::from_slice(&ok(&["analyze"], &asm)).unwrap();
    assert_eq!(r["tiles"], 106);
    assert_eq!(r["y_extent"], 112);
    assert_eq!(r["efficient"], true);
}

#[test]
fn strict_conflict_exits_one() {
    let ts = br#"{"geometry": "z2", "tiles": [
        {"id": 0, "glues": {"N": [1, 1], "E": [0, 0], "S": [0, 0], "W": [0, 0]}},
        {"id": 1, "glues": {"N": [0, 0], "E": [0, 0], "S": [1, 1], "W": [0, 0]}},
        {"id": 2, "glues": {"N": [0, 0], "E": [2, 1], "S": [1, 1], "W": [0, 0]}}],
        "seed": [{"pos": [0, 0], "tile": 0}]}"#;
    let out = run(&["simulate"], ts);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("conflict at"));
    let out = run(&["simulate", "--mode", "permissive"], ts);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&["simulate", "--frobnicate"], b"").status.code(), Some(2));
    assert_eq!(run(&["compile", "--geometry", "torus"], b"seed 0 0").status.code(), Some(2));
    assert_eq!(run(&["compile", "/nonexistent/prog.tas"], b"").status.code(), Some(2));
    assert_eq!(run(&["gen", "general", "--n", "3", "--h", "2"], b"").status.code(), Some(2));
}

#[test]
fn unbound_identifier_exits_one() {
    let out = run(&["compile"], b"seed 0 0\nmove N\nbind E nowhere\n");
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nowhere"));
}

#[test]
fn max_tiles_from_environment() {
    let ts = br#"{"geometry": "z2", "tiles": [
        {"id": 0, "glues": {"N": [1, 1], "E": [0, 0], "S": [1, 1], "W": [0, 0]}}],
        "seed": [{"pos": [0, 0], "tile": 0}]}"#;
    let mut child = bin()
        .env("TILEFORGE_MAX_TILES", "7")
        .arg("simulate")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(ts).unwrap();
    let out = child.wait_with_output().unwrap();
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["placements"].as_array().unwrap().len(), 7);
    assert_eq!(v["status"], "truncated");
}

#[test]
fn nfa_grammar_and_exhaustive() {
    let nfa = br#"{"states": ["p", "q"], "alphabet": ["a"], "delta": [["p", "a", "q"], ["q", "a", "q"]],
        "start": "p", "finals": ["q"]}"#;
    let ts = ok(&["nfa2tas"], nfa);
    let grammar = String::from_utf8(ok(&["grammar"], &ts)).unwrap();
    assert!(grammar.starts_with("S -> Σ("));
    let all = ok(&["simulate", "--mode", "exhaustive", "--max-tiles", "6"], &ts);
    let v: Value = serde_json::from_slice(&all).unwrap();
    assert_eq!(v["assemblies"].as_array().unwrap().len(), 4);
    let r: Value = serde_json::from_slice(&ok(&["analyze"], &all)).unwrap();
    assert_eq!(r["assemblies"], 4);
    assert_eq!(r["diameter"], 2);
}

#[test]
fn decompile_round_trip() {
    let ts = ok(&["compile"], &ok(&["gen", "eff"], b""));
    let prog = ok(&["decompile"], &ts);
    let back = ok(&["compile"], &prog);
    let a: Value = serde_json::from_slice(&ts).unwrap();
    let b: Value = serde_json::from_slice(&back).unwrap();
    assert_eq!(a["tiles"].as_array().unwrap().len(), 38);
    assert_eq!(b["tiles"].as_array().unwrap().len(), 38);
}

#[test]
fn render_counts_tiles() {
    let asm = ok(&["simulate", "--mode", "permissive"], &ok(&["compile"], &ok(&["gen", "eff"], b"")));
    let v: Value = serde_json::from_slice(&asm).unwrap();
    let n = v["placements"].as_array().unwrap().len();
    let svg = String::from_utf8(ok(&["render", "--svg", "--show-glues"], &asm)).unwrap();
    assert_eq!(svg.matches("<rect").count(), n);
    assert_eq!(ok(&["render", "--svg", "--show-glues"], &asm), svg.as_bytes());
    let tikz = String::from_utf8(ok(&["render", "--tikz"], &asm)).unwrap();
    assert_eq!(tikz.matches("rectangle").count(), n);
    assert_eq!(run(&["render", "--rotate", "45"], &asm).status.code(), Some(2));
}

#[test]
fn eff_stages_render_four_pictures() {
    let dir = tempfile::tempdir().unwrap();
    let stages = p(dir.path(), "stages.json");
    let prog = ok(&["gen", "eff", "--n", "3", "--stages", &stages], b"");
    let asm = ok(&["simulate", "--mode", "permissive"], &ok(&["compile"], &prog));
    let tikz = String::from_utf8(ok(&["render", "--tikz", "--stages", &stages], &asm)).unwrap();
    assert_eq!(tikz.matches("\\begin{tikzpicture}").count(), 4);
}
