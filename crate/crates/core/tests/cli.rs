//! End-to-end checks of the command-line interface: artifacts round-trip
//! through their own parsers, exit codes match the contract, and the
//! benchmark emitter is deterministic.

use std::path::Path;
use std::process::Command;

fn dpqa() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dpqa"))
}

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

#[test]
fn compile_fixture_optimal() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("prog.json");
    let stats = dir.path().join("stats.json");
    let status = dpqa()
        .args([
            "compile",
            &fixture("prism_6q.json"),
            "--arch",
            &fixture("arch_default.json"),
            "--mode",
            "optimal",
            "--out",
            out.to_str().unwrap(),
            "--stats",
            stats.to_str().unwrap(),
        ])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let stats: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&stats).unwrap()).unwrap();
    assert_eq!(stats["stages"], 4);
    assert_eq!(stats["verifier_clean"], true);
    // The written program parses back and passes `verify`.
    let program = std::fs::read_to_string(&out).unwrap();
    dpqa_core::codegen::Program::from_json(&program).unwrap();
    let status = dpqa()
        .args([
            "verify",
            out.to_str().unwrap(),
            &fixture("prism_6q.json"),
            &fixture("arch_default.json"),
        ])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
}

#[test]
fn compile_unreadable_path_exits_4() {
    let status = dpqa().args(["compile", "/definitely/not/here.json"]).status().unwrap();
    assert_eq!(status.code(), Some(4));
}

#[test]
fn bench_corpus_regeneration_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for d in [&a, &b] {
        let status = dpqa()
            .args([
                "bench",
                "--sizes",
                "10",
                "--count",
                "10",
                "--seed",
                "3",
                "--out-dir",
                d.to_str().unwrap(),
            ])
            .status()
            .unwrap();
        assert_eq!(status.code(), Some(0));
    }
    for idx in 0..10 {
        let fa = std::fs::read(a.join(format!("10_{idx}.json"))).unwrap();
        let fb = std::fs::read(b.join(format!("10_{idx}.json"))).unwrap();
        assert_eq!(fa, fb, "corpus file 10_{idx} differs between runs");
    }
}

#[test]
fn bench_infeasible_size_fails() {
    let dir = tempfile::tempdir().unwrap();
    let status = dpqa()
        .args(["bench", "--sizes", "3", "--count", "1", "--out-dir", dir.path().to_str().unwrap()])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(4));
}

#[test]
fn fidelity_report_parses() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("prog.json");
    let status = dpqa()
        .args([
            "compile",
            &fixture("prism_6q.json"),
            "--mode",
            "optimal",
            "--out",
            out.to_str().unwrap(),
            "--stats",
            dir.path().join("s.json").to_str().unwrap(),
        ])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let output = dpqa()
        .args([
            "fidelity",
            out.to_str().unwrap(),
            &fixture("prism_6q.json"),
            &fixture("arch_default.json"),
            "--laser",
            "global",
        ])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&output.stdout).unwrap();
    // Global exposure: N * S / 2 = 6 * 4 / 2.
    assert_eq!(report["effective_gates"], 12.0);
}

#[test]
fn animate_fencepost() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("prog.json");
    dpqa()
        .args([
            "compile",
            &fixture("prism_6q.json"),
            "--mode",
            "optimal",
            "--out",
            out.to_str().unwrap(),
            "--stats",
            dir.path().join("s.json").to_str().unwrap(),
        ])
        .status()
        .unwrap();
    let frames_path = dir.path().join("frames.json");
    let status = dpqa()
        .args([
            "animate",
            out.to_str().unwrap(),
            &fixture("arch_default.json"),
            "--frames-per-move",
            "4",
            "--out",
            frames_path.to_str().unwrap(),
        ])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let frames: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&frames_path).unwrap()).unwrap();
    let program = dpqa_core::codegen::Program::from_json(&std::fs::read_to_string(&out).unwrap())
        .unwrap();
    let n_moves = program
        .instructions
        .iter()
        .filter(|i| matches!(i, dpqa_core::codegen::Instruction::Move { .. }))
        .count();
    let move_frames = frames
        .as_array()
        .unwrap()
        .iter()
        .filter(|f| f["event"] == "move")
        .count();
    // 4 frames per move plus the endpoint: 5 each.
    assert_eq!(move_frames, 5 * n_moves);
}

#[test]
fn dump_smt_golden_stability() {
    let dir = tempfile::tempdir().unwrap();
    let mut dumps = Vec::new();
    for name in ["a.smt2", "b.smt2"] {
        let smt = dir.path().join(name);
        let status = dpqa()
            .args([
                "compile",
                &fixture("prism_6q.json"),
                "--mode",
                "optimal",
                "--out",
                dir.path().join("p.json").to_str().unwrap(),
                "--stats",
                dir.path().join("s.json").to_str().unwrap(),
                "--dump-smt",
                smt.to_str().unwrap(),
            ])
            .status()
            .unwrap();
        assert_eq!(status.code(), Some(0));
        dumps.push(std::fs::read_to_string(&smt).unwrap());
    }
    assert_eq!(dumps[0], dumps[1], "smt dump must be bit-stable");
    assert!(dumps[0].starts_with("(set-logic QF_LIA)\n"));
}
