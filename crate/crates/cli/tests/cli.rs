use std::fs;
use std::path::Path;

use flcsp_cli::*;
use flcsp_core::checker::{Checker, ExploreOptions, Transition};
use flcsp_core::corpus::{load_case, CorpusCase};
use flcsp_core::cspir::{compare_structural, parse_model, ProcTerm};
use flcsp_core::translate::{translate_source, PipelineError};
use serde_json::Value;

struct Run {
    code: i32,
    out: String,
    err: String,
}

fn flcsp(args: &[&str]) -> Run {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("flcsp").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    Run {
        code,
        out: String::from_utf8(out).unwrap(),
        err: String::from_utf8(err).unwrap(),
    }
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn export(case: &str, dir: &Path) {
    let r = flcsp(&["export", case, p(dir)]);
    assert_eq!(r.code, EXIT_OK, "{}", r.err);
}

#[test]
fn translate_centralized_matches_golden() {
    let dir = tempfile::tempdir().unwrap();
    export("centralized", dir.path());
    let out = dir.path().join("out.csp");
    let r = flcsp(&[
        "translate",
        p(&dir.path().join("source.py")),
        "--config",
        p(&dir.path().join("config.cfg")),
        "-o",
        p(&out),
    ]);
    assert_eq!(r.code, EXIT_OK, "{}", r.err);
    let report: Value = serde_json::from_str(&r.out).unwrap();
    assert_eq!(report["translation"]["ok"], true);
    let got = parse_model(&fs::read_to_string(&out).unwrap()).unwrap();
    let golden = parse_model(&fs::read_to_string(dir.path().join("golden.csp")).unwrap()).unwrap();
    assert!(compare_structural(&got, &golden).equal);
}

#[test]
fn translate_with_flags_only() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("f.py");
    fs::write(&src, load_case("centralized").unwrap().source).unwrap();
    let r = flcsp(&[
        "translate",
        p(&src),
        "--no-nodes",
        "3",
        "--fl-srv-id",
        "0",
        "--no-iterations",
        "3",
    ]);
    assert_eq!(r.code, EXIT_OK, "{}", r.err);
    let got = parse_model(&r.out).unwrap();
    let golden = parse_model(load_case("centralized").unwrap().golden).unwrap();
    assert!(compare_structural(&got, &golden).equal);
}

#[test]
fn translate_rejects_imports_with_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("bad.py");
    fs::write(&src, "import os\ndef f(a, b, c):\n    terminated = 1\n").unwrap();
    let r = flcsp(&["translate", p(&src), "--no-nodes", "2", "--no-iterations", "1"]);
    assert_eq!(r.code, EXIT_INPUT);
    assert!(r.err.contains("import"), "{}", r.err);
    assert!(r.err.contains("line 1"), "{}", r.err);
}

#[test]
fn translate_without_no_nodes_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("f.py");
    fs::write(&src, load_case("centralized").unwrap().source).unwrap();
    let r = flcsp(&["translate", p(&src), "--no-iterations", "3"]);
    assert_eq!(r.code, EXIT_TRANSLATION);
    assert!(r.err.contains("NoNodes"), "{}", r.err);
}

#[test]
fn missing_input_file_exits_2() {
    let r = flcsp(&["check", "/nonexistent/model.csp"]);
    assert_eq!(r.code, EXIT_INPUT);
    let r = flcsp(&["frobnicate"]);
    assert_eq!(r.code, EXIT_INPUT);
}

#[test]
fn check_centralized_golden_holds() {
    let dir = tempfile::tempdir().unwrap();
    export("centralized", dir.path());
    let r = flcsp(&["check", p(&dir.path().join("golden.csp"))]);
    assert_eq!(r.code, EXIT_OK, "{}{}", r.out, r.err);
    let v: Value = serde_json::from_str(&r.out).unwrap();
    // Top-level fields appear in a fixed order.
    let keys = ["command", "inputs", "translation", "exploration", "verdicts", "error", "exit_code"];
    let positions: Vec<usize> = keys
        .iter()
        .map(|k| r.out.find(&format!("\n  \"{k}\":")).unwrap_or_else(|| panic!("{k}")))
        .collect();
    assert!(positions.windows(2).all(|w| w[0] < w[1]), "{positions:?}");
    let results: Vec<&str> = v["verdicts"].as_array().unwrap().iter().map(|x| x["result"].as_str().unwrap()).collect();
    assert_eq!(results, ["holds", "holds", "holds"]);
    assert_eq!(v["exploration"]["states"], 5751);
    assert_eq!(v["exit_code"], 0);

    let only = flcsp(&["check", p(&dir.path().join("golden.csp")), "--assert", "liveness"]);
    let v: Value = serde_json::from_str(&only.out).unwrap();
    assert_eq!(v["verdicts"].as_array().unwrap().len(), 1);
}

fn strip_elapsed(v: &mut Value) {
    match v {
        Value::Object(m) => {
            m.remove("elapsed_ms");
            m.values_mut().for_each(strip_elapsed);
        }
        Value::Array(a) => a.iter_mut().for_each(strip_elapsed),
        _ => {}
    }
}

#[test]
fn check_reports_are_stable() {
    let dir = tempfile::tempdir().unwrap();
    export("decentralized", dir.path());
    let model = dir.path().join("mutant-missing-increment.csp");
    let a = flcsp(&["check", p(&model)]);
    let b = flcsp(&["check", p(&model)]);
    assert_eq!(a.code, b.code);
    let (mut va, mut vb): (Value, Value) = (serde_json::from_str(&a.out).unwrap(), serde_json::from_str(&b.out).unwrap());
    strip_elapsed(&mut va);
    strip_elapsed(&mut vb);
    assert_eq!(va, vb);
}

#[test]
fn check_mutant_prints_a_replayable_trace() {
    let dir = tempfile::tempdir().unwrap();
    export("decentralized", dir.path());
    let path = dir.path().join("mutant-missing-increment.csp");
    let r = flcsp(&["check", p(&path)]);
    assert_eq!(r.code, EXIT_VIOLATION, "{}", r.err);
    let v: Value = serde_json::from_str(&r.out).unwrap();
    let m = parse_model(&fs::read_to_string(&path).unwrap()).unwrap();
    let checker = Checker::new(&m).unwrap();
    let mut traces = 0;
    for verdict in v["verdicts"].as_array().unwrap() {
        let Some(trace) = verdict.get("trace") else { continue };
        let steps: Vec<Transition> = serde_json::from_value(trace.clone()).unwrap();
        let end = checker.replay(&steps).unwrap();
        if verdict["trace_kind"] == "deadlock" {
            assert!(checker.enabled(&end).unwrap().is_empty());
            assert!(!end.all_terminated());
        }
        traces += 1;
    }
    assert!(traces >= 1);
    assert!(v["verdicts"].as_array().unwrap().iter().any(|x| x["trace_kind"] == "deadlock" || x["trace_kind"] == "lasso"));
}

#[test]
fn state_limit_exits_5() {
    let dir = tempfile::tempdir().unwrap();
    export("decentralized", dir.path());
    let r = flcsp(&["check", p(&dir.path().join("golden.csp")), "--state-limit", "10"]);
    assert_eq!(r.code, EXIT_RESOURCE);
    let v: Value = serde_json::from_str(&r.out).unwrap();
    assert!(v["error"].as_str().unwrap().contains("state limit"));
}

#[test]
fn check_rejects_unparsable_models() {
    let dir = tempfile::tempdir().unwrap();
    export("centralized", dir.path());
    let r = flcsp(&["check", p(&dir.path().join("mutant-arrow-for-semicolon-broadcast.csp"))]);
    assert_eq!(r.code, EXIT_INPUT);
    assert!(r.err.contains("line 59"), "{}", r.err);
}

#[test]
fn verify_corpus_single_case() {
    let r = flcsp(&["verify-corpus", "--case", "centralized"]);
    assert_eq!(r.code, EXIT_OK, "{}", r.out);
    assert!(r.out.lines().skip(1).filter(|l| !l.contains("case(s)")).all(|l| l.starts_with("centralized ")));
    assert!(r.out.contains("1 case(s), 2 mutant(s), all expectations met"), "{}", r.out);
    assert_eq!(flcsp(&["verify-corpus", "--case", "bogus"]).code, EXIT_INPUT);
}

#[test]
fn verify_corpus_detects_a_broken_broadcast_template() {
    fn sabotaged(case: &CorpusCase) -> Result<flcsp_core::cspir::CspModel, PipelineError> {
        let mut m = translate_source(case.source, &case.config)?;
        let t = m.processes.iter_mut().find(|p| p.name == "BroadcastMsgT").unwrap();
        // Drop the skip-self guard around the send.
        if let ProcTerm::Cond { then, .. } = &mut t.body {
            if let ProcTerm::Seq(first, _) = &mut **then {
                if let ProcTerm::Cond { then: send, .. } = &**first {
                    *first = send.clone();
                }
            }
        }
        Ok(m)
    }
    let mut out = Vec::new();
    let code = verify_corpus_with(Some("centralized"), &ExploreOptions::default(), &sabotaged, &mut out).unwrap();
    let out = String::from_utf8(out).unwrap();
    assert_eq!(code, EXIT_VIOLATION);
    assert!(out.contains("BroadcastMsgT"), "{out}");
    assert!(out.contains("1 expectation(s) not met"), "{out}");
}

#[test]
fn export_refuses_non_empty_directories() {
    let dir = tempfile::tempdir().unwrap();
    let r = flcsp(&["export", "decentralized", p(dir.path())]);
    assert_eq!(r.code, EXIT_OK);
    let files = fs::read_dir(dir.path()).unwrap().count();
    assert_eq!(files, 9);
    assert_eq!(flcsp(&["export", "decentralized", p(dir.path())]).code, EXIT_INPUT);
    assert_eq!(flcsp(&["export", "decentralized", p(dir.path()), "--force"]).code, EXIT_OK);
    assert_eq!(flcsp(&["export", "bogus", p(&dir.path().join("x"))]).code, EXIT_INPUT);
}
