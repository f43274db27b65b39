use std::process::Command;

fn flcsp() -> Command {
    Command::new(env!("CARGO_BIN_EXE_flcsp"))
}

#[test]
fn full_corpus_verifies() {
    let out = flcsp().arg("verify-corpus").output().unwrap();
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert_eq!(out.status.code(), Some(0), "{stdout}");
    assert!(stdout.contains("2 case(s), 8 mutant(s), all expectations met"), "{stdout}");
    assert!(stdout.contains("drain-in-phase2"));
}

#[test]
fn exit_codes_reach_the_process() {
    let dir = tempfile::tempdir().unwrap();
    let st = flcsp().args(["export", "decentralized"]).arg(dir.path()).status().unwrap();
    assert_eq!(st.code(), Some(0));
    let out = flcsp()
        .arg("check")
        .arg(dir.path().join("mutant-missing-increment.csp"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4));
    let st = flcsp().args(["check", "--state-limit", "5"]).arg(dir.path().join("golden.csp")).status().unwrap();
    assert_eq!(st.code(), Some(5));
    let out = flcsp().arg("--help").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("verify-corpus"));
}
