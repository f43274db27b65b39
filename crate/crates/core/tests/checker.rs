use flcsp_core::checker::*;
use flcsp_core::corpus::load_case;
use flcsp_core::cspir::{parse_model, Assertion, CspModel};

fn model(src: &str) -> CspModel {
    parse_model(src).unwrap_or_else(|e| panic!("{e}\n{src}"))
}

fn verdicts(src: &str) -> Vec<(Outcome, Option<TraceKind>)> {
    let m = model(src);
    let c = Checker::new(&m).unwrap();
    let g = c.explore(&ExploreOptions::default()).unwrap();
    m.assertions
        .iter()
        .map(|a| {
            let v = c.check(&g, a).unwrap();
            assert!(c.confirm(&v).unwrap(), "{a}: trace does not confirm");
            (v.outcome, v.trace_kind)
        })
        .collect()
}

const ASSERTS: &str = "#define Done (done == 1);\n#assert Sys() deadlockfree;\n#assert Sys() reaches Done;\n#assert Sys() |= []<> Done;\n";

#[test]
fn handshake_over_a_buffered_channel_holds() {
    let src = format!(
        "var done = 0;\nchannel c 1;\nA() = c!1 -> Skip;\nB() = c?x -> {{done = 1}} -> Skip;\nSys() = A(); B();\n{ASSERTS}"
    );
    let v = verdicts(&src);
    assert!(v.iter().all(|(o, _)| *o == Outcome::Holds), "{v:?}");
}

#[test]
fn lone_receiver_deadlocks() {
    let src = format!("var done = 0;\nchannel c[2] 1;\nP(i) = c[i]?x -> {{done = 1}} -> Skip;\nSys() = |||i:{{0..1}}@P(i);\n{ASSERTS}");
    let v = verdicts(&src);
    assert_eq!(v[0], (Outcome::Violated, Some(TraceKind::Deadlock)));
    assert_eq!(v[1].0, Outcome::Violated);
    assert_eq!(v[2], (Outcome::Violated, Some(TraceKind::TerminalViolation)));
}

#[test]
fn self_loop_without_progress_is_a_lasso() {
    let src = format!("var done = 0;\nP() = {{done = 0}} -> P();\nSys() = |||i:{{0..0}}@P();\n{ASSERTS}");
    let v = verdicts(&src);
    assert_eq!(v[0].0, Outcome::Holds);
    assert_eq!(v[1].0, Outcome::Violated);
    assert_eq!(v[2], (Outcome::Violated, Some(TraceKind::Lasso)));
    // The data operation and the call unfolding are separate steps.
    let m = model(&src);
    let c = Checker::new(&m).unwrap();
    let g = c.explore(&ExploreOptions::default()).unwrap();
    let trace = c.check(&g, &m.assertions[2]).unwrap().trace.unwrap();
    let cycle = trace.steps.len() - trace.cycle_start.unwrap();
    assert_eq!((g.num_states(), cycle), (2, 2));
}

#[test]
fn loop_that_eventually_sets_the_flag_holds() {
    let src = format!(
        "var done = 0;\nvar n = 0;\nP() = if (n < 3) {{ {{n = n + 1}} -> P() }} else {{ {{done = 1}} -> Skip }};\nSys() = |||i:{{0..0}}@P();\n{ASSERTS}"
    );
    let v = verdicts(&src);
    assert!(v.iter().all(|(o, _)| *o == Outcome::Holds), "{v:?}");
}

#[test]
fn flag_reached_on_one_branch_only() {
    // Two racing writers: whichever runs last decides the final value.
    let src = format!(
        "var done = 0;\nP(i) = {{done = i}} -> Skip;\nSys() = |||i:{{0..1}}@P(i);\n{ASSERTS}"
    );
    let v = verdicts(&src);
    assert_eq!(v[0].0, Outcome::Holds);
    assert_eq!(v[1], (Outcome::Holds, Some(TraceKind::Witness)));
    assert_eq!(v[2], (Outcome::Violated, Some(TraceKind::TerminalViolation)));
}

#[test]
fn straight_line_graph_has_exact_counts() {
    // Three assignments and the final Skip: five states in a line.
    let m = model("var x = 0;\nP() = {x = 1} -> {x = 2} -> {x = 3} -> Skip;\nSys() = |||i:{0..0}@P();\n#assert Sys() deadlockfree;\n");
    let c = Checker::new(&m).unwrap();
    let g = c.explore(&ExploreOptions::default()).unwrap();
    assert_eq!((g.num_states(), g.num_edges()), (5, 4));
    assert_eq!(g.terminal_states().count(), 1);
}

#[test]
fn replay_rejects_a_tampered_trace() {
    let src = format!("var done = 0;\nchannel c[2] 1;\nP(i) = c[i]?x -> {{done = 1}} -> Skip;\nSys() = |||i:{{0..1}}@P(i);\n{ASSERTS}");
    let m = model(&src);
    let c = Checker::new(&m).unwrap();
    let g = c.explore(&ExploreOptions::default()).unwrap();
    let lasso = model(&format!("var done = 0;\nP() = {{done = 0}} -> P();\nSys() = |||i:{{0..0}}@P();\n{ASSERTS}"));
    let lc = Checker::new(&lasso).unwrap();
    let lg = lc.explore(&ExploreOptions::default()).unwrap();
    let v = lc.check(&lg, &lasso.assertions[2]).unwrap();
    let mut steps = v.trace.unwrap().steps;
    assert!(lc.replay(&steps).is_ok());
    steps[0].component = 7;
    assert_eq!(lc.replay(&steps), Err(CheckError::ReplayDivergence { step: 0 }));
    let d = c.check(&g, &m.assertions[0]).unwrap();
    assert!(c.replay(&d.trace.unwrap().steps).is_ok());
}

#[test]
fn state_limit_is_enforced() {
    let m = parse_model(load_case("centralized").unwrap().golden).unwrap();
    let c = Checker::new(&m).unwrap();
    let opts = ExploreOptions {
        state_limit: 10,
        ..Default::default()
    };
    assert_eq!(
        c.explore(&opts).unwrap_err(),
        CheckError::StateLimitExceeded { limit: 10 }
    );
    assert!(matches!(
        c.verify(&m.assertions, &opts),
        Err(CheckError::StateLimitExceeded { limit: 10 })
    ));
}

#[test]
fn centralized_initial_state_has_one_move_per_node() {
    let m = parse_model(load_case("centralized").unwrap().golden).unwrap();
    let c = Checker::new(&m).unwrap();
    let s = c.initial_state().unwrap();
    assert_eq!(s.num_components(), 3);
    assert_eq!(c.enabled(&s).unwrap().len(), 3);
}

#[test]
fn centralized_golden_baseline() {
    let m = parse_model(load_case("centralized").unwrap().golden).unwrap();
    let c = Checker::new(&m).unwrap();
    let r = c.verify(&m.assertions, &ExploreOptions::default()).unwrap();
    assert!(r.all_hold(), "{:?}", r.verdicts);
    assert!(r.complete);
    assert_eq!((r.states, r.edges), (5_751, 15_439));
    let rev = c
        .verify(
            &m.assertions,
            &ExploreOptions {
                reverse_components: true,
                ..Default::default()
            },
        )
        .unwrap();
    assert_eq!((rev.states, rev.edges), (r.states, r.edges));
    let dfs = c.search_deadlock(&m.assertions[0], &ExploreOptions::default()).unwrap();
    assert_eq!((dfs.outcome, dfs.states, dfs.edges), (Outcome::Holds, r.states, r.edges));
}

#[test]
fn centralized_invariants_hold_on_every_edge() {
    let m = parse_model(load_case("centralized").unwrap().golden).unwrap();
    let c = Checker::new(&m).unwrap();
    let g = c.explore(&ExploreOptions::default()).unwrap();
    // Capacities come from the declarations, not from the checker.
    let env = flcsp_core::cspir::eval_constants(&m).unwrap();
    let caps: Vec<usize> = c
        .channel_instances()
        .iter()
        .map(|(name, _)| {
            let base = name.split('[').next().unwrap();
            let ch = m.channel(base).unwrap();
            flcsp_core::cspir::eval_const(&ch.capacity, &env).unwrap() as usize
        })
        .collect();
    assert_eq!(caps, [2, 2, 2, 2, 2, 2]);
    for id in 0..g.num_states() {
        let s = g.state(id);
        for (inst, cap) in caps.iter().enumerate() {
            assert!(c.buffer_len(&s, inst) <= *cap);
        }
        let t = c.var_value(&s, "terminated", None).unwrap();
        for (_, next) in g.successors(id) {
            let t2 = c.var_value(&g.state(next), "terminated", None).unwrap();
            assert!(t == 0 || t2 == 1, "terminated went back to False");
        }
    }
}

#[test]
fn deadlock_search_stops_early_on_the_missing_increment_mutant() {
    let case = load_case("decentralized").unwrap();
    let spec = case.mutants.iter().find(|m| m.name == "missing-increment").unwrap();
    let m = parse_model(&spec.apply(case.golden)).unwrap();
    let c = Checker::new(&m).unwrap();
    let r = c.verify(&m.assertions, &ExploreOptions::default()).unwrap();
    assert!(r.any_violated());
    assert!(!r.complete);
    for v in &r.verdicts {
        assert!(c.confirm(v).unwrap(), "{}", v.assertion);
    }
    assert!(matches!(r.verdicts[0].assertion, Assertion::DeadlockFree { .. }));
    assert_eq!(r.verdicts[0].trace_kind, Some(TraceKind::Deadlock));
}

#[test]
fn partial_graphs_refuse_unsupported_verdicts() {
    // Component 1 races component 0: if it reads the flag first it blocks
    // forever, otherwise it runs a longer chain that BFS has not finished
    // when the deadlock turns up.
    let src = format!(
        "var done = 0;\nvar flag = 0;\nvar n = 0;\nchannel c 1;\nP(i) = if (i == 0) {{ {{flag = 1}} -> Skip }} else {{ if (flag == 0) {{ c?x -> Skip }} else {{ {{n = 1}} -> {{n = 2}} -> {{n = 3}} -> {{n = 4}} -> Skip }} }};\nSys() = |||i:{{0..1}}@P(i);\n{ASSERTS}"
    );
    let m = model(&src);
    let c = Checker::new(&m).unwrap();
    let g = c
        .explore(&ExploreOptions {
            stop_at_deadlock: true,
            ..Default::default()
        })
        .unwrap();
    let d = c.check(&g, &m.assertions[0]).unwrap();
    assert_eq!(d.outcome, Outcome::Violated);
    assert!(!g.complete);
    assert!(c.confirm(&d).unwrap());
    // reaches and []<> can only be refuted with a trace here.
    assert!(matches!(c.check(&g, &m.assertions[1]), Err(CheckError::Incomplete { .. })));
    let full = c.explore(&ExploreOptions::default()).unwrap();
    assert!(full.complete && full.num_states() > g.num_states());
}
