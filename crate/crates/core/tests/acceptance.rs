//! Acceptance suite: one PASS/FAIL line per criterion, with pinned
//! tolerances and runtime budgets. Exits non-zero if any criterion fails.

mod common;

use std::time::{Duration, Instant};

use flcsp_core::checker::{Checker, ExploreOptions, Outcome, StateGraph, Verdict};
use flcsp_core::corpus::{load_case, load_mutants, CorpusCase, ExpectedEffect};
use flcsp_core::cspir::{
    compare_structural, eval_const, eval_constants, parse_model, print_model, CspModel,
};
use flcsp_core::translate::translate_source;

use common::{generated_config, random_program};

/// Pinned exhaustive-exploration baselines: (states, edges).
const CENTRALIZED_BASELINE: (usize, usize) = (5_751, 15_439);
const DECENTRALIZED_BASELINE: (usize, usize) = (4_032_170, 11_789_862);

const TRANSLATION_BUDGET: Duration = Duration::from_secs(1);
const VERIFICATION_BUDGET: Duration = Duration::from_secs(60);
const GENERATED_PROGRAMS: u64 = 100;

type CriterionResult = Result<String, String>;

struct Report {
    failures: usize,
}

impl Report {
    fn line(&mut self, id: &str, title: &str, elapsed: Duration, result: CriterionResult) {
        let secs = elapsed.as_secs_f64();
        match result {
            Ok(detail) => println!("PASS  {id:<3} {title} ({secs:.2} s): {detail}"),
            Err(detail) => {
                self.failures += 1;
                println!("FAIL  {id:<3} {title} ({secs:.2} s): {detail}");
            }
        }
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let v = f();
    (v, start.elapsed())
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn golden_translation(case: &CorpusCase) -> (CriterionResult, Duration) {
    let (model, elapsed) = timed(|| translate_source(case.source, &case.config));
    let result = (|| {
        let model = model.map_err(|e| format!("translation failed: {e}"))?;
        let golden = parse_model(case.golden).map_err(|e| format!("golden: {e}"))?;
        let eq = compare_structural(&model, &golden);
        ensure(eq.equal, || {
            format!("differs at {}", eq.first_difference.clone().unwrap_or_default())
        })?;
        ensure(elapsed < TRANSLATION_BUDGET, || {
            format!("over the {:?} budget", TRANSLATION_BUDGET)
        })?;
        Ok(format!("canonically equal to the golden ({} processes)", model.processes.len()))
    })();
    (result, elapsed)
}

/// Forward exploration of the translated model plus a verdict per assertion.
struct Verified {
    model: CspModel,
    graph: StateGraph,
    verdicts: Vec<Verdict>,
}

fn verify_case(case: &CorpusCase, baseline: (usize, usize)) -> (Result<Verified, String>, CriterionResult) {
    let (run, elapsed) = timed(|| -> Result<Verified, String> {
        let model = translate_source(case.source, &case.config).map_err(|e| e.to_string())?;
        let checker = Checker::new(&model).map_err(|e| e.to_string())?;
        let graph = checker
            .explore(&ExploreOptions::default())
            .map_err(|e| e.to_string())?;
        let verdicts = model
            .assertions
            .iter()
            .map(|a| checker.check(&graph, a).map_err(|e| e.to_string()))
            .collect::<Result<Vec<_>, _>>()?;
        drop(checker);
        Ok(Verified { model, graph, verdicts })
    });
    let outcome = match &run {
        Err(e) => Err(e.clone()),
        Ok(v) => (|| {
            for (verdict, (assertion, expected)) in v.verdicts.iter().zip(&case.expected_verdicts) {
                ensure(&verdict.assertion == assertion && verdict.outcome == *expected, || {
                    format!("{}: expected {expected:?}, got {:?}", verdict.assertion, verdict.outcome)
                })?;
            }
            ensure(v.verdicts.len() == case.expected_verdicts.len(), || "assertion count".into())?;
            let counts = (v.graph.num_states(), v.graph.num_edges());
            ensure(counts == baseline, || {
                format!("state/edge counts {counts:?} differ from the pinned {baseline:?}")
            })?;
            ensure(elapsed < VERIFICATION_BUDGET, || {
                format!("over the {:?} budget", VERIFICATION_BUDGET)
            })?;
            Ok(format!(
                "deadlockfree, reaches Terminated, []<> Terminated all hold; {} states, {} edges",
                counts.0, counts.1
            ))
        })(),
    };
    (run, outcome)
}

/// Runs every mutant of `case`; violated verdicts are appended to `violations`.
fn mutants(case: &CorpusCase, violations: &mut Vec<(String, CspModel, Verdict)>) -> CriterionResult {
    let mut summary = Vec::new();
    for (spec, (name, text)) in case.mutants.iter().zip(load_mutants(case)) {
        let parsed = parse_model(&text);
        match spec.expected_effect {
            ExpectedEffect::ParseError { line } => {
                let e = match parsed {
                    Ok(_) => return Err(format!("{name}: parsed, expected an error at line {line}")),
                    Err(e) => e,
                };
                ensure(e.line() == Some(line), || format!("{name}: {e} (expected line {line})"))?;
                summary.push(format!("{name}@{line}"));
            }
            ExpectedEffect::PropertyViolation => {
                let m = parsed.map_err(|e| format!("{name}: {e}"))?;
                let checker = Checker::new(&m).map_err(|e| format!("{name}: {e}"))?;
                let report = checker
                    .verify(&m.assertions, &ExploreOptions::default())
                    .map_err(|e| format!("{name}: {e}"))?;
                ensure(report.any_violated(), || format!("{name}: no assertion violated"))?;
                let mut kinds = Vec::new();
                for v in report.verdicts.iter().filter(|v| v.outcome == Outcome::Violated) {
                    ensure(checker.confirm(v).unwrap_or(false), || {
                        format!("{name}: counterexample for {} does not replay", v.assertion)
                    })?;
                    if let Some(k) = v.trace_kind {
                        kinds.push(format!("{k:?}").to_lowercase());
                    }
                    violations.push((format!("{}/{name}", case.name), m.clone(), v.clone()));
                }
                drop(checker);
                summary.push(format!("{name} violated ({})", kinds.join(", ")));
            }
        }
    }
    Ok(summary.join("; "))
}

fn round_trip(model: &CspModel) -> Result<(), String> {
    let text = print_model(model);
    let back = parse_model(&text).map_err(|e| e.to_string())?;
    ensure(&back == model, || "parse(print(m)) != m".into())?;
    ensure(print_model(&back) == text, || "print is not stable".into())
}

fn round_trips() -> CriterionResult {
    for name in ["centralized", "decentralized"] {
        let case = load_case(name).unwrap();
        let golden = parse_model(case.golden).map_err(|e| e.to_string())?;
        round_trip(&golden).map_err(|e| format!("{name} golden: {e}"))?;
    }
    let cfg = generated_config();
    for seed in 0..GENERATED_PROGRAMS {
        let src = random_program(seed);
        let m = translate_source(&src, &cfg).map_err(|e| format!("seed {seed}: {e}"))?;
        round_trip(&m).map_err(|e| format!("seed {seed}: {e}"))?;
    }
    Ok(format!("both goldens and {GENERATED_PROGRAMS} generated translations"))
}

/// Capacity bounds and terminated monotonicity over every reachable state.
fn invariants(v: &Verified) -> Result<(), String> {
    let checker = Checker::new(&v.model).map_err(|e| e.to_string())?;
    let env = eval_constants(&v.model).map_err(|e| e.to_string())?;
    let caps = checker
        .channel_instances()
        .iter()
        .map(|(name, _)| {
            let base = name.split('[').next().unwrap_or(name);
            let ch = v.model.channel(base).ok_or_else(|| format!("no channel {base}"))?;
            eval_const(&ch.capacity, &env)
                .map(|c| c as usize)
                .map_err(|e| e.to_string())
        })
        .collect::<Result<Vec<_>, String>>()?;
    let g = &v.graph;
    for id in 0..g.num_states() {
        let s = g.state(id);
        for (inst, cap) in caps.iter().enumerate() {
            ensure(checker.buffer_len(&s, inst) <= *cap, || {
                format!("state {id}: channel instance {inst} over capacity {cap}")
            })?;
        }
        let t = checker.var_value(&s, "terminated", None).ok_or("no terminated var")?;
        if t != 0 {
            for (_, next) in g.successors(id) {
                let t2 = checker.var_value(&g.state(next), "terminated", None).unwrap_or(0);
                ensure(t2 != 0, || format!("terminated reset on edge {id} -> {next}"))?;
            }
        }
    }
    Ok(())
}

fn reversed(v: &Verified) -> Result<(usize, usize), String> {
    let checker = Checker::new(&v.model).map_err(|e| e.to_string())?;
    let opts = ExploreOptions {
        reverse_components: true,
        ..Default::default()
    };
    let g = checker.explore(&opts).map_err(|e| e.to_string())?;
    let counts = (g.num_states(), g.num_edges());
    ensure(counts == (v.graph.num_states(), v.graph.num_edges()), || {
        format!("reversed order gives {counts:?}")
    })?;
    for (a, forward) in v.model.assertions.iter().zip(&v.verdicts) {
        let r = checker.check(&g, a).map_err(|e| e.to_string())?;
        ensure(r.outcome == forward.outcome, || format!("{a}: verdict changes under reversal"))?;
    }
    Ok(counts)
}

fn main() {
    let mut report = Report { failures: 0 };
    let centralized = load_case("centralized").unwrap();
    let decentralized = load_case("decentralized").unwrap();

    let (r, t) = golden_translation(&centralized);
    report.line("1", "golden translation, centralized", t, r);
    let (r, t) = golden_translation(&decentralized);
    report.line("2", "golden translation, decentralized", t, r);

    let mut property_lines: Vec<(&str, &str, Duration, CriterionResult)> = Vec::new();
    let mut inv_results = Vec::new();
    let mut rev_results = Vec::new();

    for (id, title, case, baseline) in [
        ("3", "verification, centralized", &centralized, CENTRALIZED_BASELINE),
        ("4", "verification, decentralized", &decentralized, DECENTRALIZED_BASELINE),
    ] {
        let start = Instant::now();
        let (run, outcome) = verify_case(case, baseline);
        report.line(id, title, start.elapsed(), outcome);
        // Invariant and reversal checks reuse the forward graph, one case at a time.
        match run {
            Ok(v) => {
                let (inv, t1) = timed(|| invariants(&v));
                inv_results.push((case.name, inv.map(|_| v.graph.num_states()), t1));
                let (rev, t2) = timed(|| reversed(&v));
                rev_results.push((case.name, rev, t2));
            }
            Err(e) => {
                inv_results.push((case.name, Err(e.clone()), Duration::ZERO));
                rev_results.push((case.name, Err(e), Duration::ZERO));
            }
        }
    }

    let mut violations = Vec::new();
    let (r, t) = timed(|| {
        let a = mutants(&centralized, &mut violations)?;
        let b = mutants(&decentralized, &mut violations)?;
        Ok(format!("{a}; {b}"))
    });
    report.line("5", "mutation sensitivity", t, r);

    let (r, t) = timed(round_trips);
    property_lines.push(("6a", "parse/print round trip", t, r));

    let t: Duration = inv_results.iter().map(|x| x.2).sum();
    let r = inv_results
        .into_iter()
        .map(|(name, r, _)| r.map(|n| format!("{name}: {n} states")).map_err(|e| format!("{name}: {e}")))
        .collect::<Result<Vec<_>, _>>()
        .map(|v| format!("capacity and terminated monotonicity hold ({})", v.join(", ")));
    property_lines.push(("6b", "state invariants", t, r));

    let t: Duration = rev_results.iter().map(|x| x.2).sum();
    let r = rev_results
        .into_iter()
        .map(|(name, r, _)| {
            r.map(|(s, e)| format!("{name}: {s}/{e}")).map_err(|e| format!("{name}: {e}"))
        })
        .collect::<Result<Vec<_>, _>>()
        .map(|v| format!("identical verdicts and counts ({})", v.join(", ")));
    property_lines.push(("6c", "exploration order independence", t, r));

    let (r, t) = timed(|| -> CriterionResult {
        ensure(!violations.is_empty(), || "criterion 5 produced no violations".into())?;
        for (label, model, verdict) in &violations {
            let checker = Checker::new(model).map_err(|e| e.to_string())?;
            let trace = verdict.trace.as_ref();
            match trace {
                Some(tr) => {
                    checker
                        .replay(&tr.steps)
                        .map_err(|e| format!("{label} {}: {e}", verdict.assertion))?;
                }
                None => return Err(format!("{label} {}: no counterexample", verdict.assertion)),
            }
            ensure(checker.confirm(verdict).unwrap_or(false), || {
                format!("{label} {}: replay does not exhibit the violation", verdict.assertion)
            })?;
        }
        Ok(format!("{} counterexamples replay", violations.len()))
    });
    property_lines.push(("6d", "counterexample replay", t, r));

    for (id, title, t, r) in property_lines {
        report.line(id, title, t, r);
    }
    println!(
        "MANUAL 7   interop spot-check: export with `flcsp export <case> <dir>` and load golden.csp in PAT (see README)"
    );

    if report.failures > 0 {
        println!("{} criterion/criteria failed", report.failures);
        std::process::exit(1);
    }
    println!("all automated criteria passed");
}
