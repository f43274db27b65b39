//! The JSON run report printed by `check`.
//!
//! Keys, in order: `command`, `inputs`, `translation`, `exploration`,
//! `verdicts`, `error`, `exit_code`. Each verdict has `assertion`,
//! `result`, `states`, `edges`, `elapsed_ms` and, for results backed by a
//! trace, `trace_kind`, `trace` and (lassos only) `cycle_start`. Elapsed
//! times are the only fields that vary between runs on the same input.

use serde::Serialize;

use flcsp_core::checker::{ModelReport, Outcome, Trace, TraceKind, Transition};

use crate::{EXIT_OK, EXIT_VIOLATION};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TranslationStatus {
    pub ok: bool,
    pub message: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExplorationSummary {
    pub states: usize,
    pub edges: usize,
    /// False when the search stopped at a counterexample.
    pub complete: bool,
    pub elapsed_ms: u128,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerdictSummary {
    pub assertion: String,
    pub result: Outcome,
    pub states: usize,
    pub edges: usize,
    pub elapsed_ms: u128,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace_kind: Option<TraceKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<Transition>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cycle_start: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub command: String,
    pub inputs: Vec<String>,
    pub translation: Option<TranslationStatus>,
    pub exploration: Option<ExplorationSummary>,
    pub verdicts: Vec<VerdictSummary>,
    pub error: Option<String>,
    pub exit_code: i32,
}

impl RunReport {
    pub fn new(command: &str, inputs: Vec<String>) -> Self {
        RunReport {
            command: command.into(),
            inputs,
            translation: None,
            exploration: None,
            verdicts: Vec::new(),
            error: None,
            exit_code: EXIT_OK,
        }
    }

    /// Records verdicts; the exit code becomes 4 if any is violated.
    pub fn set_results(&mut self, r: &ModelReport) {
        let elapsed_ms = r.elapsed.as_millis();
        self.exploration = Some(ExplorationSummary {
            states: r.states,
            edges: r.edges,
            complete: r.complete,
            elapsed_ms,
        });
        self.verdicts = r
            .verdicts
            .iter()
            .map(|v| {
                let (trace, cycle_start) = match &v.trace {
                    Some(Trace { steps, cycle_start }) => (Some(steps.clone()), *cycle_start),
                    None => (None, None),
                };
                VerdictSummary {
                    assertion: v.assertion.to_string(),
                    result: v.outcome,
                    states: v.states,
                    edges: v.edges,
                    elapsed_ms,
                    trace_kind: v.trace_kind,
                    trace,
                    cycle_start,
                }
            })
            .collect();
        self.exit_code = if r.any_violated() { EXIT_VIOLATION } else { EXIT_OK };
    }

    pub fn fail(&mut self, code: i32, message: String) {
        self.error = Some(message);
        self.exit_code = code;
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
