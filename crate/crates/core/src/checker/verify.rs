//! Checking a list of assertions with as little exploration as possible.
//!
//! A deadlock-freedom assertion is first checked by depth-first search,
//! which finds deep deadlocks cheaply. When no deadlock exists, the full
//! graph is built breadth-first and every assertion is decided on it. When
//! a deadlock is found, the model is already refuted and the remaining
//! assertions are decided from the deadlock trace where that is sound:
//! a state on the trace satisfying `P` witnesses `reaches P`, and a final
//! state violating `P` refutes `[]<> P`. Anything else is
//! [`Outcome::Undecided`].

use std::time::{Duration, Instant};

use serde::Serialize;

use super::explore::ExploreOptions;
use super::props::{Outcome, Trace, TraceKind, Verdict};
use super::semantics::Checker;
use super::CheckError;
use crate::cspir::Assertion;

/// Verdicts for a list of assertions plus exploration statistics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelReport {
    /// One verdict per requested assertion, in request order.
    pub verdicts: Vec<Verdict>,
    /// Distinct states visited.
    pub states: usize,
    /// Transitions taken.
    pub edges: usize,
    /// True when the whole reachable state space was explored.
    pub complete: bool,
    #[serde(skip)]
    pub elapsed: Duration,
}

impl ModelReport {
    pub fn any_violated(&self) -> bool {
        self.verdicts.iter().any(|v| v.outcome == Outcome::Violated)
    }

    pub fn all_hold(&self) -> bool {
        self.verdicts.iter().all(|v| v.outcome == Outcome::Holds)
    }
}

impl Checker {
    pub fn verify(
        &self,
        assertions: &[Assertion],
        opts: &ExploreOptions,
    ) -> Result<ModelReport, CheckError> {
        let start = Instant::now();
        if let Some(df) = assertions
            .iter()
            .find(|a| matches!(a, Assertion::DeadlockFree { .. }))
        {
            let d = self.search_deadlock(df, opts)?;
            if d.outcome == Outcome::Violated {
                return self.report_from_deadlock(assertions, d, start);
            }
        }
        let g = self.explore(opts)?;
        let verdicts = assertions
            .iter()
            .map(|a| self.check(&g, a))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(ModelReport {
            verdicts,
            states: g.num_states(),
            edges: g.num_edges(),
            complete: true,
            elapsed: start.elapsed(),
        })
    }

    fn report_from_deadlock(
        &self,
        assertions: &[Assertion],
        d: Verdict,
        start: Instant,
    ) -> Result<ModelReport, CheckError> {
        let steps = &d.trace.as_ref().expect("violations carry a trace").steps;
        let mut states = vec![self.initial_state()?];
        for t in steps {
            let (_, next) = self
                .fire(states.last().expect("non-empty"), t.component)?
                .ok_or(CheckError::ReplayDivergence { step: states.len() - 1 })?;
            states.push(next);
        }
        let mut verdicts = Vec::with_capacity(assertions.len());
        for a in assertions {
            let mut v = Verdict {
                assertion: a.clone(),
                outcome: Outcome::Undecided,
                trace_kind: None,
                trace: None,
                states: d.states,
                edges: d.edges,
            };
            match a {
                Assertion::DeadlockFree { .. } => {
                    v.outcome = Outcome::Violated;
                    v.trace_kind = d.trace_kind;
                    v.trace = d.trace.clone();
                }
                Assertion::Reaches { predicate, .. } => {
                    for (i, s) in states.iter().enumerate() {
                        if self.predicate_holds(s, predicate)? {
                            v.outcome = Outcome::Holds;
                            v.trace_kind = Some(TraceKind::Witness);
                            v.trace = Some(Trace {
                                steps: steps[..i].to_vec(),
                                cycle_start: None,
                            });
                            break;
                        }
                    }
                }
                Assertion::AlwaysEventually { predicate, .. } => {
                    let last = states.last().expect("non-empty");
                    if !self.predicate_holds(last, predicate)? {
                        v.outcome = Outcome::Violated;
                        v.trace_kind = Some(TraceKind::TerminalViolation);
                        v.trace = d.trace.clone();
                    }
                }
            }
            verdicts.push(v);
        }
        Ok(ModelReport {
            verdicts,
            states: d.states,
            edges: d.edges,
            complete: false,
            elapsed: start.elapsed(),
        })
    }
}
