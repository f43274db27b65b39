//! Verdicts for `deadlockfree`, `reaches P` and `|= []<> P`.

use std::collections::VecDeque;

use serde::Serialize;

use super::explore::{StateGraph, Status};
use super::semantics::{Checker, Transition};
use super::state::SysState;
use super::CheckError;
use crate::cspir::Assertion;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Holds,
    Violated,
    /// Not decidable from the part of the state space that was explored.
    Undecided,
}

/// A transition sequence from the initial state. For lasso traces,
/// `cycle_start` is the step index where the repeated suffix begins; the
/// state after the last step equals the state before step `cycle_start`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Trace {
    pub steps: Vec<Transition>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cycle_start: Option<usize>,
}

/// What a trace demonstrates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TraceKind {
    /// Ends in a state that is stuck without having terminated.
    Deadlock,
    /// Ends in a state satisfying the predicate.
    Witness,
    /// Ends in a terminal state violating the predicate.
    TerminalViolation,
    /// Reaches a cycle made only of states violating the predicate.
    Lasso,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub assertion: Assertion,
    pub outcome: Outcome,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace_kind: Option<TraceKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<Trace>,
    pub states: usize,
    pub edges: usize,
}

impl Checker {
    pub fn check(&self, g: &StateGraph, a: &Assertion) -> Result<Verdict, CheckError> {
        match a {
            Assertion::DeadlockFree { .. } => self.check_deadlockfree(g, a),
            Assertion::Reaches { predicate, .. } => self.check_reaches(g, a, predicate),
            Assertion::AlwaysEventually { predicate, .. } => {
                self.check_always_eventually(g, a, predicate)
            }
        }
    }

    fn verdict(
        &self,
        g: &StateGraph,
        a: &Assertion,
        outcome: Outcome,
        trace: Option<(TraceKind, Trace)>,
    ) -> Result<Verdict, CheckError> {
        // On a partial graph only verdicts backed by a trace are sound:
        // violations with a counterexample and reachability with a witness.
        if !g.complete && trace.is_none() {
            return Err(CheckError::Incomplete {
                assertion: a.to_string(),
            });
        }
        let (trace_kind, trace) = match trace {
            Some((k, t)) => (Some(k), Some(t)),
            None => (None, None),
        };
        Ok(Verdict {
            assertion: a.clone(),
            outcome,
            trace_kind,
            trace,
            states: g.num_states(),
            edges: g.num_edges(),
        })
    }

    pub fn check_deadlockfree(&self, g: &StateGraph, a: &Assertion) -> Result<Verdict, CheckError> {
        match (0..g.num_states()).find(|&i| g.status[i] == Status::Deadlock) {
            None => self.verdict(g, a, Outcome::Holds, None),
            Some(id) => {
                let t = self.trace(&g.path_to(id), None)?;
                self.verdict(g, a, Outcome::Violated, Some((TraceKind::Deadlock, t)))
            }
        }
    }

    pub fn check_reaches(
        &self,
        g: &StateGraph,
        a: &Assertion,
        predicate: &str,
    ) -> Result<Verdict, CheckError> {
        let pi = self.pred_index(predicate)?;
        for id in 0..g.num_states() {
            if self.holds(g, id, pi)? {
                let t = self.trace(&g.path_to(id), None)?;
                return self.verdict(g, a, Outcome::Holds, Some((TraceKind::Witness, t)));
            }
        }
        self.verdict(g, a, Outcome::Violated, None)
    }

    /// `[]<> P` over all paths, without fairness: violated by a terminal
    /// state outside P or by a reachable cycle that avoids P entirely.
    pub fn check_always_eventually(
        &self,
        g: &StateGraph,
        a: &Assertion,
        predicate: &str,
    ) -> Result<Verdict, CheckError> {
        let pi = self.pred_index(predicate)?;
        let n = g.num_states();
        let mut bad = vec![false; n];
        for (id, b) in bad.iter_mut().enumerate() {
            *b = !self.holds(g, id, pi)?;
        }
        for id in g.terminal_states() {
            if bad[id] {
                let t = self.trace(&g.path_to(id), None)?;
                return self.verdict(
                    g,
                    a,
                    Outcome::Violated,
                    Some((TraceKind::TerminalViolation, t)),
                );
            }
        }
        let comp = cyclic_components(g, &bad);
        let Some(entry) = (0..n).find(|&i| comp[i] != u32::MAX) else {
            return self.verdict(g, a, Outcome::Holds, None);
        };
        let stem = g.path_to(entry);
        let cycle = cycle_through(g, entry, &comp);
        let mut comps = stem.clone();
        comps.extend_from_slice(&cycle);
        let t = self.trace(&comps, Some(stem.len()))?;
        self.verdict(g, a, Outcome::Violated, Some((TraceKind::Lasso, t)))
    }

    fn pred_index(&self, name: &str) -> Result<usize, CheckError> {
        self.prog
            .predicate_index(name)
            .ok_or_else(|| CheckError::Eval(format!("undefined predicate `{name}`")))
    }

    fn holds(&self, g: &StateGraph, id: usize, pi: usize) -> Result<bool, CheckError> {
        if pi < 64 {
            return Ok(g.preds[id] & (1 << pi) != 0);
        }
        let s = g.state(id);
        Ok(self.eval(&self.prog.predicates[pi].1, &[], &s)? != 0)
    }

    /// Rebuilds full transitions for a component schedule.
    pub(crate) fn trace(&self, comps: &[u16], cycle_start: Option<usize>) -> Result<Trace, CheckError> {
        let mut s = self.initial_state()?;
        let mut steps = Vec::with_capacity(comps.len());
        for (i, &c) in comps.iter().enumerate() {
            let (t, next) = self
                .fire(&s, c as usize)?
                .ok_or(CheckError::ReplayDivergence { step: i })?;
            steps.push(t);
            s = next;
        }
        Ok(Trace { steps, cycle_start })
    }

    /// Replays `trace` from the initial state; every step must be the
    /// transition its component would take.
    pub fn replay(&self, trace: &[Transition]) -> Result<SysState, CheckError> {
        let mut s = self.initial_state()?;
        for (i, t) in trace.iter().enumerate() {
            if t.component >= s.num_components() {
                return Err(CheckError::ReplayDivergence { step: i });
            }
            match self.fire(&s, t.component)? {
                Some((actual, next)) if actual == *t => s = next,
                _ => return Err(CheckError::ReplayDivergence { step: i }),
            }
        }
        Ok(s)
    }

    /// Replays a verdict's trace and confirms the final state exhibits what
    /// the trace claims.
    pub fn confirm(&self, v: &Verdict) -> Result<bool, CheckError> {
        let (Some(kind), Some(trace)) = (v.trace_kind, &v.trace) else {
            // Only a failed reachability check legitimately has no trace.
            return Ok(v.outcome != Outcome::Violated
                || matches!(v.assertion, Assertion::Reaches { .. }));
        };
        let end = self.replay(&trace.steps)?;
        let pred = v.assertion.predicate();
        Ok(match kind {
            TraceKind::Deadlock => self.enabled(&end)?.is_empty() && !end.all_terminated(),
            TraceKind::Witness => self.predicate_holds(&end, pred.unwrap_or_default())?,
            TraceKind::TerminalViolation => {
                self.enabled(&end)?.is_empty()
                    && !self.predicate_holds(&end, pred.unwrap_or_default())?
            }
            TraceKind::Lasso => {
                let Some(k) = trace.cycle_start else {
                    return Ok(false);
                };
                if k >= trace.steps.len() {
                    return Ok(false);
                }
                let p = pred.unwrap_or_default();
                let loop_head = self.replay(&trace.steps[..k])?;
                // Every state on the cycle must violate the predicate.
                let mut s = loop_head.clone();
                for t in &trace.steps[k..] {
                    if self.predicate_holds(&s, p)? {
                        return Ok(false);
                    }
                    match self.fire(&s, t.component)? {
                        Some((actual, next)) if actual == *t => s = next,
                        _ => return Ok(false),
                    }
                }
                s == loop_head && s == end
            }
        })
    }
}

/// Marks states lying on a cycle within the `bad` subgraph with the id of
/// their strongly connected component; other states get `u32::MAX`.
fn cyclic_components(g: &StateGraph, bad: &[bool]) -> Vec<u32> {
    let n = g.num_states();
    const UNSEEN: u32 = u32::MAX;
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0u32; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<u32> = Vec::new();
    let mut comp = vec![u32::MAX; n];
    let mut next_index = 0u32;
    let mut ncomp = 0u32;
    // (node, next edge offset)
    let mut call: Vec<(usize, usize)> = Vec::new();

    for root in 0..n {
        if !bad[root] || index[root] != UNSEEN {
            continue;
        }
        call.push((root, g.offsets[root]));
        index[root] = next_index;
        low[root] = next_index;
        next_index += 1;
        stack.push(root as u32);
        on_stack[root] = true;
        while let Some(&(v, e)) = call.last() {
            if e < g.offsets[v + 1] {
                let w = g.targets[e] as usize;
                call.last_mut().expect("non-empty").1 += 1;
                if !bad[w] {
                    continue;
                }
                if index[w] == UNSEEN {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w as u32);
                    on_stack[w] = true;
                    call.push((w, g.offsets[w]));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            call.pop();
            if let Some(&(u, _)) = call.last() {
                low[u] = low[u].min(low[v]);
            }
            if low[v] == index[v] {
                let mut members = Vec::new();
                loop {
                    let w = stack.pop().expect("tarjan stack") as usize;
                    on_stack[w] = false;
                    members.push(w);
                    if w == v {
                        break;
                    }
                }
                let cyclic = members.len() > 1
                    || (g.offsets[v]..g.offsets[v + 1]).any(|e| g.targets[e] as usize == v);
                if cyclic {
                    for w in members {
                        comp[w] = ncomp;
                    }
                    ncomp += 1;
                }
            }
        }
    }
    comp
}

/// Shortest component schedule leading from `s` back to `s` inside its
/// strongly connected component.
fn cycle_through(g: &StateGraph, s: usize, comp: &[u32]) -> Vec<u16> {
    let c = comp[s];
    let mut prev: rustc_hash::FxHashMap<usize, (usize, u16)> = Default::default();
    let mut queue = VecDeque::from([s]);
    while let Some(v) = queue.pop_front() {
        for (ec, w) in g.successors(v) {
            if comp[w] != c {
                continue;
            }
            if w == s {
                let mut path = vec![ec as u16];
                let mut cur = v;
                while cur != s {
                    let (p, pc) = prev[&cur];
                    path.push(pc);
                    cur = p;
                }
                path.reverse();
                return path;
            }
            if let std::collections::hash_map::Entry::Vacant(e) = prev.entry(w) {
                e.insert((v, ec as u16));
                queue.push_back(w);
            }
        }
    }
    unreachable!("state {s} lies on a cycle of its component")
}
