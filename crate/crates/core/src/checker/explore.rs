//! Breadth-first state-space construction.

use std::time::{Duration, Instant};

use super::props::{Outcome, TraceKind, Verdict};
use super::semantics::Checker;
use super::state::{StateStore, SysState};
use super::CheckError;
use crate::cspir::Assertion;

pub const DEFAULT_STATE_LIMIT: usize = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExploreOptions {
    pub state_limit: usize,
    /// Visit components from last to first when expanding a state.
    pub reverse_components: bool,
    /// Stop expanding once a deadlocked state has been found. The graph
    /// is then partial; see [`StateGraph::complete`].
    pub stop_at_deadlock: bool,
}

impl Default for ExploreOptions {
    fn default() -> Self {
        ExploreOptions {
            state_limit: DEFAULT_STATE_LIMIT,
            reverse_components: false,
            stop_at_deadlock: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Status {
    /// Has at least one successor.
    Live,
    /// No successor and every component terminated.
    Terminated,
    /// No successor, some component blocked.
    Deadlock,
    /// Discovered but never expanded (partial graphs only).
    Unexplored,
}

/// The reachable state graph. State 0 is the initial state; ids follow
/// breadth-first discovery order, so parent links give shortest paths.
#[derive(Debug)]
pub struct StateGraph {
    pub(crate) states: StateStore,
    pub(crate) offsets: Vec<usize>,
    pub(crate) targets: Vec<u32>,
    /// Component that fires along each edge.
    pub(crate) edge_comps: Vec<u16>,
    /// Discovering predecessor and component (`u32::MAX` for the root).
    pub(crate) parent: Vec<(u32, u16)>,
    pub(crate) status: Vec<Status>,
    /// Bit i set when predicate i of the program holds.
    pub(crate) preds: Vec<u64>,
    pub(crate) nbufs: usize,
    pub(crate) nvars: usize,
    /// False when exploration stopped early; unexpanded states then have
    /// no outgoing edges.
    pub complete: bool,
    pub elapsed: Duration,
}

impl StateGraph {
    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn num_edges(&self) -> usize {
        self.targets.len()
    }

    pub fn state(&self, id: usize) -> SysState {
        SysState::decode(self.states.get(id), self.nbufs, self.nvars)
    }

    /// Outgoing edges of `id` as (component, target).
    pub fn successors(&self, id: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        (self.offsets[id]..self.offsets[id + 1])
            .map(|e| (self.edge_comps[e] as usize, self.targets[e] as usize))
    }

    /// Ids of states without successors.
    pub fn terminal_states(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.num_states())
            .filter(|&i| matches!(self.status[i], Status::Terminated | Status::Deadlock))
    }

    /// Component path from the initial state to `id` along discovery edges.
    pub(crate) fn path_to(&self, id: usize) -> Vec<u16> {
        let mut comps = Vec::new();
        let mut cur = id;
        while self.parent[cur].0 != u32::MAX {
            let (p, c) = self.parent[cur];
            comps.push(c);
            cur = p as usize;
        }
        comps.reverse();
        comps
    }
}

impl Checker {
    pub fn explore(&self, opts: &ExploreOptions) -> Result<StateGraph, CheckError> {
        let start = Instant::now();
        let init = self.initial_state()?;
        let nbufs = init.buf_lens.len();
        let nvars = init.vars.len();
        let mut g = StateGraph {
            states: StateStore::default(),
            offsets: vec![0],
            targets: Vec::new(),
            edge_comps: Vec::new(),
            parent: vec![(u32::MAX, 0)],
            status: Vec::new(),
            preds: Vec::new(),
            nbufs,
            nvars,
            complete: true,
            elapsed: Duration::ZERO,
        };
        let mut buf = Vec::new();
        init.encode(&mut buf);
        g.states.insert(&buf);

        let ncomps = init.comps.len();
        let order: Vec<usize> = if opts.reverse_components {
            (0..ncomps).rev().collect()
        } else {
            (0..ncomps).collect()
        };

        let mut id = 0;
        while id < g.states.len() {
            let s = SysState::decode(g.states.get(id), nbufs, nvars);
            self.audit(&s)?;
            g.preds.push(self.predicate_bits(&s)?);
            let mut any = false;
            for &c in &order {
                let Some((_, next)) = self.fire(&s, c)? else {
                    continue;
                };
                any = true;
                next.encode(&mut buf);
                let (target, fresh) = g.states.insert(&buf);
                if fresh {
                    if g.states.len() > opts.state_limit {
                        return Err(CheckError::StateLimitExceeded {
                            limit: opts.state_limit,
                        });
                    }
                    g.parent.push((id as u32, c as u16));
                }
                g.targets.push(target as u32);
                g.edge_comps.push(c as u16);
            }
            g.offsets.push(g.targets.len());
            let status = if any {
                Status::Live
            } else if s.all_terminated() {
                Status::Terminated
            } else {
                Status::Deadlock
            };
            g.status.push(status);
            id += 1;
            if status == Status::Deadlock && opts.stop_at_deadlock && id < g.states.len() {
                g.complete = false;
                while id < g.states.len() {
                    let s = SysState::decode(g.states.get(id), nbufs, nvars);
                    g.preds.push(self.predicate_bits(&s)?);
                    g.offsets.push(g.targets.len());
                    g.status.push(Status::Unexplored);
                    id += 1;
                }
            }
        }
        g.elapsed = start.elapsed();
        Ok(g)
    }

    /// Depth-first deadlock search that stores states but no edges and
    /// stops at the first deadlock. Finds deep deadlocks with far less
    /// memory than building the full graph; the trace is the DFS stack, so
    /// it is not necessarily shortest. `states` and `edges` in the verdict
    /// count what was visited.
    pub fn search_deadlock(&self, a: &Assertion, opts: &ExploreOptions) -> Result<Verdict, CheckError> {
        struct Frame {
            state: SysState,
            next: usize,
            any: bool,
            via: u16,
        }
        let init = self.initial_state()?;
        let ncomps = init.comps.len();
        let order: Vec<usize> = if opts.reverse_components {
            (0..ncomps).rev().collect()
        } else {
            (0..ncomps).collect()
        };
        let mut store = StateStore::default();
        let mut buf = Vec::new();
        init.encode(&mut buf);
        store.insert(&buf);
        let mut edges = 0usize;
        let mut stack = vec![Frame {
            state: init,
            next: 0,
            any: false,
            via: 0,
        }];
        while let Some(top) = stack.last_mut() {
            let mut child = None;
            while top.next < ncomps {
                let c = order[top.next];
                top.next += 1;
                let Some((_, next)) = self.fire(&top.state, c)? else {
                    continue;
                };
                top.any = true;
                edges += 1;
                next.encode(&mut buf);
                if store.insert(&buf).1 {
                    if store.len() > opts.state_limit {
                        return Err(CheckError::StateLimitExceeded {
                            limit: opts.state_limit,
                        });
                    }
                    self.audit(&next)?;
                    child = Some(Frame {
                        state: next,
                        next: 0,
                        any: false,
                        via: c as u16,
                    });
                    break;
                }
            }
            if let Some(f) = child {
                stack.push(f);
                continue;
            }
            if !top.any && !top.state.all_terminated() {
                let comps: Vec<u16> = stack[1..].iter().map(|f| f.via).collect();
                let trace = self.trace(&comps, None)?;
                return Ok(Verdict {
                    assertion: a.clone(),
                    outcome: Outcome::Violated,
                    trace_kind: Some(TraceKind::Deadlock),
                    trace: Some(trace),
                    states: store.len(),
                    edges,
                });
            }
            stack.pop();
        }
        Ok(Verdict {
            assertion: a.clone(),
            outcome: Outcome::Holds,
            trace_kind: None,
            trace: None,
            states: store.len(),
            edges,
        })
    }

    fn predicate_bits(&self, s: &SysState) -> Result<u64, CheckError> {
        let mut bits = 0u64;
        for (i, (_, e)) in self.prog.predicates.iter().enumerate().take(64) {
            if self.eval(e, &[], s)? != 0 {
                bits |= 1 << i;
            }
        }
        Ok(bits)
    }

    /// Capacity safety: no buffer ever exceeds its declared capacity.
    fn audit(&self, s: &SysState) -> Result<(), CheckError> {
        for inst in 0..s.buf_lens.len() {
            let ch = &self.prog.chans[self.prog.instance_chan[inst] as usize];
            if s.buf_values(inst) / ch.arity.max(1) > ch.capacity {
                return Err(CheckError::CapacityViolation {
                    channel: ch.name.clone(),
                });
            }
        }
        Ok(())
    }
}
