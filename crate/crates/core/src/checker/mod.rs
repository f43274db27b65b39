//! Explicit-state checker for CSP# models: breadth-first exploration of the
//! interleaving semantics with bounded FIFO channels, and verdicts for
//! deadlock freedom, reachability and `[]<>` liveness with replayable
//! traces.
//!
//! Step granularity: a `{...}` block, a channel send or receive, a
//! conditional's branch selection, a process-call unfolding and a
//! component's final `Skip` are one transition each. Sequential
//! composition and returning from a finished sub-process are not steps.

mod compile;
mod explore;
mod props;
mod semantics;
mod state;
mod verify;

use thiserror::Error;

use crate::cspir::CspError;

pub use explore::{ExploreOptions, StateGraph, DEFAULT_STATE_LIMIT};
pub use props::{Outcome, Trace, TraceKind, Verdict};
pub use semantics::{Assignment, Checker, Payload, Transition, TransitionKind};
pub use state::SysState;
pub use verify::ModelReport;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CheckError {
    #[error("invalid model: {0}")]
    Model(CspError),
    #[error("evaluation error: {0}")]
    Eval(String),
    #[error("model has no system process")]
    NoSystem,
    #[error("unsupported construct: {0}")]
    Unsupported(String),
    #[error("state limit of {limit} states exceeded")]
    StateLimitExceeded { limit: usize },
    #[error("trace diverges at step {step}: transition not enabled")]
    ReplayDivergence { step: usize },
    #[error("`{assertion}` cannot be decided on a partially explored state space")]
    Incomplete { assertion: String },
    #[error("channel `{channel}` holds more messages than its capacity")]
    CapacityViolation { channel: String },
}
