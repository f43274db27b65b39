//! Operational semantics: the initial state and the (at most one) enabled
//! transition of each component.

use serde::{Deserialize, Serialize};
use smallvec::smallvec;

use super::compile::{compile, CExpr, Node, Program, Root};
use super::state::{Component, Env, Frame, SysState};
use super::CheckError;
use crate::cspir::{apply_binop, CspModel, UnOp};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TransitionKind {
    DataOp,
    ChanOut,
    ChanIn,
    CondBranch,
    CallUnfold,
    SkipEnd,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Assignment {
    pub var: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub index: Option<i64>,
    pub value: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Payload {
    None,
    Channel {
        channel: String,
        #[serde(skip_serializing_if = "Option::is_none")]
        index: Option<i64>,
        fields: Vec<i64>,
    },
    Assignments(Vec<Assignment>),
    Branch(bool),
    Unfold {
        process: String,
        args: Vec<i64>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Transition {
    pub component: usize,
    pub kind: TransitionKind,
    pub payload: Payload,
}

/// A compiled model ready for exploration.
#[derive(Debug, Clone)]
pub struct Checker {
    pub(crate) prog: Program,
}

impl Checker {
    pub fn new(model: &CspModel) -> Result<Checker, CheckError> {
        Ok(Checker {
            prog: compile(model)?,
        })
    }

    /// Name of the system process being checked.
    pub fn system(&self) -> &str {
        &self.prog.system
    }

    pub fn initial_state(&self) -> Result<SysState, CheckError> {
        let p = &self.prog;
        let mut s = SysState {
            comps: Vec::new(),
            buf_data: Vec::new(),
            buf_lens: vec![0; p.instance_chan.len()],
            vars: p.var_init.clone(),
        };
        let mut comps = Vec::new();
        match p.root {
            Root::Single { body, slots } => comps.push(Component {
                frames: smallvec![Frame {
                    node: body,
                    env: smallvec![0; slots],
                }],
            }),
            Root::Indexed {
                lo,
                hi,
                body,
                slots,
            } => {
                if hi < lo {
                    return Err(CheckError::Eval(format!(
                        "empty interleaving range {{{lo}..{hi}}}"
                    )));
                }
                for i in lo..=hi {
                    let mut env: Env = smallvec![0; slots];
                    env[0] = i;
                    // Components start at the entry of the instantiated process.
                    let frame = match &p.nodes[body as usize] {
                        Node::Call { proc, args } => {
                            let callee = &p.procs[*proc as usize];
                            let mut new_env: Env = smallvec![0; callee.slots];
                            for (k, a) in args.iter().enumerate() {
                                new_env[k] = self.eval(a, &env, &s)?;
                            }
                            Frame {
                                node: callee.body,
                                env: new_env,
                            }
                        }
                        _ => Frame { node: body, env },
                    };
                    comps.push(Component {
                        frames: smallvec![frame],
                    });
                }
            }
        }
        for c in &mut comps {
            self.settle(c);
        }
        s.comps = comps;
        Ok(s)
    }

    /// Enabled transitions in component order.
    pub fn enabled(&self, s: &SysState) -> Result<Vec<Transition>, CheckError> {
        let mut out = Vec::new();
        for i in 0..s.comps.len() {
            if let Some((t, _)) = self.fire(s, i)? {
                out.push(t);
            }
        }
        Ok(out)
    }

    /// Enabled transitions with their target states, in component order.
    pub fn successors(&self, s: &SysState) -> Result<Vec<(Transition, SysState)>, CheckError> {
        let mut out = Vec::new();
        for i in 0..s.comps.len() {
            if let Some(x) = self.fire(s, i)? {
                out.push(x);
            }
        }
        Ok(out)
    }

    /// Value of variable `name` (element `index` for arrays).
    pub fn var_value(&self, s: &SysState, name: &str, index: Option<usize>) -> Option<i64> {
        let v = &self.prog.vars[self.prog.var_index(name)?];
        match (v.len, index) {
            (None, None) => Some(s.vars[v.base]),
            (Some(n), Some(i)) if i < n => Some(s.vars[v.base + i]),
            _ => None,
        }
    }

    /// Channel instances as (display name, capacity in messages).
    pub fn channel_instances(&self) -> Vec<(String, usize)> {
        let p = &self.prog;
        p.instance_chan
            .iter()
            .enumerate()
            .map(|(inst, &c)| {
                let ch = &p.chans[c as usize];
                let name = match ch.len {
                    Some(_) => format!("{}[{}]", ch.name, inst - ch.base),
                    None => ch.name.clone(),
                };
                (name, ch.capacity)
            })
            .collect()
    }

    /// Number of messages buffered in channel instance `inst`.
    pub fn buffer_len(&self, s: &SysState, inst: usize) -> usize {
        let ch = &self.prog.chans[self.prog.instance_chan[inst] as usize];
        s.buf_values(inst) / ch.arity.max(1)
    }

    pub fn predicate_holds(&self, s: &SysState, name: &str) -> Result<bool, CheckError> {
        let i = self
            .prog
            .predicate_index(name)
            .ok_or_else(|| CheckError::Eval(format!("undefined predicate `{name}`")))?;
        Ok(self.eval(&self.prog.predicates[i].1, &[], s)? != 0)
    }

    pub(crate) fn eval(&self, e: &CExpr, env: &[i64], s: &SysState) -> Result<i64, CheckError> {
        Ok(match e {
            CExpr::Const(v) => *v,
            CExpr::Local(i) => env[*i as usize],
            CExpr::Var(v) => s.vars[self.prog.vars[*v as usize].base],
            CExpr::Elem { var, idx } => {
                let i = self.eval(idx, env, s)?;
                s.vars[self.element(*var, i)?]
            }
            CExpr::Unary(UnOp::Neg, a) => self
                .eval(a, env, s)?
                .checked_neg()
                .ok_or_else(|| CheckError::Eval("arithmetic overflow".into()))?,
            CExpr::Unary(UnOp::Not, a) => (self.eval(a, env, s)? == 0) as i64,
            CExpr::Binary(op, a, b) => {
                let x = self.eval(a, env, s)?;
                let y = self.eval(b, env, s)?;
                apply_binop(*op, x, y)
                    .ok_or_else(|| CheckError::Eval("arithmetic overflow".into()))?
            }
            CExpr::Count { chan, idx } => {
                let idx = match idx {
                    Some(i) => Some(self.eval(i, env, s)?),
                    None => None,
                };
                let inst = self.instance(*chan, idx)?;
                let arity = self.prog.chans[*chan as usize].arity.max(1);
                (s.buf_values(inst) / arity) as i64
            }
        })
    }

    fn element(&self, var: u32, i: i64) -> Result<usize, CheckError> {
        let v = &self.prog.vars[var as usize];
        let n = v.len.unwrap_or(1);
        if i < 0 || i as usize >= n {
            return Err(CheckError::Eval(format!(
                "index {i} out of range for `{}[{n}]`",
                v.name
            )));
        }
        Ok(v.base + i as usize)
    }

    fn instance(&self, chan: u32, idx: Option<i64>) -> Result<usize, CheckError> {
        let c = &self.prog.chans[chan as usize];
        match idx {
            None => Ok(c.base),
            Some(i) => {
                let n = c.len.unwrap_or(1);
                if i < 0 || i as usize >= n {
                    return Err(CheckError::Eval(format!(
                        "index {i} out of range for channel `{}[{n}]`",
                        c.name
                    )));
                }
                Ok(c.base + i as usize)
            }
        }
    }

    fn mask(&self, f: &mut Frame) {
        let live = self.prog.live[f.node as usize];
        for (i, v) in f.env.iter_mut().enumerate() {
            if i < 64 && live & (1 << i) == 0 {
                *v = 0;
            }
        }
    }

    /// Unfolds sequential composition and pops finished continuations, so
    /// that the top frame always sits on a node with a visible or tau step.
    fn settle(&self, c: &mut Component) {
        loop {
            let n = c.frames.len();
            let Some(top) = c.frames.last_mut() else {
                return;
            };
            match self.prog.nodes[top.node as usize] {
                Node::Seq { first, next } => {
                    let mut inner = Frame {
                        node: first,
                        env: top.env.clone(),
                    };
                    top.node = next;
                    self.mask(top);
                    self.mask(&mut inner);
                    c.frames.push(inner);
                }
                Node::Skip if n > 1 => {
                    c.frames.pop();
                }
                _ => {
                    self.mask(top);
                    return;
                }
            }
        }
    }

    fn advance(&self, s: &mut SysState, comp: usize, node: u32) {
        let c = &mut s.comps[comp];
        c.frames.last_mut().expect("live component").node = node;
        self.settle(c);
    }

    /// The transition of component `comp` in `s`, if it is enabled.
    pub(crate) fn fire(
        &self,
        s: &SysState,
        comp: usize,
    ) -> Result<Option<(Transition, SysState)>, CheckError> {
        let p = &self.prog;
        let Some(top) = s.comps[comp].frames.last() else {
            return Ok(None);
        };
        let env = &top.env;
        let single = s.comps[comp].frames.len() == 1;
        let (kind, payload, next) = match &p.nodes[top.node as usize] {
            Node::Skip => {
                debug_assert!(single);
                let mut n = s.clone();
                n.comps[comp].frames.clear();
                let t = Transition {
                    component: comp,
                    kind: TransitionKind::SkipEnd,
                    payload: Payload::None,
                };
                return Ok(Some((t, n)));
            }
            Node::DataOp { assigns, next } => {
                let mut n = s.clone();
                let mut done = Vec::with_capacity(assigns.len());
                for (target, value) in assigns {
                    let v = self.eval(value, env, &n)?;
                    let info = &p.vars[target.var as usize];
                    let (slot, index) = match &target.idx {
                        Some(i) => {
                            let i = self.eval(i, env, &n)?;
                            (self.element(target.var, i)?, Some(i))
                        }
                        None => (info.base, None),
                    };
                    n.vars[slot] = v;
                    done.push(Assignment {
                        var: info.name.clone(),
                        index,
                        value: v,
                    });
                }
                self.advance(&mut n, comp, *next);
                let t = Transition {
                    component: comp,
                    kind: TransitionKind::DataOp,
                    payload: Payload::Assignments(done),
                };
                return Ok(Some((t, n)));
            }
            Node::Out {
                chan,
                idx,
                fields,
                next,
            } => {
                let index = match idx {
                    Some(i) => Some(self.eval(i, env, s)?),
                    None => None,
                };
                let inst = self.instance(*chan, index)?;
                let info = &p.chans[*chan as usize];
                if s.buf_values(inst) / info.arity.max(1) >= info.capacity {
                    return Ok(None);
                }
                let vals = fields
                    .iter()
                    .map(|f| self.eval(f, env, s))
                    .collect::<Result<Vec<_>, _>>()?;
                let mut n = s.clone();
                n.buf_push(inst, &vals);
                self.advance(&mut n, comp, *next);
                (
                    TransitionKind::ChanOut,
                    Payload::Channel {
                        channel: info.name.clone(),
                        index,
                        fields: vals,
                    },
                    n,
                )
            }
            Node::In {
                chan,
                idx,
                slots,
                next,
            } => {
                let index = match idx {
                    Some(i) => Some(self.eval(i, env, s)?),
                    None => None,
                };
                let inst = self.instance(*chan, index)?;
                if s.buf_values(inst) == 0 {
                    return Ok(None);
                }
                let info = &p.chans[*chan as usize];
                let mut n = s.clone();
                let vals = n.buf_pop(inst, slots.len());
                let c = &mut n.comps[comp];
                let top = c.frames.last_mut().expect("live component");
                for (slot, v) in slots.iter().zip(&vals) {
                    top.env[*slot as usize] = *v;
                }
                self.advance(&mut n, comp, *next);
                (
                    TransitionKind::ChanIn,
                    Payload::Channel {
                        channel: info.name.clone(),
                        index,
                        fields: vals.to_vec(),
                    },
                    n,
                )
            }
            Node::Cond {
                cond,
                then,
                otherwise,
            } => {
                let taken = self.eval(cond, env, s)? != 0;
                let mut n = s.clone();
                self.advance(&mut n, comp, if taken { *then } else { *otherwise });
                (TransitionKind::CondBranch, Payload::Branch(taken), n)
            }
            Node::Call { proc, args } => {
                let callee = &p.procs[*proc as usize];
                let vals = args
                    .iter()
                    .map(|a| self.eval(a, env, s))
                    .collect::<Result<Vec<_>, _>>()?;
                let mut n = s.clone();
                let top = n.comps[comp].frames.last_mut().expect("live component");
                let mut new_env: Env = smallvec![0; callee.slots];
                new_env[..vals.len()].copy_from_slice(&vals);
                *top = Frame {
                    node: callee.body,
                    env: new_env,
                };
                self.settle(&mut n.comps[comp]);
                (
                    TransitionKind::CallUnfold,
                    Payload::Unfold {
                        process: callee.name.clone(),
                        args: vals,
                    },
                    n,
                )
            }
            Node::Seq { .. } => unreachable!("settled frames never rest on a sequence"),
        };
        Ok(Some((
            Transition {
                component: comp,
                kind,
                payload,
            },
            next,
        )))
    }
}
