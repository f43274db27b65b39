//! Lowers a [`CspModel`] into a flat node arena with slot-resolved
//! expressions, the form the explorer executes.

use rustc_hash::FxHashMap;

use super::CheckError;
use crate::cspir::{
    apply_binop, eval_const, eval_constants, Assign, BinOp, ChanRef, CspModel, Expr, ProcTerm,
    UnOp,
};

pub(crate) type NodeId = u32;

#[derive(Debug, Clone)]
pub(crate) enum CExpr {
    Const(i64),
    Local(u16),
    Var(u32),
    Elem { var: u32, idx: Box<CExpr> },
    Unary(UnOp, Box<CExpr>),
    Binary(BinOp, Box<CExpr>, Box<CExpr>),
    Count { chan: u32, idx: Option<Box<CExpr>> },
}

#[derive(Debug, Clone)]
pub(crate) struct LTarget {
    pub var: u32,
    pub idx: Option<CExpr>,
}

#[derive(Debug, Clone)]
pub(crate) enum Node {
    Skip,
    DataOp {
        assigns: Vec<(LTarget, CExpr)>,
        next: NodeId,
    },
    Out {
        chan: u32,
        idx: Option<CExpr>,
        fields: Vec<CExpr>,
        next: NodeId,
    },
    In {
        chan: u32,
        idx: Option<CExpr>,
        slots: Vec<u16>,
        next: NodeId,
    },
    Cond {
        cond: CExpr,
        then: NodeId,
        otherwise: NodeId,
    },
    Seq {
        first: NodeId,
        next: NodeId,
    },
    Call {
        proc: u32,
        args: Vec<CExpr>,
    },
}

#[derive(Debug, Clone)]
pub(crate) struct VarInfo {
    pub name: String,
    pub base: usize,
    /// `None` for scalars.
    pub len: Option<usize>,
}

#[derive(Debug, Clone)]
pub(crate) struct ChanInfo {
    pub name: String,
    /// First channel instance of this declaration.
    pub base: usize,
    pub len: Option<usize>,
    pub capacity: usize,
    pub arity: usize,
}

#[derive(Debug, Clone)]
pub(crate) struct ProcInfo {
    pub name: String,
    pub arity: usize,
    pub slots: usize,
    pub body: NodeId,
}

/// How the system process instantiates its components.
#[derive(Debug, Clone)]
pub(crate) enum Root {
    /// `|||x:{lo..hi}@body` with the binder stored in slot 0.
    Indexed {
        lo: i64,
        hi: i64,
        body: NodeId,
        slots: usize,
    },
    Single {
        body: NodeId,
        slots: usize,
    },
}

#[derive(Debug, Clone)]
pub(crate) struct Program {
    pub nodes: Vec<Node>,
    /// Slots read at or after each node (bit i = slot i); all ones when a
    /// process has more than 64 slots.
    pub live: Vec<u64>,
    pub vars: Vec<VarInfo>,
    pub var_init: Vec<i64>,
    pub chans: Vec<ChanInfo>,
    /// Channel declaration index of each instance.
    pub instance_chan: Vec<u32>,
    pub procs: Vec<ProcInfo>,
    pub root: Root,
    pub system: String,
    pub predicates: Vec<(String, CExpr)>,
}

impl Program {
    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v.name == name)
    }

    pub fn predicate_index(&self, name: &str) -> Option<usize> {
        self.predicates.iter().position(|(n, _)| n == name)
    }
}

pub(crate) fn compile(model: &CspModel) -> Result<Program, CheckError> {
    let consts = eval_constants(model).map_err(CheckError::Model)?;
    let eval = |e: &Expr| eval_const(e, &consts).map_err(CheckError::Model);

    let mut vars = Vec::new();
    let mut var_init = Vec::new();
    for v in &model.vars {
        let init = match &v.init {
            Some(e) => eval(e)?,
            None => 0,
        };
        let len = match &v.size {
            Some(s) => Some(positive_size(&v.name, eval(s)?)?),
            None => None,
        };
        vars.push(VarInfo {
            name: v.name.clone(),
            base: var_init.len(),
            len,
        });
        var_init.extend(std::iter::repeat_n(init, len.unwrap_or(1)));
    }

    let mut chans = Vec::new();
    let mut instance_chan = Vec::new();
    for c in &model.channels {
        let len = match &c.size {
            Some(s) => Some(positive_size(&c.name, eval(s)?)?),
            None => None,
        };
        let cap = eval(&c.capacity)?;
        if cap < 1 {
            return Err(CheckError::Model(crate::cspir::CspError::Capacity {
                channel: c.name.clone(),
                value: cap,
            }));
        }
        chans.push(ChanInfo {
            name: c.name.clone(),
            base: instance_chan.len(),
            len,
            capacity: cap as usize,
            arity: channel_arity(model, &c.name),
        });
        instance_chan.extend(std::iter::repeat_n(chans.len() as u32 - 1, len.unwrap_or(1)));
    }

    let system = model
        .system()
        .ok_or(CheckError::NoSystem)?
        .name
        .clone();

    let mut c = Compiler {
        consts: &consts,
        vars: &vars,
        chans: &chans,
        proc_ids: model
            .processes
            .iter()
            .enumerate()
            .map(|(i, p)| (p.name.as_str(), i as u32))
            .collect(),
        nodes: Vec::new(),
        uses: Vec::new(),
        scope: Vec::new(),
        next_slot: 0,
        model,
    };

    let mut procs = Vec::with_capacity(model.processes.len());
    let mut root = None;
    for p in &model.processes {
        c.scope.clear();
        for (i, x) in p.params.iter().enumerate() {
            c.scope.push((x.clone(), i as u16));
        }
        c.next_slot = p.params.len();
        let body = match &p.body {
            ProcTerm::Interleave {
                binder,
                lo,
                hi,
                body,
            } if p.name == system => {
                if !p.params.is_empty() {
                    return Err(CheckError::Unsupported(format!(
                        "system process `{}` takes parameters",
                        p.name
                    )));
                }
                let (lo, hi) = (eval(lo)?, eval(hi)?);
                c.scope.push((binder.clone(), 0));
                c.next_slot = 1;
                let b = c.term(body)?;
                root = Some((lo, hi, b));
                b
            }
            t => c.term(t)?,
        };
        procs.push(ProcInfo {
            name: p.name.clone(),
            arity: p.params.len(),
            slots: c.next_slot,
            body,
        });
    }

    let sys_idx = c.proc_ids[system.as_str()] as usize;
    let sys = &procs[sys_idx];
    let root = match root {
        Some((lo, hi, body)) => Root::Indexed {
            lo,
            hi,
            body,
            slots: sys.slots,
        },
        None => {
            if sys.arity != 0 {
                return Err(CheckError::Unsupported(format!(
                    "system process `{}` takes parameters",
                    sys.name
                )));
            }
            Root::Single {
                body: sys.body,
                slots: sys.slots,
            }
        }
    };

    let mut predicates = Vec::new();
    for d in &model.predicates {
        c.scope.clear();
        predicates.push((d.name.clone(), c.expr(&d.value)?));
    }
    for a in &model.assertions {
        if let Some(p) = a.predicate() {
            if !predicates.iter().any(|(n, _)| n == p) {
                return Err(CheckError::Unsupported(format!("undefined predicate `{p}`")));
            }
        }
    }

    let nodes = c.nodes;
    let uses = c.uses;
    let live = liveness(&nodes, &uses, &procs);
    Ok(Program {
        nodes,
        live,
        vars,
        var_init,
        chans,
        instance_chan,
        procs,
        root,
        system,
        predicates,
    })
}

fn positive_size(name: &str, v: i64) -> Result<usize, CheckError> {
    if v < 1 {
        return Err(CheckError::Eval(format!("`{name}` has non-positive size {v}")));
    }
    Ok(v as usize)
}

fn channel_arity(model: &CspModel, name: &str) -> usize {
    fn walk(t: &ProcTerm, name: &str) -> Option<usize> {
        match t {
            ProcTerm::ChanOut { chan, fields, .. } if chan.name == name => Some(fields.len()),
            ProcTerm::ChanIn { chan, bindings, .. } if chan.name == name => Some(bindings.len()),
            ProcTerm::DataOp { then, .. }
            | ProcTerm::ChanOut { then, .. }
            | ProcTerm::ChanIn { then, .. } => walk(then, name),
            ProcTerm::Cond {
                then, otherwise, ..
            } => walk(then, name).or_else(|| otherwise.as_ref().and_then(|o| walk(o, name))),
            ProcTerm::Seq(a, b) => walk(a, name).or_else(|| walk(b, name)),
            ProcTerm::Interleave { body, .. } => walk(body, name),
            ProcTerm::Skip | ProcTerm::Call { .. } => None,
        }
    }
    model
        .processes
        .iter()
        .find_map(|p| walk(&p.body, name))
        .unwrap_or(0)
}

struct Compiler<'a> {
    consts: &'a FxHashMap<String, i64>,
    vars: &'a [VarInfo],
    chans: &'a [ChanInfo],
    proc_ids: FxHashMap<&'a str, u32>,
    nodes: Vec<Node>,
    /// Slots read directly by each node (bitmask).
    uses: Vec<u64>,
    scope: Vec<(String, u16)>,
    next_slot: usize,
    model: &'a CspModel,
}

fn slot_bit(s: u16) -> u64 {
    if s < 64 {
        1 << s
    } else {
        0
    }
}

fn expr_slots(e: &CExpr) -> u64 {
    match e {
        CExpr::Const(_) | CExpr::Var(_) => 0,
        CExpr::Local(s) => slot_bit(*s),
        CExpr::Elem { idx, .. } => expr_slots(idx),
        CExpr::Unary(_, a) => expr_slots(a),
        CExpr::Binary(_, a, b) => expr_slots(a) | expr_slots(b),
        CExpr::Count { idx, .. } => idx.as_deref().map_or(0, expr_slots),
    }
}

impl<'a> Compiler<'a> {
    fn push(&mut self, n: Node) -> NodeId {
        let uses = match &n {
            Node::Skip | Node::Seq { .. } => 0,
            Node::DataOp { assigns, .. } => assigns.iter().fold(0, |m, (t, v)| {
                m | expr_slots(v) | t.idx.as_ref().map_or(0, expr_slots)
            }),
            Node::Out { idx, fields, .. } => fields
                .iter()
                .fold(idx.as_ref().map_or(0, expr_slots), |m, f| m | expr_slots(f)),
            Node::In { idx, .. } => idx.as_ref().map_or(0, expr_slots),
            Node::Cond { cond, .. } => expr_slots(cond),
            Node::Call { args, .. } => args.iter().fold(0, |m, a| m | expr_slots(a)),
        };
        self.nodes.push(n);
        self.uses.push(uses);
        (self.nodes.len() - 1) as NodeId
    }

    fn term(&mut self, t: &ProcTerm) -> Result<NodeId, CheckError> {
        Ok(match t {
            ProcTerm::Skip => self.push(Node::Skip),
            ProcTerm::DataOp { assigns, then } => {
                let mut out = Vec::with_capacity(assigns.len());
                for a in assigns {
                    let target = a.target();
                    let lt = self.ltarget(&target.name, target.index.as_ref())?;
                    let cur = target.to_expr();
                    let value = match a {
                        Assign::Set(_, v) => self.expr(v)?,
                        Assign::Incr(_) => {
                            self.expr(&Expr::bin(BinOp::Add, cur, Expr::Int(1)))?
                        }
                        Assign::Decr(_) => {
                            self.expr(&Expr::bin(BinOp::Sub, cur, Expr::Int(1)))?
                        }
                    };
                    out.push((lt, value));
                }
                let next = self.term(then)?;
                self.push(Node::DataOp { assigns: out, next })
            }
            ProcTerm::ChanOut { chan, fields, then } => {
                let (ch, idx) = self.chan(chan)?;
                let fields = fields
                    .iter()
                    .map(|f| self.expr(f))
                    .collect::<Result<Vec<_>, _>>()?;
                let next = self.term(then)?;
                self.push(Node::Out {
                    chan: ch,
                    idx,
                    fields,
                    next,
                })
            }
            ProcTerm::ChanIn {
                chan,
                bindings,
                then,
            } => {
                let (ch, idx) = self.chan(chan)?;
                let mark = self.scope.len();
                let mut slots = Vec::with_capacity(bindings.len());
                for b in bindings {
                    let s = self.next_slot as u16;
                    self.next_slot += 1;
                    self.scope.push((b.clone(), s));
                    slots.push(s);
                }
                let next = self.term(then)?;
                self.scope.truncate(mark);
                self.push(Node::In {
                    chan: ch,
                    idx,
                    slots,
                    next,
                })
            }
            ProcTerm::Cond {
                cond,
                then,
                otherwise,
            } => {
                let cond = self.expr(cond)?;
                let then = self.term(then)?;
                let otherwise = match otherwise {
                    Some(o) => self.term(o)?,
                    None => self.push(Node::Skip),
                };
                self.push(Node::Cond {
                    cond,
                    then,
                    otherwise,
                })
            }
            ProcTerm::Seq(a, b) => {
                let first = self.term(a)?;
                let next = self.term(b)?;
                self.push(Node::Seq { first, next })
            }
            ProcTerm::Call { name, args } => {
                let proc = *self
                    .proc_ids
                    .get(name.as_str())
                    .ok_or_else(|| CheckError::Eval(format!("unknown process `{name}`")))?;
                let arity = self.model.processes[proc as usize].params.len();
                if arity != args.len() {
                    return Err(CheckError::Eval(format!(
                        "process `{name}` takes {arity} arguments, given {}",
                        args.len()
                    )));
                }
                let args = args
                    .iter()
                    .map(|a| self.expr(a))
                    .collect::<Result<Vec<_>, _>>()?;
                self.push(Node::Call { proc, args })
            }
            ProcTerm::Interleave { .. } => {
                return Err(CheckError::Unsupported(
                    "indexed interleaving below the system process".into(),
                ))
            }
        })
    }

    fn local(&self, name: &str) -> Option<u16> {
        self.scope
            .iter()
            .rev()
            .find(|(n, _)| n == name)
            .map(|(_, s)| *s)
    }

    fn var(&self, name: &str) -> Option<u32> {
        self.vars.iter().position(|v| v.name == name).map(|i| i as u32)
    }

    fn ltarget(&mut self, name: &str, idx: Option<&Expr>) -> Result<LTarget, CheckError> {
        let var = self
            .var(name)
            .ok_or_else(|| CheckError::Eval(format!("`{name}` is not an assignable variable")))?;
        let is_array = self.vars[var as usize].len.is_some();
        let idx = match idx {
            Some(i) if is_array => Some(self.expr(i)?),
            None if !is_array => None,
            _ => {
                return Err(CheckError::Eval(format!(
                    "`{name}` assigned with wrong indexing"
                )))
            }
        };
        Ok(LTarget { var, idx })
    }

    fn chan(&mut self, c: &ChanRef) -> Result<(u32, Option<CExpr>), CheckError> {
        let ch = self
            .chans
            .iter()
            .position(|x| x.name == c.name)
            .ok_or_else(|| CheckError::Eval(format!("unknown channel `{}`", c.name)))?;
        let idx = match (&c.index, self.chans[ch].len) {
            (Some(i), Some(_)) => Some(self.expr(i)?),
            (None, None) => None,
            _ => {
                return Err(CheckError::Eval(format!(
                    "channel `{}` used with wrong indexing",
                    c.name
                )))
            }
        };
        Ok((ch as u32, idx))
    }

    fn expr(&mut self, e: &Expr) -> Result<CExpr, CheckError> {
        Ok(match e {
            Expr::Int(v) => CExpr::Const(*v),
            Expr::Ident(n) => {
                if let Some(s) = self.local(n) {
                    CExpr::Local(s)
                } else if let Some(v) = self.consts.get(n) {
                    CExpr::Const(*v)
                } else if let Some(v) = self.var(n) {
                    if self.vars[v as usize].len.is_some() {
                        return Err(CheckError::Eval(format!("array `{n}` used as a scalar")));
                    }
                    CExpr::Var(v)
                } else {
                    return Err(CheckError::Eval(format!("undeclared name `{n}`")));
                }
            }
            Expr::Index(n, i) => {
                let var = self
                    .var(n)
                    .filter(|v| self.vars[*v as usize].len.is_some())
                    .ok_or_else(|| CheckError::Eval(format!("`{n}` is not an array")))?;
                CExpr::Elem {
                    var,
                    idx: Box::new(self.expr(i)?),
                }
            }
            Expr::Unary(op, a) => {
                let a = self.expr(a)?;
                match (op, &a) {
                    (UnOp::Neg, CExpr::Const(v)) => CExpr::Const(-v),
                    _ => CExpr::Unary(*op, Box::new(a)),
                }
            }
            Expr::Binary(op, a, b) => {
                let a = self.expr(a)?;
                let b = self.expr(b)?;
                match (&a, &b) {
                    (CExpr::Const(x), CExpr::Const(y)) => match apply_binop(*op, *x, *y) {
                        Some(v) => CExpr::Const(v),
                        None => CExpr::Binary(*op, Box::new(a), Box::new(b)),
                    },
                    _ => CExpr::Binary(*op, Box::new(a), Box::new(b)),
                }
            }
            Expr::CCount(c) => {
                let (chan, idx) = self.chan(c)?;
                CExpr::Count {
                    chan,
                    idx: idx.map(Box::new),
                }
            }
        })
    }
}

/// Slots that may be read at or after each node within its own frame.
fn liveness(nodes: &[Node], uses: &[u64], procs: &[ProcInfo]) -> Vec<u64> {
    // Children always precede their parents in the arena, so one forward
    // pass suffices.
    let mut live = vec![0u64; nodes.len()];
    for (i, n) in nodes.iter().enumerate() {
        live[i] = uses[i]
            | match n {
                Node::Skip | Node::Call { .. } => 0,
                Node::DataOp { next, .. } | Node::Out { next, .. } => live[*next as usize],
                Node::In { slots, next, .. } => {
                    let bound = slots.iter().fold(0, |m, s| m | slot_bit(*s));
                    live[*next as usize] & !bound
                }
                Node::Cond {
                    then, otherwise, ..
                } => live[*then as usize] | live[*otherwise as usize],
                Node::Seq { first, next } => live[*first as usize] | live[*next as usize],
            };
    }
    if procs.iter().any(|p| p.slots > 64) {
        // Bitmasks cannot describe these frames; keep every slot.
        live.iter_mut().for_each(|l| *l = u64::MAX);
    }
    live
}
