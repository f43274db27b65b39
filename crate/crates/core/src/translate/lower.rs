//! Continuation-passing lowering of the FLA function body to CSP# process
//! terms.
//!
//! Every statement is lowered with the term `k` that follows it. Loops
//! become tail-recursive processes: a `for` loop over `range(B)` turns
//! into `P(scope.., i) = if (i < B) { body; P(scope.., i + 1) } else { k }`,
//! a general `while` into the same shape without a counter, and a loop
//! draining a FIFO list into a process counted down from the list's
//! current length. `continue` jumps to the enclosing loop's recursive
//! call.

use std::collections::{BTreeMap, BTreeSet};

use crate::cspir::{Assign, BinOp, ChanRef, Expr, LValue, ProcTerm, ProcessDef, UnOp};
use crate::frontend::{
    walk_stmts, Message, MessageShapeMap, MpapiKind, PyBinOp, PyExpr, PyStmt, PyUnOp, RecvTarget,
    StmtKind, ValidatedProgram, NODE_CHANNELS,
};

use super::TranslateError;

/// CSP names of the three FLA parameters.
pub(crate) const PARAM_NAMES: [&str; 3] = ["nodeId", "ldata", "pdata"];
pub(crate) const BROADCAST: &str = "BroadcastMsg";
pub(crate) const RCV_MSGS: &str = "RcvMsgs";

#[derive(Debug, Clone)]
enum Binding {
    Scalar(String),
    Fields(Vec<String>),
}

/// Names visible at a program point.
#[derive(Debug, Clone, Default)]
struct Scope {
    /// CSP locals in binding order; loop processes take all of them.
    locals: Vec<String>,
    /// Python message variables in scope.
    vars: BTreeMap<String, Binding>,
}

impl Scope {
    fn push_local(&mut self, n: &str) {
        self.locals.retain(|l| l != n);
        self.locals.push(n.to_string());
    }

    fn idents(&self) -> Vec<Expr> {
        self.locals.iter().map(Expr::ident).collect()
    }
}

pub(crate) struct Lowered {
    /// Entry process first, then generated processes in creation order.
    pub processes: Vec<ProcessDef>,
    pub uses_broadcast: bool,
    pub uses_rcv_msgs: bool,
    /// Drop helpers as (process name, list).
    pub drop_helpers: Vec<(String, String)>,
    /// Loop bounds as CSP constant names.
    pub loop_bounds: BTreeSet<String>,
}

struct Lowerer<'a> {
    v: &'a ValidatedProgram,
    shapes: &'a MessageShapeMap,
    names: &'a BTreeMap<String, String>,
    entry: String,
    procs: Vec<Option<ProcessDef>>,
    for_loops: usize,
    while_loops: usize,
    drain_loops: usize,
    uses_broadcast: bool,
    uses_rcv_msgs: bool,
    drop_helpers: Vec<(String, String)>,
    loop_bounds: BTreeSet<String>,
    /// Locals only ever assigned `0` or incremented by one.
    monotone: BTreeSet<String>,
}

pub(crate) fn entry_name(func: &str) -> String {
    capitalize(func)
}

pub(crate) fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

pub(crate) fn lower_program(
    v: &ValidatedProgram,
    shapes: &MessageShapeMap,
    names: &BTreeMap<String, String>,
) -> Result<Lowered, TranslateError> {
    let f = v.entry();
    let mut lw = Lowerer {
        v,
        shapes,
        names,
        entry: entry_name(&f.name),
        procs: vec![None],
        for_loops: 0,
        while_loops: 0,
        drain_loops: 0,
        uses_broadcast: false,
        uses_rcv_msgs: false,
        drop_helpers: Vec::new(),
        loop_bounds: BTreeSet::new(),
        monotone: monotone_locals(v),
    };
    let mut scope = Scope::default();
    for p in PARAM_NAMES {
        scope.push_local(p);
    }
    let body = lw.block(&f.body, &ProcTerm::Skip, None, &scope)?;
    lw.procs[0] = Some(ProcessDef {
        name: lw.entry.clone(),
        params: PARAM_NAMES.iter().map(|s| s.to_string()).collect(),
        body,
    });
    Ok(Lowered {
        processes: lw.procs.into_iter().map(|p| p.expect("every slot filled")).collect(),
        uses_broadcast: lw.uses_broadcast,
        uses_rcv_msgs: lw.uses_rcv_msgs,
        drop_helpers: lw.drop_helpers,
        loop_bounds: lw.loop_bounds,
    })
}

fn monotone_locals(v: &ValidatedProgram) -> BTreeSet<String> {
    let mut ok: BTreeSet<String> = v.locals.iter().cloned().collect();
    walk_stmts(&v.entry().body, &mut |s| {
        if let StmtKind::Assign { target, value } = &s.kind {
            let fine = match value {
                PyExpr::Int(0) => true,
                PyExpr::Binary(PyBinOp::Add, a, b) => {
                    matches!((&**a, &**b), (PyExpr::Name(n), PyExpr::Int(1)) | (PyExpr::Int(1), PyExpr::Name(n)) if n == target)
                }
                _ => false,
            };
            if !fine {
                ok.remove(target);
            }
        }
    });
    ok
}

fn unsupported<T>(construct: impl Into<String>, line: usize) -> Result<T, TranslateError> {
    Err(TranslateError::Unsupported {
        construct: construct.into(),
        line,
    })
}

fn contains_continue(stmts: &[PyStmt]) -> bool {
    stmts.iter().any(|s| match &s.kind {
        StmtKind::Continue => true,
        StmtKind::If {
            then_body,
            else_body,
            ..
        } => contains_continue(then_body) || contains_continue(else_body),
        _ => false,
    })
}

impl Lowerer<'_> {
    fn reserve(&mut self) -> usize {
        self.procs.push(None);
        self.procs.len() - 1
    }

    fn node_id() -> Expr {
        Expr::ident(PARAM_NAMES[0])
    }

    fn block(
        &mut self,
        stmts: &[PyStmt],
        k: &ProcTerm,
        lb: Option<&ProcTerm>,
        sc: &Scope,
    ) -> Result<ProcTerm, TranslateError> {
        let Some((s, rest)) = stmts.split_first() else {
            return Ok(k.clone());
        };
        let line = s.line;
        match &s.kind {
            StmtKind::Continue => match lb {
                Some(lb) => Ok(lb.clone()),
                None => unsupported("continue outside a loop", line),
            },
            StmtKind::Assign { target, value } => {
                let assign = if target == "terminated" {
                    Assign::Set(
                        LValue {
                            name: "terminated".into(),
                            index: None,
                        },
                        Expr::ident("True"),
                    )
                } else {
                    Assign::Set(
                        LValue {
                            name: target.clone(),
                            index: Some(Self::node_id()),
                        },
                        self.expr(value, sc, line)?,
                    )
                };
                let then = self.block(rest, k, lb, sc)?;
                Ok(ProcTerm::data_op(vec![assign], then))
            }
            StmtKind::Mpapi(c) => match c.kind {
                MpapiKind::SendMsg => {
                    let dest = self.expr(c.destination.as_ref().expect("parsed"), sc, line)?;
                    let fields = self.message(c.message.as_ref().expect("parsed"), NODE_CHANNELS, sc, line)?;
                    let then = self.block(rest, k, lb, sc)?;
                    Ok(ProcTerm::chan_out(ChanRef::indexed(NODE_CHANNELS, dest), fields, then))
                }
                MpapiKind::RcvMsg => {
                    let target = c.target.as_ref().expect("parsed");
                    self.receive(NODE_CHANNELS, target, rest, k, lb, sc, line)
                }
                MpapiKind::BroadcastMsg => {
                    self.uses_broadcast = true;
                    let mut args =
                        self.message(c.message.as_ref().expect("parsed"), NODE_CHANNELS, sc, line)?;
                    args.push(self.expr(c.sender.as_ref().expect("parsed"), sc, line)?);
                    let then = self.block(rest, k, lb, sc)?;
                    Ok(ProcTerm::call(BROADCAST, args).then_seq(then))
                }
                MpapiKind::RcvMsgs => {
                    self.uses_rcv_msgs = true;
                    let count = self.expr(c.count.as_ref().expect("parsed"), sc, line)?;
                    let then = self.block(rest, k, lb, sc)?;
                    Ok(ProcTerm::call(RCV_MSGS, vec![Self::node_id(), count]).then_seq(then))
                }
            },
            StmtKind::ListAppend { list, message } => {
                let fields = self.message(message, list, sc, line)?;
                let then = self.block(rest, k, lb, sc)?;
                Ok(ProcTerm::chan_out(
                    ChanRef::indexed(list.clone(), Self::node_id()),
                    fields,
                    then,
                ))
            }
            StmtKind::ListPop { target, list } => self.receive(list, target, rest, k, lb, sc, line),
            StmtKind::DrainHelperCall { helper, list } => {
                let name = capitalize(helper);
                match self.drop_helpers.iter().find(|(h, _)| *h == name) {
                    Some((_, l)) if l != list => {
                        return unsupported(format!("`{helper}` applied to two different lists"), line)
                    }
                    Some(_) => {}
                    None => self.drop_helpers.push((name.clone(), list.clone())),
                }
                let count = Expr::CCount(ChanRef::indexed(list.clone(), Self::node_id()));
                let then = self.block(rest, k, lb, sc)?;
                Ok(ProcTerm::call(name, vec![Self::node_id(), count]).then_seq(then))
            }
            StmtKind::If {
                cond,
                then_body,
                else_body,
            } => {
                let c = self.expr(cond, sc, line)?;
                let after = self.block(rest, k, lb, sc)?;
                let push_in = matches!(after, ProcTerm::Skip | ProcTerm::Call { .. })
                    || contains_continue(then_body)
                    || contains_continue(else_body);
                if push_in {
                    let t = self.block(then_body, &after, lb, sc)?;
                    let e = self.block(else_body, &after, lb, sc)?;
                    let e = (e != ProcTerm::Skip).then_some(e);
                    Ok(ProcTerm::cond(c, t, e))
                } else {
                    let t = self.block(then_body, &ProcTerm::Skip, lb, sc)?;
                    let e = self.block(else_body, &ProcTerm::Skip, lb, sc)?;
                    let e = (e != ProcTerm::Skip).then_some(e);
                    Ok(ProcTerm::cond(c, t, e).then_seq(after))
                }
            }
            StmtKind::ForRange {
                counter,
                bound,
                body,
            } => {
                if sc.locals.contains(counter) {
                    return unsupported(format!("loop counter `{counter}` shadows a name in scope"), line);
                }
                self.for_loops += 1;
                let name = if self.for_loops == 1 {
                    format!("{}T", self.entry)
                } else {
                    format!("{}T{}", self.entry, self.for_loops)
                };
                let slot = self.reserve();
                let mut inner = sc.clone();
                inner.push_local(counter);
                let next_args = inner
                    .locals
                    .iter()
                    .map(|l| {
                        if l == counter {
                            Expr::bin(BinOp::Add, Expr::ident(counter.clone()), Expr::int(1))
                        } else {
                            Expr::ident(l.clone())
                        }
                    })
                    .collect();
                let next = ProcTerm::call(name.clone(), next_args);
                let body_term = self.block(body, &next, Some(&next), &inner)?;
                let exit = self.block(rest, k, lb, sc)?;
                let bound_expr = self.expr(&PyExpr::Name(bound.clone()), sc, line)?;
                if let Expr::Ident(b) = &bound_expr {
                    self.loop_bounds.insert(b.clone());
                }
                let guard = Expr::bin(BinOp::Lt, Expr::ident(counter.clone()), bound_expr);
                self.procs[slot] = Some(ProcessDef {
                    name: name.clone(),
                    params: inner.locals.clone(),
                    body: ProcTerm::cond(guard, body_term, Some(exit)),
                });
                let mut args = sc.idents();
                args.push(Expr::int(0));
                Ok(ProcTerm::call(name, args))
            }
            StmtKind::While { cond, body } => {
                if let Some(list) = drain_pattern(cond, body) {
                    return self.drain_loop(list, body, rest, k, lb, sc, line);
                }
                self.while_loops += 1;
                let name = format!("{}_Phase{}", self.entry, self.while_loops + 1);
                let slot = self.reserve();
                let again = ProcTerm::call(name.clone(), sc.idents());
                let guard = self.guard(cond, sc, line)?;
                let body_term = self.block(body, &again, Some(&again), sc)?;
                let exit = self.block(rest, k, lb, sc)?;
                self.procs[slot] = Some(ProcessDef {
                    name,
                    params: sc.locals.clone(),
                    body: ProcTerm::cond(guard, body_term, Some(exit)),
                });
                Ok(again)
            }
        }
    }

    /// Loop guard; `x != e` on a local that only counts up from zero
    /// becomes `x < e`.
    fn guard(&self, cond: &PyExpr, sc: &Scope, line: usize) -> Result<Expr, TranslateError> {
        if let PyExpr::Binary(PyBinOp::Ne, a, b) = cond {
            if let PyExpr::Name(x) = &**a {
                if self.monotone.contains(x) {
                    return Ok(Expr::bin(
                        BinOp::Lt,
                        self.expr(a, sc, line)?,
                        self.expr(b, sc, line)?,
                    ));
                }
            }
        }
        self.expr(cond, sc, line)
    }

    #[allow(clippy::too_many_arguments)]
    fn receive(
        &mut self,
        family: &str,
        target: &RecvTarget,
        rest: &[PyStmt],
        k: &ProcTerm,
        lb: Option<&ProcTerm>,
        sc: &Scope,
        line: usize,
    ) -> Result<ProcTerm, TranslateError> {
        let shape = self.shape(family, line)?;
        let mut inner = sc.clone();
        let bindings = match target {
            RecvTarget::Name(x) if shape.arity == 1 => {
                inner.vars.insert(x.clone(), Binding::Scalar(x.clone()));
                vec![x.clone()]
            }
            RecvTarget::Name(x) => {
                inner.vars.insert(x.clone(), Binding::Fields(shape.fields.clone()));
                shape.fields.clone()
            }
            RecvTarget::Fields(names) => {
                if names.len() != shape.arity {
                    return unsupported(
                        format!("unpacking {} fields from {}-field messages", names.len(), shape.arity),
                        line,
                    );
                }
                for n in names {
                    inner.vars.insert(n.clone(), Binding::Scalar(n.clone()));
                }
                names.clone()
            }
        };
        for b in &bindings {
            inner.push_local(b);
        }
        let then = self.block(rest, k, lb, &inner)?;
        Ok(ProcTerm::chan_in(
            ChanRef::indexed(family.to_string(), Self::node_id()),
            bindings,
            then,
        ))
    }

    #[allow(clippy::too_many_arguments)]
    fn drain_loop(
        &mut self,
        list: &str,
        body: &[PyStmt],
        rest: &[PyStmt],
        k: &ProcTerm,
        lb: Option<&ProcTerm>,
        sc: &Scope,
        line: usize,
    ) -> Result<ProcTerm, TranslateError> {
        let mut nested = false;
        walk_stmts(body, &mut |s| {
            nested |= matches!(s.kind, StmtKind::ForRange { .. } | StmtKind::While { .. })
        });
        if nested {
            return unsupported("loop nested in a list-draining loop", line);
        }
        self.drain_loops += 1;
        let name = if self.drain_loops == 1 {
            "DrainBuffer".to_string()
        } else {
            format!("DrainBuffer{}", self.drain_loops)
        };
        let slot = self.reserve();

        // Parameters: the locals the body reads, plus the countdown.
        let used = self.used_locals(body, sc);
        let mut params: Vec<String> = sc
            .locals
            .iter()
            .filter(|l| *l == PARAM_NAMES[0] || used.contains(l.as_str()))
            .cloned()
            .collect();
        let mut count = "count".to_string();
        while sc.locals.contains(&count) {
            count.push('_');
        }
        let inner = Scope {
            locals: params.clone(),
            vars: sc
                .vars
                .iter()
                .filter(|(_, b)| match b {
                    Binding::Scalar(n) => params.contains(n),
                    Binding::Fields(fs) => fs.iter().all(|f| params.contains(f)),
                })
                .map(|(k, b)| (k.clone(), b.clone()))
                .collect(),
        };
        let mut next_args: Vec<Expr> = params.iter().map(Expr::ident).collect();
        next_args.push(Expr::bin(BinOp::Sub, Expr::ident(count.clone()), Expr::int(1)));
        let next = ProcTerm::call(name.clone(), next_args);
        let body_term = self.block(body, &next, Some(&next), &inner)?;
        let guard = Expr::bin(BinOp::Gt, Expr::ident(count.clone()), Expr::int(0));
        let mut args: Vec<Expr> = params.iter().map(Expr::ident).collect();
        args.push(Expr::CCount(ChanRef::indexed(list.to_string(), Self::node_id())));
        params.push(count);
        self.procs[slot] = Some(ProcessDef {
            name: name.clone(),
            params,
            body: ProcTerm::cond(guard, body_term, Some(ProcTerm::Skip)),
        });
        let then = self.block(rest, k, lb, sc)?;
        Ok(ProcTerm::call(name, args).then_seq(then))
    }

    /// CSP locals of `sc` referenced by `stmts`.
    fn used_locals(&self, stmts: &[PyStmt], sc: &Scope) -> BTreeSet<String> {
        let mut py = BTreeSet::new();
        walk_stmts(stmts, &mut |s| {
            crate::frontend::for_each_expr(s, &mut |e: &PyExpr| {
                e.visit_names(&mut |n| {
                    py.insert(n.to_string());
                })
            })
        });
        let params = &self.v.entry().params;
        let mut out = BTreeSet::new();
        for n in py {
            if let Some(i) = params.iter().position(|p| *p == n) {
                out.insert(PARAM_NAMES[i].to_string());
            } else if let Some(b) = sc.vars.get(&n) {
                match b {
                    Binding::Scalar(x) => {
                        out.insert(x.clone());
                    }
                    Binding::Fields(fs) => out.extend(fs.iter().cloned()),
                }
            } else if sc.locals.contains(&n) {
                out.insert(n);
            }
        }
        out
    }

    fn shape(&self, family: &str, line: usize) -> Result<&crate::frontend::MessageShape, TranslateError> {
        match self.shapes.get(family) {
            Some(s) => Ok(s),
            None => unsupported(format!("no message shape for `{family}`"), line),
        }
    }

    fn message(
        &self,
        m: &Message,
        family: &str,
        sc: &Scope,
        line: usize,
    ) -> Result<Vec<Expr>, TranslateError> {
        let fields = match m {
            Message::List(items) => items
                .iter()
                .map(|e| self.expr(e, sc, line))
                .collect::<Result<Vec<_>, _>>()?,
            Message::Scalar(PyExpr::Name(x)) if matches!(sc.vars.get(x), Some(Binding::Fields(_))) => {
                let Some(Binding::Fields(fs)) = sc.vars.get(x) else {
                    unreachable!()
                };
                fs.iter().map(Expr::ident).collect()
            }
            Message::Scalar(e) => vec![self.expr(e, sc, line)?],
        };
        let arity = self.shape(family, line)?.arity;
        if fields.len() != arity {
            return unsupported(
                format!("{}-field message on `{family}`, which carries {arity}", fields.len()),
                line,
            );
        }
        Ok(fields)
    }

    fn expr(&self, e: &PyExpr, sc: &Scope, line: usize) -> Result<Expr, TranslateError> {
        let prog = &self.v.program;
        Ok(match e {
            PyExpr::Int(v) => Expr::Int(*v),
            PyExpr::Name(n) => {
                if let Some(i) = self.v.entry().params.iter().position(|p| p == n) {
                    Expr::ident(PARAM_NAMES[i])
                } else if let Some(b) = sc.vars.get(n) {
                    match b {
                        Binding::Scalar(x) => Expr::ident(x.clone()),
                        Binding::Fields(_) => {
                            return unsupported(format!("multi-field message `{n}` used as a value"), line)
                        }
                    }
                } else if self.v.message_vars.contains(n) {
                    return unsupported(format!("`{n}` used outside the receive that binds it"), line);
                } else if self.v.locals.contains(n) {
                    Expr::index(n.clone(), Self::node_id())
                } else if sc.locals.contains(n) {
                    Expr::ident(n.clone())
                } else if let Some(v) = prog.field_index_decls.get(n) {
                    Expr::Int(*v)
                } else if prog.phase_constants.contains_key(n)
                    || matches!(n.as_str(), "True" | "False")
                {
                    Expr::ident(n.clone())
                } else if let Some(csp) = self.names.get(n) {
                    Expr::ident(csp.clone())
                } else {
                    return unsupported(format!("`{n}` used outside its loop"), line);
                }
            }
            PyExpr::Subscript(m, idx) => {
                let i = match &**idx {
                    PyExpr::Int(v) => *v,
                    PyExpr::Name(c) => match prog.field_index_decls.get(c) {
                        Some(v) => *v,
                        None => return unsupported("message subscript that is not a field constant", line),
                    },
                    _ => return unsupported("message subscript that is not a field constant", line),
                };
                match sc.vars.get(m) {
                    Some(Binding::Fields(fs)) if (0..fs.len() as i64).contains(&i) => {
                        Expr::ident(fs[i as usize].clone())
                    }
                    Some(_) => return unsupported(format!("field {i} of message `{m}`"), line),
                    None => return unsupported(format!("`{m}` used outside the receive that binds it"), line),
                }
            }
            PyExpr::Unary(op, a) => {
                let op = match op {
                    PyUnOp::Neg => UnOp::Neg,
                    PyUnOp::Not => UnOp::Not,
                };
                Expr::Unary(op, Box::new(self.expr(a, sc, line)?))
            }
            PyExpr::Binary(op, a, b) => Expr::bin(binop(*op), self.expr(a, sc, line)?, self.expr(b, sc, line)?),
            PyExpr::Len(l) => Expr::CCount(ChanRef::indexed(l.clone(), Self::node_id())),
            PyExpr::List(_) => return unsupported("list value outside a message", line),
        })
    }
}

fn binop(op: PyBinOp) -> BinOp {
    match op {
        PyBinOp::Add => BinOp::Add,
        PyBinOp::Sub => BinOp::Sub,
        PyBinOp::Mul => BinOp::Mul,
        PyBinOp::Eq => BinOp::Eq,
        PyBinOp::Ne => BinOp::Ne,
        PyBinOp::Lt => BinOp::Lt,
        PyBinOp::Le => BinOp::Le,
        PyBinOp::Gt => BinOp::Gt,
        PyBinOp::Ge => BinOp::Ge,
        PyBinOp::And => BinOp::And,
        PyBinOp::Or => BinOp::Or,
    }
}

/// `while len(L) > 0:` whose body starts with `x = L.pop(0)`.
fn drain_pattern<'a>(cond: &'a PyExpr, body: &[PyStmt]) -> Option<&'a str> {
    let list = match cond {
        PyExpr::Binary(PyBinOp::Gt | PyBinOp::Ne, a, b) => match (&**a, &**b) {
            (PyExpr::Len(l), PyExpr::Int(0)) => l,
            _ => return None,
        },
        PyExpr::Binary(PyBinOp::Lt, a, b) => match (&**a, &**b) {
            (PyExpr::Int(0), PyExpr::Len(l)) => l,
            _ => return None,
        },
        _ => return None,
    };
    match body.first().map(|s| &s.kind) {
        Some(StmtKind::ListPop { list: l, .. }) if l == list => Some(list),
        _ => None,
    }
}
