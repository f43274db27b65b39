//! Name resolution and structural restrictions on a parsed program.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::ast::*;
use super::FrontendError;

/// Python names that resolve to CSP constants.
pub type NameMap = BTreeMap<String, String>;

/// A program that passed [`validate_restrictions`], with its names
/// classified.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidatedProgram {
    pub program: PyProgram,
    /// Node-local scalars in order of first assignment (`terminated` excluded).
    pub locals: Vec<String>,
    /// FIFO lists in order of first use.
    pub fifo_lists: Vec<String>,
    /// Names bound by receives or pops.
    pub message_vars: BTreeSet<String>,
    /// Free names resolved through the name map.
    pub resolved: BTreeMap<String, String>,
}

impl ValidatedProgram {
    pub fn entry(&self) -> &PyFunc {
        self.program.entry()
    }
}

struct Ctx<'a> {
    names: &'a NameMap,
    program: &'a PyProgram,
    params: Vec<String>,
    counters: BTreeSet<String>,
    locals: Vec<String>,
    fifo_lists: Vec<String>,
    message_vars: BTreeSet<String>,
    resolved: BTreeMap<String, String>,
}

fn violation<T>(construct: impl Into<String>, line: usize) -> Result<T, FrontendError> {
    Err(FrontendError::RestrictionViolation {
        construct: construct.into(),
        line,
    })
}

fn is_terminated_flag(s: &PyStmt) -> bool {
    matches!(&s.kind, StmtKind::Assign { target, value }
        if target == "terminated"
            && (matches!(value, PyExpr::Int(1)) || matches!(value, PyExpr::Name(n) if n == "True")))
}

pub fn validate_restrictions(
    program: PyProgram,
    names: &NameMap,
) -> Result<ValidatedProgram, FrontendError> {
    let f = program.entry();
    if f.params.len() != 3 {
        return violation(
            format!(
                "FLA function with {} parameter(s) instead of (nodeId, localData, privateData)",
                f.params.len()
            ),
            f.line,
        );
    }
    let mut seen = BTreeSet::new();
    for p in &f.params {
        if !seen.insert(p) {
            return violation(format!("duplicate parameter `{p}`"), f.line);
        }
    }
    match f.body.last() {
        Some(last) if is_terminated_flag(last) => {}
        Some(last) => return violation("missing final `terminated = 1`", last.line),
        None => return violation("missing final `terminated = 1`", f.line),
    }

    let mut ctx = Ctx {
        names,
        program: &program,
        params: f.params.clone(),
        counters: BTreeSet::new(),
        locals: Vec::new(),
        fifo_lists: Vec::new(),
        message_vars: BTreeSet::new(),
        resolved: BTreeMap::new(),
    };
    ctx.classify(&f.body[..f.body.len() - 1])?;
    ctx.check_block(&f.body[..f.body.len() - 1], 0)?;

    let Ctx {
        locals,
        fifo_lists,
        message_vars,
        resolved,
        ..
    } = ctx;
    Ok(ValidatedProgram {
        program,
        locals,
        fifo_lists,
        message_vars,
        resolved,
    })
}

impl Ctx<'_> {
    fn is_constant(&self, n: &str) -> bool {
        self.program.field_index_decls.contains_key(n) || self.program.phase_constants.contains_key(n)
    }

    fn add_list(&mut self, name: &str, line: usize) -> Result<(), FrontendError> {
        if self.params.iter().any(|p| p == name)
            || self.counters.contains(name)
            || self.is_constant(name)
        {
            return violation(format!("`{name}` used as a list"), line);
        }
        if !self.fifo_lists.iter().any(|l| l == name) {
            self.fifo_lists.push(name.to_string());
        }
        Ok(())
    }

    fn bind_target(&mut self, t: &RecvTarget, line: usize) -> Result<(), FrontendError> {
        let names: Vec<&String> = match t {
            RecvTarget::Name(n) => vec![n],
            RecvTarget::Fields(v) => v.iter().collect(),
        };
        for n in names {
            self.check_writable(n, line)?;
            self.message_vars.insert(n.clone());
        }
        Ok(())
    }

    fn check_writable(&self, n: &str, line: usize) -> Result<(), FrontendError> {
        if self.params.iter().any(|p| p == n) {
            return violation(format!("assignment to parameter `{n}`"), line);
        }
        if self.counters.contains(n) {
            return violation(format!("assignment to loop counter `{n}`"), line);
        }
        if self.is_constant(n) {
            return violation(format!("assignment to constant `{n}`"), line);
        }
        if n == "terminated" {
            return violation("`terminated` set before the end of the function", line);
        }
        Ok(())
    }

    /// First pass: collects counters, locals, message variables and lists.
    fn classify(&mut self, body: &[PyStmt]) -> Result<(), FrontendError> {
        let mut stmts = Vec::new();
        walk_stmts(body, &mut |s| stmts.push(s));
        for s in &stmts {
            if let StmtKind::ForRange { counter, .. } = &s.kind {
                if self.params.contains(counter) || self.is_constant(counter) {
                    return violation(format!("loop counter `{counter}` shadows a name"), s.line);
                }
                self.counters.insert(counter.clone());
            }
        }
        for s in &stmts {
            match &s.kind {
                StmtKind::Assign { target, .. } => {
                    self.check_writable(target, s.line)?;
                    if !self.locals.contains(target) {
                        self.locals.push(target.clone());
                    }
                }
                StmtKind::Mpapi(c) => {
                    if let Some(t) = &c.target {
                        if c.kind == MpapiKind::RcvMsg {
                            self.bind_target(t, s.line)?;
                        } else if let RecvTarget::Name(n) = t {
                            // The list returned by rcvMsgs is never read.
                            self.check_writable(n, s.line)?;
                        }
                    }
                }
                StmtKind::ListPop { target, list } => {
                    self.bind_target(target, s.line)?;
                    self.add_list(list, s.line)?;
                }
                StmtKind::ListAppend { list, .. } | StmtKind::DrainHelperCall { list, .. } => {
                    self.add_list(list, s.line)?
                }
                StmtKind::While { cond, .. } | StmtKind::If { cond, .. } => {
                    let mut lens = Vec::new();
                    collect_lens(cond, &mut lens);
                    for l in lens {
                        self.add_list(l, s.line)?;
                    }
                }
                _ => {}
            }
        }
        for s in &stmts {
            if let StmtKind::Assign { value, .. } = &s.kind {
                let mut lens = Vec::new();
                collect_lens(value, &mut lens);
                for l in lens {
                    self.add_list(l, s.line)?;
                }
            }
        }
        for l in &self.locals {
            if self.message_vars.contains(l) {
                return violation(format!("`{l}` used both as a message and as a scalar"), 0);
            }
            if self.fifo_lists.contains(l) {
                return violation(format!("`{l}` used both as a list and as a scalar"), 0);
            }
        }
        for m in &self.message_vars {
            if self.fifo_lists.contains(m) {
                return violation(format!("`{m}` used both as a list and as a message"), 0);
            }
        }
        Ok(())
    }

    fn check_block(&mut self, body: &[PyStmt], loops: usize) -> Result<(), FrontendError> {
        for s in body {
            self.check_stmt(s, loops)?;
        }
        Ok(())
    }

    fn check_stmt(&mut self, s: &PyStmt, loops: usize) -> Result<(), FrontendError> {
        let line = s.line;
        match &s.kind {
            StmtKind::ForRange { bound, body, .. } => {
                if !self.names.contains_key(bound) && !self.program.phase_constants.contains_key(bound) {
                    return Err(FrontendError::UnresolvedName {
                        name: bound.clone(),
                        line,
                    });
                }
                self.resolve(bound, line)?;
                self.check_block(body, loops + 1)
            }
            StmtKind::While { cond, body } => {
                self.check_expr(cond, line)?;
                self.check_block(body, loops + 1)
            }
            StmtKind::If {
                cond,
                then_body,
                else_body,
            } => {
                self.check_expr(cond, line)?;
                self.check_block(then_body, loops)?;
                self.check_block(else_body, loops)
            }
            StmtKind::Assign { value, .. } => self.check_expr(value, line),
            StmtKind::Mpapi(c) => {
                match c.kind {
                    MpapiKind::BroadcastMsg => {
                        // The address list is implicit in the broadcast
                        // template; it only has to be a plain name.
                        if !matches!(c.destination, Some(PyExpr::Name(_))) {
                            return violation("broadcastMsg address list that is not a name", line);
                        }
                    }
                    _ => {
                        if let Some(d) = &c.destination {
                            self.check_expr(d, line)?;
                        }
                    }
                }
                for e in [&c.count, &c.sender].into_iter().flatten() {
                    self.check_expr(e, line)?;
                }
                if let Some(m) = &c.message {
                    self.check_message(m, line)?;
                }
                Ok(())
            }
            StmtKind::ListAppend { message, .. } => self.check_message(message, line),
            StmtKind::ListPop { .. } | StmtKind::DrainHelperCall { .. } => Ok(()),
            StmtKind::Continue => {
                if loops == 0 {
                    violation("continue outside a loop", line)
                } else {
                    Ok(())
                }
            }
        }
    }

    fn check_message(&mut self, m: &Message, line: usize) -> Result<(), FrontendError> {
        match m {
            Message::Scalar(e) => self.check_expr(e, line),
            Message::List(items) => {
                if items.is_empty() {
                    return violation("empty message", line);
                }
                for e in items {
                    if matches!(e, PyExpr::List(_)) {
                        return violation("nested list in a message", line);
                    }
                    self.check_expr(e, line)?;
                }
                Ok(())
            }
        }
    }

    fn check_expr(&mut self, e: &PyExpr, line: usize) -> Result<(), FrontendError> {
        match e {
            PyExpr::Int(_) => Ok(()),
            PyExpr::Name(n) => self.resolve(n, line),
            PyExpr::Subscript(n, idx) => {
                if !self.message_vars.contains(n) {
                    return violation(format!("subscript of `{n}`, which is not a message"), line);
                }
                match &**idx {
                    PyExpr::Int(_) => Ok(()),
                    PyExpr::Name(c) if self.program.field_index_decls.contains_key(c) => Ok(()),
                    _ => violation("message subscript that is not a field constant", line),
                }
            }
            PyExpr::Unary(_, a) => self.check_expr(a, line),
            PyExpr::Binary(_, a, b) => {
                self.check_expr(a, line)?;
                self.check_expr(b, line)
            }
            PyExpr::Len(_) => Ok(()),
            PyExpr::List(_) => violation("list value outside a message", line),
        }
    }

    fn resolve(&mut self, n: &str, line: usize) -> Result<(), FrontendError> {
        if self.params.iter().any(|p| p == n)
            || self.counters.contains(n)
            || self.locals.iter().any(|l| l == n)
            || self.message_vars.contains(n)
            || self.is_constant(n)
            || matches!(n, "True" | "False")
        {
            return Ok(());
        }
        if self.fifo_lists.iter().any(|l| l == n) {
            return violation(format!("list `{n}` used as a value"), line);
        }
        match self.names.get(n) {
            Some(csp) => {
                self.resolved.insert(n.to_string(), csp.clone());
                Ok(())
            }
            None => Err(FrontendError::UnresolvedName {
                name: n.to_string(),
                line,
            }),
        }
    }
}

fn collect_lens<'a>(e: &'a PyExpr, out: &mut Vec<&'a str>) {
    match e {
        PyExpr::Len(n) => out.push(n),
        PyExpr::Unary(_, a) => collect_lens(a, out),
        PyExpr::Binary(_, a, b) => {
            collect_lens(a, out);
            collect_lens(b, out);
        }
        PyExpr::Subscript(_, i) => collect_lens(i, out),
        PyExpr::List(items) => items.iter().for_each(|i| collect_lens(i, out)),
        PyExpr::Int(_) | PyExpr::Name(_) => {}
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse_program;
    use super::*;

    fn names() -> NameMap {
        [
            ("noIterations", "NoIterations"),
            ("noNodes", "NoNodes"),
            ("flSrvId", "FlSrvId"),
            ("flSrvAddress", "FlSrvId"),
            ("noNeighbors", "NoNeighbors"),
        ]
        .into_iter()
        .map(|(a, b)| (a.to_string(), b.to_string()))
        .collect()
    }

    fn validate(src: &str) -> Result<ValidatedProgram, FrontendError> {
        validate_restrictions(parse_program(src)?, &names())
    }

    #[test]
    fn classifies_decentralized_names() {
        let v = validate(include_str!("../../corpus/decentralized/source.py")).unwrap();
        assert_eq!(v.locals, ["noRcvdMsgs"]);
        assert_eq!(v.fifo_lists, ["dataFromClients1", "dataFromClients2"]);
        assert_eq!(v.message_vars.iter().collect::<Vec<_>>(), ["msg"]);
        assert_eq!(v.resolved.get("noNeighbors").map(String::as_str), Some("NoNeighbors"));
    }

    #[test]
    fn centralized_resolves_through_name_map() {
        let v = validate(include_str!("../../corpus/centralized/source.py")).unwrap();
        assert!(v.locals.is_empty());
        assert_eq!(
            v.resolved.keys().map(String::as_str).collect::<Vec<_>>(),
            ["flSrvAddress", "flSrvId", "noIterations", "noNodes"]
        );
    }

    #[test]
    fn unresolved_names_are_reported_with_line() {
        let e = validate("def f(a, b, c):\n    sendMsg(mystery, b)\n    terminated = 1\n").unwrap_err();
        assert_eq!(
            e,
            FrontendError::UnresolvedName {
                name: "mystery".into(),
                line: 2
            }
        );
        let e = validate("def f(a, b, c):\n    for i in range(bound):\n        x = 1\n    terminated = 1\n")
            .unwrap_err();
        assert!(matches!(e, FrontendError::UnresolvedName { name, .. } if name == "bound"));
    }

    #[test]
    fn requires_final_terminated_flag() {
        let e = validate("def f(a, b, c):\n    x = 1\n").unwrap_err();
        assert!(matches!(e, FrontendError::RestrictionViolation { construct, .. }
            if construct.contains("terminated")));
    }

    #[test]
    fn rejects_assignment_to_parameters_and_stray_continue() {
        assert!(matches!(
            validate("def f(a, b, c):\n    a = 1\n    terminated = 1\n"),
            Err(FrontendError::RestrictionViolation { line: 2, .. })
        ));
        assert!(matches!(
            validate("def f(a, b, c):\n    continue\n    terminated = 1\n"),
            Err(FrontendError::RestrictionViolation { line: 2, .. })
        ));
    }

    #[test]
    fn subscripts_only_on_messages() {
        assert!(matches!(
            validate("def f(a, b, c):\n    x = 0\n    y = x[0]\n    terminated = 1\n"),
            Err(FrontendError::RestrictionViolation { line: 3, .. })
        ));
    }
}
