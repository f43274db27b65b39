//! Recursive-descent parser for the accepted Python subset.
//!
//! Anything outside the subset that is still valid Python (imports,
//! classes, returns, other calls, ...) is reported as a restriction
//! violation rather than a syntax error.

use std::collections::{BTreeMap, BTreeSet};

use super::ast::*;
use super::lexer::{tokenize, Tok, Token};
use super::FrontendError;

const REJECTED_KEYWORDS: &[(&str, &str)] = &[
    ("import", "import"),
    ("from", "import"),
    ("class", "class definition"),
    ("return", "return statement"),
    ("break", "break statement"),
    ("pass", "pass statement"),
    ("lambda", "lambda"),
    ("global", "global declaration"),
    ("nonlocal", "nonlocal declaration"),
    ("try", "try statement"),
    ("with", "with statement"),
    ("raise", "raise statement"),
    ("yield", "yield"),
    ("async", "async"),
    ("await", "await"),
    ("del", "del statement"),
    ("assert", "assert statement"),
];

pub fn parse_program(src: &str) -> Result<PyProgram, FrontendError> {
    let toks = tokenize(src)?;
    let mut p = Parser { toks, pos: 0 };
    p.program()
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

type Res<T> = Result<T, FrontendError>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, n: usize) -> &Tok {
        let i = (self.pos + n).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn line(&self) -> usize {
        self.toks[self.pos].line
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, expected: &str) -> Res<T> {
        Err(FrontendError::Syntax {
            line: self.line(),
            expected: expected.into(),
            found: self.peek().describe(),
        })
    }

    fn restriction<T>(&self, construct: impl Into<String>, line: usize) -> Res<T> {
        Err(FrontendError::RestrictionViolation {
            construct: construct.into(),
            line,
        })
    }

    fn is_op(&self, op: &str) -> bool {
        matches!(self.peek(), Tok::Op(o) if *o == op)
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Name(n) if n == kw)
    }

    fn expect_op(&mut self, op: &str) -> Res<()> {
        if self.is_op(op) {
            self.bump();
            Ok(())
        } else {
            self.err(&format!("`{op}`"))
        }
    }

    fn expect_kw(&mut self, kw: &str) -> Res<()> {
        if self.is_kw(kw) {
            self.bump();
            Ok(())
        } else {
            self.err(&format!("`{kw}`"))
        }
    }

    fn expect_newline(&mut self) -> Res<()> {
        match self.peek() {
            Tok::Newline => {
                self.bump();
                Ok(())
            }
            Tok::Op(";") => self.restriction("multiple statements on one line", self.line()),
            _ => self.err("end of line"),
        }
    }

    fn ident(&mut self) -> Res<String> {
        match self.peek().clone() {
            Tok::Name(n) if !is_keyword(&n) => {
                self.bump();
                Ok(n)
            }
            _ => self.err("an identifier"),
        }
    }

    fn check_rejected_keyword(&self) -> Res<()> {
        if let Tok::Name(n) = self.peek() {
            if let Some((_, what)) = REJECTED_KEYWORDS.iter().find(|(k, _)| k == n) {
                return self.restriction(*what, self.line());
            }
        }
        Ok(())
    }

    fn program(&mut self) -> Res<PyProgram> {
        let mut functions = Vec::new();
        let mut constants: Vec<(String, i64)> = Vec::new();
        loop {
            match self.peek() {
                Tok::Eof => break,
                Tok::Newline => {
                    self.bump();
                }
                Tok::Indent => return self.err("a statement at column 0"),
                _ => {
                    self.check_rejected_keyword()?;
                    let line = self.line();
                    if self.is_kw("def") {
                        if !functions.is_empty() {
                            return self.restriction("more than one function definition", line);
                        }
                        functions.push(self.function()?);
                    } else if let Some((name, v)) = self.try_constant()? {
                        constants.push((name, v));
                    } else {
                        return self.restriction("top-level statement", line);
                    }
                }
            }
        }
        if functions.is_empty() {
            return Err(FrontendError::Syntax {
                line: self.line(),
                expected: "a function definition".into(),
                found: "end of input".into(),
            });
        }

        // A leading run of `NAME = INT` statements in the function body that
        // are never reassigned are constant declarations.
        let func = &mut functions[0];
        let mut assigned: BTreeMap<&str, usize> = BTreeMap::new();
        walk_stmts(&func.body, &mut |s| {
            if let StmtKind::Assign { target, .. } = &s.kind {
                *assigned.entry(target.as_str()).or_default() += 1;
            }
        });
        let mut prologue = 0;
        let params = func.params.clone();
        assigned.retain(|n, _| !params.iter().any(|p| p == n));
        for s in &func.body {
            match &s.kind {
                StmtKind::Assign {
                    target,
                    value: PyExpr::Int(_),
                } if assigned.get(target.as_str()) == Some(&1) => prologue += 1,
                StmtKind::Assign {
                    target,
                    value: PyExpr::Unary(PyUnOp::Neg, v),
                } if matches!(**v, PyExpr::Int(_))
                    && assigned.get(target.as_str()) == Some(&1) =>
                {
                    prologue += 1
                }
                _ => break,
            }
        }
        for s in func.body.drain(..prologue) {
            if let StmtKind::Assign { target, value } = s.kind {
                let v = match value {
                    PyExpr::Int(v) => v,
                    PyExpr::Unary(PyUnOp::Neg, v) => match *v {
                        PyExpr::Int(v) => -v,
                        _ => unreachable!("checked above"),
                    },
                    _ => unreachable!("checked above"),
                };
                constants.push((target, v));
            }
        }

        // Constants used as message subscripts are field indices.
        let mut subscripts = BTreeSet::new();
        let func = &functions[0];
        let mut visit = |e: &PyExpr| collect_subscripts(e, &mut subscripts);
        walk_stmts(&func.body, &mut |s| for_each_expr(s, &mut visit));
        let mut field_index_decls = BTreeMap::new();
        let mut phase_constants = BTreeMap::new();
        for (name, v) in constants {
            let line = func.line;
            if field_index_decls.contains_key(&name) || phase_constants.contains_key(&name) {
                return Err(FrontendError::RestrictionViolation {
                    construct: format!("redefinition of constant `{name}`"),
                    line,
                });
            }
            if subscripts.contains(&name) {
                field_index_decls.insert(name, v);
            } else {
                phase_constants.insert(name, v);
            }
        }
        Ok(PyProgram {
            functions,
            field_index_decls,
            phase_constants,
        })
    }

    /// `NAME = INT` or `NAME = -INT` at top level.
    fn try_constant(&mut self) -> Res<Option<(String, i64)>> {
        let (Tok::Name(name), Tok::Op("=")) = (self.peek().clone(), self.peek_at(1).clone()) else {
            return Ok(None);
        };
        let (neg, val) = match (self.peek_at(2), self.peek_at(3)) {
            (Tok::Int(v), Tok::Newline) => (false, *v),
            (Tok::Op("-"), Tok::Int(v)) if matches!(self.peek_at(4), Tok::Newline) => (true, *v),
            _ => return Ok(None),
        };
        self.pos += if neg { 4 } else { 3 };
        self.expect_newline()?;
        Ok(Some((name, if neg { -val } else { val })))
    }

    fn function(&mut self) -> Res<PyFunc> {
        let line = self.line();
        self.expect_kw("def")?;
        let name = self.ident()?;
        self.expect_op("(")?;
        let mut params = Vec::new();
        if !self.is_op(")") {
            loop {
                params.push(self.ident()?);
                if self.is_op("=") {
                    return self.restriction("default parameter value", self.line());
                }
                if !self.is_op(",") {
                    break;
                }
                self.bump();
                if self.is_op(")") {
                    break;
                }
            }
        }
        self.expect_op(")")?;
        if self.is_op("->") {
            return self.restriction("return annotation", self.line());
        }
        let body = self.block()?;
        Ok(PyFunc {
            name,
            params,
            body,
            line,
        })
    }

    /// `:` NEWLINE INDENT stmt+ DEDENT
    fn block(&mut self) -> Res<Vec<PyStmt>> {
        self.expect_op(":")?;
        if !matches!(self.peek(), Tok::Newline) {
            return self.restriction("statement on the same line as its header", self.line());
        }
        self.bump();
        if !matches!(self.peek(), Tok::Indent) {
            return self.err("an indented block");
        }
        self.bump();
        let mut body = Vec::new();
        while !matches!(self.peek(), Tok::Dedent | Tok::Eof) {
            body.push(self.stmt()?);
        }
        if matches!(self.peek(), Tok::Dedent) {
            self.bump();
        }
        Ok(body)
    }

    fn stmt(&mut self) -> Res<PyStmt> {
        self.check_rejected_keyword()?;
        let line = self.line();
        let kind = if self.is_kw("def") {
            return self.restriction("nested function", line);
        } else if self.is_kw("for") {
            self.for_stmt()?
        } else if self.is_kw("while") {
            self.bump();
            let cond = self.expr()?;
            if self.is_kw("else") {
                return self.restriction("while-else", self.line());
            }
            let body = self.block()?;
            if self.is_kw("else") {
                return self.restriction("while-else", self.line());
            }
            StmtKind::While { cond, body }
        } else if self.is_kw("if") {
            self.bump();
            self.if_rest()?
        } else if self.is_kw("continue") {
            self.bump();
            self.expect_newline()?;
            StmtKind::Continue
        } else {
            self.simple_stmt()?
        };
        Ok(PyStmt { kind, line })
    }

    fn for_stmt(&mut self) -> Res<StmtKind> {
        let line = self.line();
        self.bump();
        let counter = self.ident()?;
        self.expect_kw("in")?;
        if !self.is_kw("range") {
            return self.restriction("for loop over anything but range(...)", line);
        }
        self.bump();
        self.expect_op("(")?;
        let bound = match (self.peek().clone(), self.peek_at(1)) {
            (Tok::Name(n), Tok::Op(")")) if !is_keyword(&n) => {
                self.bump();
                n
            }
            _ => {
                // Parse for a better message.
                let _ = self.expr()?;
                if self.is_op(",") {
                    return self.restriction("range with start or step", line);
                }
                return self.restriction("loop bound that is not a named constant", line);
            }
        };
        self.expect_op(")")?;
        let body = self.block()?;
        if self.is_kw("else") {
            return self.restriction("for-else", self.line());
        }
        Ok(StmtKind::ForRange {
            counter,
            bound,
            body,
        })
    }

    /// After `if` / `elif`.
    fn if_rest(&mut self) -> Res<StmtKind> {
        let cond = self.expr()?;
        let then_body = self.block()?;
        let else_body = if self.is_kw("elif") {
            let line = self.line();
            self.bump();
            vec![PyStmt {
                kind: self.if_rest()?,
                line,
            }]
        } else if self.is_kw("else") {
            self.bump();
            self.block()?
        } else {
            Vec::new()
        };
        Ok(StmtKind::If {
            cond,
            then_body,
            else_body,
        })
    }

    fn simple_stmt(&mut self) -> Res<StmtKind> {
        let line = self.line();
        // Destructuring receive: `[a, b] = rcvMsg()`.
        if self.is_op("[") {
            let save = self.pos;
            if let Some(names) = self.name_list()? {
                if self.is_op("=") {
                    self.bump();
                    let kind = self.receive_rhs(RecvTarget::Fields(names), line)?;
                    self.expect_newline()?;
                    return Ok(kind);
                }
            }
            self.pos = save;
        }
        let Tok::Name(first) = self.peek().clone() else {
            return self.err("a statement");
        };
        if is_keyword(&first) {
            return self.err("a statement");
        }
        let kind = match self.peek_at(1).clone() {
            Tok::Op("=") => {
                self.pos += 2;
                self.assignment_rhs(first, line)?
            }
            Tok::Op(op @ ("+=" | "-=" | "*=")) => {
                self.pos += 2;
                let rhs = self.expr()?;
                let bop = match op {
                    "+=" => PyBinOp::Add,
                    "-=" => PyBinOp::Sub,
                    _ => PyBinOp::Mul,
                };
                StmtKind::Assign {
                    value: PyExpr::Binary(bop, Box::new(PyExpr::Name(first.clone())), Box::new(rhs)),
                    target: first,
                }
            }
            Tok::Op(op @ ("/=" | "//=" | "%=" | "**=")) => {
                return self.restriction(format!("operator `{op}`"), line);
            }
            Tok::Op(",") => return self.restriction("tuple assignment", line),
            Tok::Op("[") => {
                // `x[i] = ...` or an expression statement starting with a subscript.
                let save = self.pos;
                self.bump();
                self.bump();
                let _ = self.expr()?;
                self.expect_op("]")?;
                if self.is_op("=") || matches!(self.peek(), Tok::Op("+=" | "-=")) {
                    return self.restriction("subscript assignment", line);
                }
                self.pos = save;
                return self.restriction("expression statement", line);
            }
            Tok::Op(".") => {
                self.bump();
                self.bump();
                let method = self.ident()?;
                match method.as_str() {
                    "append" => {
                        self.expect_op("(")?;
                        let message = self.message()?;
                        self.expect_op(")")?;
                        StmtKind::ListAppend {
                            list: first,
                            message,
                        }
                    }
                    "pop" => return self.restriction("pop result discarded", line),
                    m => return self.restriction(format!("method call `{m}`"), line),
                }
            }
            Tok::Op("(") => {
                self.pos += 2;
                self.call_stmt(first, line)?
            }
            _ => return self.restriction("expression statement", line),
        };
        self.expect_newline()?;
        Ok(kind)
    }

    /// `[a, b, ...]` made only of identifiers, or `None` if it is not one.
    fn name_list(&mut self) -> Res<Option<Vec<String>>> {
        self.bump();
        let mut names = Vec::new();
        loop {
            match self.peek().clone() {
                Tok::Name(n) if !is_keyword(&n) => {
                    self.bump();
                    names.push(n);
                }
                _ => return Ok(None),
            }
            if self.is_op(",") {
                self.bump();
                continue;
            }
            if self.is_op("]") {
                self.bump();
                return Ok(Some(names));
            }
            return Ok(None);
        }
    }

    fn assignment_rhs(&mut self, target: String, line: usize) -> Res<StmtKind> {
        if let (Tok::Name(n), Tok::Op("(")) = (self.peek().clone(), self.peek_at(1)) {
            if matches!(n.as_str(), "rcvMsg" | "rcvMsgs") {
                return self.receive_rhs(RecvTarget::Name(target), line);
            }
        }
        if let (Tok::Name(_), Tok::Op("."), Tok::Name(m)) =
            (self.peek(), self.peek_at(1), self.peek_at(2))
        {
            if m == "pop" {
                return self.receive_rhs(RecvTarget::Name(target), line);
            }
        }
        let value = self.expr()?;
        if matches!(value, PyExpr::List(_)) {
            return self.restriction("list value outside a message", line);
        }
        if self.is_op("=") {
            return self.restriction("chained assignment", line);
        }
        Ok(StmtKind::Assign { target, value })
    }

    /// Right-hand side of a receiving assignment.
    fn receive_rhs(&mut self, target: RecvTarget, line: usize) -> Res<StmtKind> {
        let name = self.ident()?;
        if self.is_op(".") {
            self.bump();
            let m = self.ident()?;
            if m != "pop" {
                return self.restriction(format!("method call `{m}`"), line);
            }
            self.expect_op("(")?;
            match (self.peek().clone(), self.peek_at(1)) {
                (Tok::Int(0), Tok::Op(")")) => {
                    self.bump();
                    self.bump();
                }
                _ => return self.restriction("pop from anywhere but the front", line),
            }
            return Ok(StmtKind::ListPop { target, list: name });
        }
        self.expect_op("(")?;
        match name.as_str() {
            "rcvMsg" => {
                self.expect_op(")")?;
                Ok(StmtKind::Mpapi(MpapiCall {
                    kind: MpapiKind::RcvMsg,
                    destination: None,
                    message: None,
                    count: None,
                    sender: None,
                    target: Some(target),
                }))
            }
            "rcvMsgs" => {
                let count = self.expr()?;
                self.expect_op(")")?;
                Ok(StmtKind::Mpapi(MpapiCall {
                    kind: MpapiKind::RcvMsgs,
                    destination: None,
                    message: None,
                    count: Some(count),
                    sender: None,
                    target: Some(target),
                }))
            }
            other => self.restriction(format!("call to `{other}`"), line),
        }
    }

    /// A call in statement position; the opening parenthesis is consumed.
    fn call_stmt(&mut self, name: String, line: usize) -> Res<StmtKind> {
        let mut args = Vec::new();
        if !self.is_op(")") {
            loop {
                if let (Tok::Name(_), Tok::Op("=")) = (self.peek(), self.peek_at(1)) {
                    return self.restriction("keyword argument", self.line());
                }
                args.push(self.expr()?);
                if !self.is_op(",") {
                    break;
                }
                self.bump();
                if self.is_op(")") {
                    break;
                }
            }
        }
        self.expect_op(")")?;
        let arity = |n: usize| -> Res<()> {
            if args.len() == n {
                Ok(())
            } else {
                Err(FrontendError::Syntax {
                    line,
                    expected: format!("{n} argument(s) to `{name}`"),
                    found: format!("{}", args.len()),
                })
            }
        };
        match name.as_str() {
            "sendMsg" => {
                arity(2)?;
                let mut it = args.into_iter();
                let destination = it.next();
                let message = it.next().map(to_message);
                Ok(StmtKind::Mpapi(MpapiCall {
                    kind: MpapiKind::SendMsg,
                    destination,
                    message,
                    count: None,
                    sender: None,
                    target: None,
                }))
            }
            "broadcastMsg" => {
                arity(3)?;
                let mut it = args.into_iter();
                let destination = it.next();
                let message = it.next().map(to_message);
                let sender = it.next();
                Ok(StmtKind::Mpapi(MpapiCall {
                    kind: MpapiKind::BroadcastMsg,
                    destination,
                    message,
                    count: None,
                    sender,
                    target: None,
                }))
            }
            "rcvMsg" | "rcvMsgs" => self.restriction(format!("result of `{name}` discarded"), line),
            n if n.starts_with("drop") => match args.as_slice() {
                [PyExpr::Name(list)] => Ok(StmtKind::DrainHelperCall {
                    helper: name.clone(),
                    list: list.clone(),
                }),
                _ => self.restriction(format!("call to `{name}` without a single list argument"), line),
            },
            _ => self.restriction(format!("call to `{name}`"), line),
        }
    }

    fn message(&mut self) -> Res<Message> {
        Ok(to_message(self.expr()?))
    }

    // Expressions, lowest precedence first.

    fn expr(&mut self) -> Res<PyExpr> {
        if self.is_kw("lambda") {
            return self.restriction("lambda", self.line());
        }
        let e = self.or_expr()?;
        if self.is_kw("if") {
            return self.restriction("conditional expression", self.line());
        }
        Ok(e)
    }

    fn or_expr(&mut self) -> Res<PyExpr> {
        let mut l = self.and_expr()?;
        while self.is_kw("or") {
            self.bump();
            let r = self.and_expr()?;
            l = PyExpr::Binary(PyBinOp::Or, Box::new(l), Box::new(r));
        }
        Ok(l)
    }

    fn and_expr(&mut self) -> Res<PyExpr> {
        let mut l = self.not_expr()?;
        while self.is_kw("and") {
            self.bump();
            let r = self.not_expr()?;
            l = PyExpr::Binary(PyBinOp::And, Box::new(l), Box::new(r));
        }
        Ok(l)
    }

    fn not_expr(&mut self) -> Res<PyExpr> {
        if self.is_kw("not") {
            self.bump();
            let e = self.not_expr()?;
            return Ok(PyExpr::Unary(PyUnOp::Not, Box::new(e)));
        }
        self.comparison()
    }

    fn comparison(&mut self) -> Res<PyExpr> {
        let l = self.arith()?;
        let Some(op) = self.cmp_op() else {
            if self.is_kw("in") || self.is_kw("is") {
                return self.restriction(format!("operator `{}`", self.peek().describe()), self.line());
            }
            return Ok(l);
        };
        self.bump();
        let r = self.arith()?;
        if self.cmp_op().is_some() {
            return self.restriction("chained comparison", self.line());
        }
        Ok(PyExpr::Binary(op, Box::new(l), Box::new(r)))
    }

    fn cmp_op(&self) -> Option<PyBinOp> {
        match self.peek() {
            Tok::Op("==") => Some(PyBinOp::Eq),
            Tok::Op("!=") => Some(PyBinOp::Ne),
            Tok::Op("<") => Some(PyBinOp::Lt),
            Tok::Op("<=") => Some(PyBinOp::Le),
            Tok::Op(">") => Some(PyBinOp::Gt),
            Tok::Op(">=") => Some(PyBinOp::Ge),
            _ => None,
        }
    }

    fn arith(&mut self) -> Res<PyExpr> {
        let mut l = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Op("+") => PyBinOp::Add,
                Tok::Op("-") => PyBinOp::Sub,
                _ => return Ok(l),
            };
            self.bump();
            let r = self.term()?;
            l = PyExpr::Binary(op, Box::new(l), Box::new(r));
        }
    }

    fn term(&mut self) -> Res<PyExpr> {
        let mut l = self.unary()?;
        loop {
            match self.peek() {
                Tok::Op("*") => {
                    self.bump();
                    let r = self.unary()?;
                    l = PyExpr::Binary(PyBinOp::Mul, Box::new(l), Box::new(r));
                }
                Tok::Op(op @ ("/" | "//" | "%" | "@")) => {
                    let op = *op;
                    return self.restriction(format!("operator `{op}`"), self.line());
                }
                _ => return Ok(l),
            }
        }
    }

    fn unary(&mut self) -> Res<PyExpr> {
        if self.is_op("-") {
            self.bump();
            let e = self.unary()?;
            return Ok(match e {
                PyExpr::Int(v) => PyExpr::Int(-v),
                e => PyExpr::Unary(PyUnOp::Neg, Box::new(e)),
            });
        }
        if self.is_op("+") {
            self.bump();
            return self.unary();
        }
        let e = self.primary()?;
        if self.is_op("**") {
            return self.restriction("operator `**`", self.line());
        }
        Ok(e)
    }

    fn primary(&mut self) -> Res<PyExpr> {
        let line = self.line();
        match self.peek().clone() {
            Tok::Int(v) => {
                self.bump();
                Ok(PyExpr::Int(v))
            }
            Tok::Op("(") => {
                self.bump();
                let e = self.expr()?;
                if self.is_op(",") {
                    return self.restriction("tuple", line);
                }
                self.expect_op(")")?;
                Ok(e)
            }
            Tok::Op("[") => {
                self.bump();
                let mut items = Vec::new();
                if !self.is_op("]") {
                    loop {
                        items.push(self.expr()?);
                        if self.is_kw("for") {
                            return self.restriction("list comprehension", line);
                        }
                        if !self.is_op(",") {
                            break;
                        }
                        self.bump();
                        if self.is_op("]") {
                            break;
                        }
                    }
                }
                self.expect_op("]")?;
                Ok(PyExpr::List(items))
            }
            Tok::Op("{") => self.restriction("dict or set literal", line),
            Tok::Name(n) if is_keyword(&n) && !matches!(n.as_str(), "True" | "False") => {
                self.check_rejected_keyword()?;
                if n == "None" {
                    return self.restriction("None", line);
                }
                self.err("an expression")
            }
            Tok::Name(n) => {
                self.bump();
                if self.is_op("(") {
                    self.bump();
                    if n == "len" {
                        let arg = self.ident()?;
                        self.expect_op(")")?;
                        return Ok(PyExpr::Len(arg));
                    }
                    return self.restriction(format!("call to `{n}`"), line);
                }
                if self.is_op(".") {
                    return self.restriction("attribute access", line);
                }
                if self.is_op("[") {
                    self.bump();
                    let idx = self.expr()?;
                    if self.is_op(":") {
                        return self.restriction("slice", line);
                    }
                    self.expect_op("]")?;
                    if self.is_op("[") {
                        return self.restriction("nested subscript", line);
                    }
                    return Ok(PyExpr::Subscript(n, Box::new(idx)));
                }
                Ok(PyExpr::Name(n))
            }
            _ => self.err("an expression"),
        }
    }
}

fn to_message(e: PyExpr) -> Message {
    match e {
        PyExpr::List(items) => Message::List(items),
        e => Message::Scalar(e),
    }
}

fn is_keyword(n: &str) -> bool {
    matches!(
        n,
        "def"
            | "for"
            | "in"
            | "while"
            | "if"
            | "elif"
            | "else"
            | "continue"
            | "and"
            | "or"
            | "not"
            | "is"
            | "None"
            | "True"
            | "False"
    ) || REJECTED_KEYWORDS.iter().any(|(k, _)| *k == n)
}

fn collect_subscripts(e: &PyExpr, out: &mut BTreeSet<String>) {
    match e {
        PyExpr::Subscript(_, i) => {
            if let PyExpr::Name(n) = &**i {
                out.insert(n.clone());
            }
            collect_subscripts(i, out);
        }
        PyExpr::Unary(_, a) => collect_subscripts(a, out),
        PyExpr::Binary(_, a, b) => {
            collect_subscripts(a, out);
            collect_subscripts(b, out);
        }
        PyExpr::List(items) => items.iter().for_each(|i| collect_subscripts(i, out)),
        PyExpr::Int(_) | PyExpr::Name(_) | PyExpr::Len(_) => {}
    }
}

/// Calls `f` on every expression directly held by a statement.
pub(crate) fn for_each_expr<'a>(s: &'a PyStmt, f: &mut impl FnMut(&'a PyExpr)) {
    let msg = |m: &'a Message, f: &mut dyn FnMut(&'a PyExpr)| match m {
        Message::Scalar(e) => f(e),
        Message::List(items) => items.iter().for_each(f),
    };
    match &s.kind {
        StmtKind::While { cond, .. } | StmtKind::If { cond, .. } => f(cond),
        StmtKind::Assign { value, .. } => f(value),
        StmtKind::Mpapi(c) => {
            for e in [&c.destination, &c.count, &c.sender].into_iter().flatten() {
                f(e);
            }
            if let Some(m) = &c.message {
                msg(m, f);
            }
        }
        StmtKind::ListAppend { message, .. } => msg(message, f),
        StmtKind::ForRange { .. }
        | StmtKind::ListPop { .. }
        | StmtKind::DrainHelperCall { .. }
        | StmtKind::Continue => {}
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const DECENTRAL: &str = include_str!("../../corpus/decentralized/source.py");
    const CENTRAL: &str = include_str!("../../corpus/centralized/source.py");

    #[test]
    fn parses_centralized_corpus_program() {
        let p = parse_program(CENTRAL).unwrap();
        let f = p.entry();
        assert_eq!(f.name, "fl_centralized");
        assert_eq!(f.params, ["nodeId", "localData", "privateData"]);
        assert_eq!(f.body.len(), 2);
        assert!(matches!(&f.body[0].kind, StmtKind::ForRange { counter, bound, .. }
            if counter == "k" && bound == "noIterations"));
        assert!(p.field_index_decls.is_empty());
    }

    #[test]
    fn classifies_prologue_constants() {
        let p = parse_program(DECENTRAL).unwrap();
        let fields: Vec<_> = p.field_index_decls.iter().map(|(k, v)| (k.as_str(), *v)).collect();
        assert_eq!(
            fields,
            [("msgData", 3), ("msgIterNo", 0), ("msgSeqNo", 1), ("msgSrcAdr", 2)]
        );
        assert_eq!(p.phase_constants.get("PHASE1"), Some(&1));
        assert_eq!(p.phase_constants.get("PHASE2"), Some(&2));
        // The for loop and the final assignment remain.
        assert_eq!(p.entry().body.len(), 2);
    }

    #[test]
    fn elif_nests_in_else() {
        let p = parse_program(
            "def f(a, b, c):\n    if a == 1:\n        x = 1\n    elif a == 2:\n        x = 2\n    else:\n        x = 3\n    terminated = 1\n",
        )
        .unwrap();
        let StmtKind::If { else_body, .. } = &p.entry().body[0].kind else {
            panic!()
        };
        assert!(matches!(&else_body[0].kind, StmtKind::If { else_body, .. } if else_body.len() == 1));
    }

    #[test]
    fn augmented_assignment_desugars() {
        let p = parse_program("def f(a, b, c):\n    x = 0\n    x += 2\n    terminated = 1\n").unwrap();
        assert!(matches!(&p.entry().body[1].kind,
            StmtKind::Assign { value: PyExpr::Binary(PyBinOp::Add, ..), .. }));
    }

    #[test]
    fn destructuring_receive() {
        let p = parse_program("def f(a, b, c):\n    [x, y] = rcvMsg()\n    terminated = 1\n").unwrap();
        assert!(matches!(&p.entry().body[0].kind,
            StmtKind::Mpapi(MpapiCall { target: Some(RecvTarget::Fields(v)), .. }) if v.len() == 2));
    }

    fn restriction(src: &str) -> String {
        match parse_program(src) {
            Err(FrontendError::RestrictionViolation { construct, .. }) => construct,
            other => panic!("expected a restriction violation, got {other:?}"),
        }
    }

    #[test]
    fn rejects_constructs_outside_the_subset() {
        assert_eq!(restriction("import os\n"), "import");
        assert_eq!(restriction("class A:\n    x = 1\n"), "class definition");
        assert_eq!(
            restriction("def f(a, b, c):\n    def g():\n        x = 1\n"),
            "nested function"
        );
        assert_eq!(restriction("def f(a, b, c):\n    return 1\n"), "return statement");
        assert_eq!(restriction("def f(a, b, c):\n    print(a)\n"), "call to `print`");
        assert_eq!(restriction("def f(a, b, c):\n    x = a / 2\n"), "operator `/`");
        assert_eq!(
            restriction("def f(a, b, c):\n    for i in range(1, n):\n        x = 1\n"),
            "range with start or step"
        );
        assert_eq!(
            restriction("def f(a, b, c):\n    x = q.pop()\n"),
            "pop from anywhere but the front"
        );
    }

    #[test]
    fn syntax_errors_carry_lines() {
        match parse_program("def f(a, b, c):\n    x = (1 +\n") {
            Err(FrontendError::Syntax { .. }) => {}
            other => panic!("{other:?}"),
        }
        match parse_program("def f(a, b, c)\n    x = 1\n") {
            Err(FrontendError::Syntax { line: 1, .. }) => {}
            other => panic!("{other:?}"),
        }
    }
}
