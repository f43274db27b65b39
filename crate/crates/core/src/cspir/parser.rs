//! Recursive-descent parser for the CSP# subset.
//!
//! `->` binds tighter than `;`, so `a -> P; Q` is `(a -> P); Q`. A `;`
//! terminates a process definition when what follows it starts a new
//! top-level item. A process call may not be used as a prefix (`P() -> Q`)
//! and assignments outside `{ ... }` are rejected.

use super::ast::*;
use super::lexer::{lex, Tok, Token};
use super::validate::{check_uses, Use, UseKind};
use super::CspError;

pub fn parse_model(text: &str) -> Result<CspModel, CspError> {
    let tokens = lex(text)?;
    let mut p = Parser {
        toks: tokens,
        pos: 0,
        locals: Vec::new(),
        uses: Vec::new(),
        model: CspModel::default(),
        raw_defines: Vec::new(),
        decl_lines: Vec::new(),
    };
    p.parse_items()?;
    p.finish()
}

/// Parses a standalone expression (used for configuration values).
pub fn parse_expr(text: &str) -> Result<Expr, CspError> {
    let tokens = lex(text)?;
    let mut p = Parser {
        toks: tokens,
        pos: 0,
        locals: Vec::new(),
        uses: Vec::new(),
        model: CspModel::default(),
        raw_defines: Vec::new(),
        decl_lines: Vec::new(),
    };
    let e = p.expr()?;
    p.expect_eof()?;
    Ok(e)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    locals: Vec<String>,
    uses: Vec<Use>,
    model: CspModel,
    raw_defines: Vec<(Define, usize)>,
    decl_lines: Vec<(String, usize)>,
}

type PResult<T> = Result<T, CspError>;

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

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(x) if x == kw)
    }

    fn err<T>(&self, expected: impl Into<String>) -> PResult<T> {
        Err(CspError::Syntax {
            line: self.line(),
            expected: expected.into(),
            found: self.peek().describe(),
        })
    }

    fn expect_sym(&mut self, s: &str) -> PResult<()> {
        if self.is_sym(s) {
            self.bump();
            Ok(())
        } else {
            self.err(format!("`{s}`"))
        }
    }

    fn expect_kw(&mut self, kw: &str) -> PResult<()> {
        if self.is_kw(kw) {
            self.bump();
            Ok(())
        } else {
            self.err(format!("`{kw}`"))
        }
    }

    fn expect_eof(&mut self) -> PResult<()> {
        if matches!(self.peek(), Tok::Eof) {
            Ok(())
        } else {
            self.err("end of input")
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            _ => self.err("an identifier"),
        }
    }

    fn is_local(&self, name: &str) -> bool {
        self.locals.iter().any(|l| l == name)
    }

    fn record(&mut self, name: &str, line: usize, kind: UseKind) {
        let local = matches!(kind, UseKind::Value) && self.is_local(name);
        if !local {
            self.uses.push(Use {
                name: name.to_string(),
                line,
                kind,
            });
        }
    }

    // ---- top level -------------------------------------------------------

    fn parse_items(&mut self) -> PResult<()> {
        loop {
            match self.peek().clone() {
                Tok::Eof => return Ok(()),
                Tok::Directive(d) => match d.as_str() {
                    "define" => self.define()?,
                    "assert" => self.assertion()?,
                    _ => return self.err("`#define` or `#assert`"),
                },
                Tok::Ident(kw) if kw == "enum" => self.enum_decl()?,
                Tok::Ident(kw) if kw == "var" => self.var_decl()?,
                Tok::Ident(kw) if kw == "channel" => self.chan_decl()?,
                Tok::Ident(_) => self.process_def()?,
                _ => return self.err("a declaration or process definition"),
            }
        }
    }

    fn enum_decl(&mut self) -> PResult<()> {
        self.bump();
        self.expect_sym("{")?;
        let mut names = Vec::new();
        loop {
            let line = self.line();
            let n = self.ident()?;
            self.decl_lines.push((n.clone(), line));
            names.push(n);
            if self.is_sym(",") {
                self.bump();
            } else {
                break;
            }
        }
        self.expect_sym("}")?;
        self.expect_sym(";")?;
        self.model.enums.push(names);
        Ok(())
    }

    fn define(&mut self) -> PResult<()> {
        self.bump();
        let line = self.line();
        let name = self.ident()?;
        let value = self.expr()?;
        self.expect_sym(";")?;
        self.decl_lines.push((name.clone(), line));
        self.raw_defines.push((Define { name, value }, line));
        Ok(())
    }

    fn var_decl(&mut self) -> PResult<()> {
        self.bump();
        let line = self.line();
        let name = self.ident()?;
        let size = if self.is_sym("[") {
            self.bump();
            let e = self.expr()?;
            self.expect_sym("]")?;
            Some(e)
        } else {
            None
        };
        let init = if self.is_sym("=") {
            self.bump();
            Some(self.expr()?)
        } else {
            None
        };
        self.expect_sym(";")?;
        self.decl_lines.push((name.clone(), line));
        self.model.vars.push(VarDecl { name, size, init });
        Ok(())
    }

    fn chan_decl(&mut self) -> PResult<()> {
        self.bump();
        let line = self.line();
        let name = self.ident()?;
        let size = if self.is_sym("[") {
            self.bump();
            let e = self.expr()?;
            self.expect_sym("]")?;
            Some(e)
        } else {
            None
        };
        let capacity = self.expr()?;
        self.expect_sym(";")?;
        self.decl_lines.push((name.clone(), line));
        self.model.channels.push(ChanDecl {
            name,
            size,
            capacity,
        });
        Ok(())
    }

    fn assertion(&mut self) -> PResult<()> {
        self.bump();
        let line = self.line();
        let system = self.ident()?;
        self.expect_sym("(")?;
        self.expect_sym(")")?;
        self.uses.push(Use {
            name: system.clone(),
            line,
            kind: UseKind::Call(0),
        });
        let a = if self.is_kw("deadlockfree") {
            self.bump();
            Assertion::DeadlockFree { system }
        } else if self.is_kw("reaches") {
            self.bump();
            let pline = self.line();
            let predicate = self.ident()?;
            self.uses.push(Use {
                name: predicate.clone(),
                line: pline,
                kind: UseKind::Predicate,
            });
            Assertion::Reaches { system, predicate }
        } else if self.is_sym("|=") {
            self.bump();
            self.expect_sym("[")?;
            self.expect_sym("]")?;
            self.expect_sym("<")?;
            self.expect_sym(">")?;
            let pline = self.line();
            let predicate = self.ident()?;
            self.uses.push(Use {
                name: predicate.clone(),
                line: pline,
                kind: UseKind::Predicate,
            });
            Assertion::AlwaysEventually { system, predicate }
        } else if self.is_sym("!=") {
            return self.err("`|=` before the LTL formula (`!=` here is not a CSP# operator)");
        } else {
            return self.err("`deadlockfree`, `reaches` or `|=`");
        };
        self.expect_sym(";")?;
        self.model.assertions.push(a);
        Ok(())
    }

    fn process_def(&mut self) -> PResult<()> {
        let line = self.line();
        let name = self.ident()?;
        self.expect_sym("(")?;
        let mut params = Vec::new();
        if !self.is_sym(")") {
            loop {
                params.push(self.ident()?);
                if self.is_sym(",") {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect_sym(")")?;
        self.expect_sym("=")?;
        self.locals = params.clone();
        let body = self.seq(true)?;
        self.expect_sym(";")?;
        self.locals.clear();
        self.decl_lines.push((name.clone(), line));
        self.model.processes.push(ProcessDef { name, params, body });
        Ok(())
    }

    /// True when the token after the current `;` starts a new top-level item.
    fn semicolon_ends_definition(&self) -> bool {
        match self.peek_at(1) {
            Tok::Eof | Tok::Directive(_) => true,
            Tok::Ident(k) if k == "var" || k == "channel" || k == "enum" => true,
            Tok::Ident(_) => {
                if !matches!(self.peek_at(2), Tok::Sym("(")) {
                    return false;
                }
                let mut depth = 0usize;
                let mut k = 2;
                loop {
                    match self.peek_at(k) {
                        Tok::Sym("(") => depth += 1,
                        Tok::Sym(")") => {
                            depth -= 1;
                            if depth == 0 {
                                return matches!(self.peek_at(k + 1), Tok::Sym("="));
                            }
                        }
                        Tok::Eof => return false,
                        _ => {}
                    }
                    k += 1;
                }
            }
            _ => false,
        }
    }

    // ---- processes -------------------------------------------------------

    fn seq(&mut self, top: bool) -> PResult<ProcTerm> {
        let first = self.prefix()?;
        if self.is_sym(";") && !(top && self.semicolon_ends_definition()) {
            self.bump();
            let rest = self.seq(top)?;
            return Ok(ProcTerm::Seq(Box::new(first), Box::new(rest)));
        }
        Ok(first)
    }

    fn prefix(&mut self) -> PResult<ProcTerm> {
        let line = self.line();
        match self.peek().clone() {
            Tok::Ident(k) if k == "Skip" => {
                self.bump();
                Ok(ProcTerm::Skip)
            }
            Tok::Ident(k) if k == "if" => self.if_term(),
            Tok::Sym("{") => {
                let assigns = self.data_block()?;
                self.expect_sym("->")?;
                let then = self.prefix()?;
                Ok(ProcTerm::data_op(assigns, then))
            }
            Tok::Sym("(") => {
                self.bump();
                let t = self.seq(false)?;
                self.expect_sym(")")?;
                Ok(t)
            }
            Tok::Sym("|||") => self.interleave(),
            Tok::Ident(name) => match self.peek_at(1) {
                Tok::Sym("(") => {
                    self.bump();
                    let args = self.args()?;
                    self.record(&name, line, UseKind::Call(args.len()));
                    if self.is_sym("->") {
                        return self.err("`;` after a process call (`->` must follow an event)");
                    }
                    Ok(ProcTerm::Call { name, args })
                }
                Tok::Sym("[") | Tok::Sym("!") | Tok::Sym("?") => self.chan_io(),
                Tok::Sym("=") | Tok::Sym("++") | Tok::Sym("--") => {
                    self.bump();
                    self.err("a process (assignments must be enclosed in `{ ... }`)")
                }
                _ => self.err("a process"),
            },
            _ => self.err("a process"),
        }
    }

    fn args(&mut self) -> PResult<Vec<Expr>> {
        self.expect_sym("(")?;
        let mut args = Vec::new();
        if !self.is_sym(")") {
            loop {
                args.push(self.expr()?);
                if self.is_sym(",") {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect_sym(")")?;
        Ok(args)
    }

    fn if_term(&mut self) -> PResult<ProcTerm> {
        self.expect_kw("if")?;
        self.expect_sym("(")?;
        let cond = self.expr()?;
        self.expect_sym(")")?;
        let then = self.block()?;
        let otherwise = if self.is_kw("else") {
            self.bump();
            if self.is_kw("if") {
                Some(self.if_term()?)
            } else {
                Some(self.block()?)
            }
        } else {
            None
        };
        Ok(ProcTerm::cond(cond, then, otherwise))
    }

    fn block(&mut self) -> PResult<ProcTerm> {
        self.expect_sym("{")?;
        let t = self.seq(false)?;
        self.expect_sym("}")?;
        Ok(t)
    }

    fn data_block(&mut self) -> PResult<Vec<Assign>> {
        self.expect_sym("{")?;
        let mut out = Vec::new();
        while !self.is_sym("}") {
            out.push(self.assign()?);
            if self.is_sym(";") {
                self.bump();
            } else if !self.is_sym("}") {
                return self.err("`;` or `}`");
            }
        }
        self.bump();
        if out.is_empty() {
            return self.err("at least one assignment in `{ }`");
        }
        Ok(out)
    }

    fn assign(&mut self) -> PResult<Assign> {
        let line = self.line();
        let name = self.ident()?;
        let index = if self.is_sym("[") {
            self.bump();
            let e = self.expr()?;
            self.expect_sym("]")?;
            Some(e)
        } else {
            None
        };
        self.record(&name, line, UseKind::AssignTarget(index.is_some()));
        let target = LValue { name, index };
        match self.peek() {
            Tok::Sym("++") => {
                self.bump();
                Ok(Assign::Incr(target))
            }
            Tok::Sym("--") => {
                self.bump();
                Ok(Assign::Decr(target))
            }
            Tok::Sym("=") => {
                self.bump();
                Ok(Assign::Set(target, self.expr()?))
            }
            _ => self.err("`=`, `++` or `--`"),
        }
    }

    fn chan_ref(&mut self) -> PResult<ChanRef> {
        let name = self.ident()?;
        let index = if self.is_sym("[") {
            self.bump();
            let e = self.expr()?;
            self.expect_sym("]")?;
            Some(Box::new(e))
        } else {
            None
        };
        Ok(ChanRef { name, index })
    }

    fn chan_io(&mut self) -> PResult<ProcTerm> {
        let line = self.line();
        let chan = self.chan_ref()?;
        if self.is_sym("!") {
            self.bump();
            let mut fields = vec![self.field_expr()?];
            while self.is_sym(".") {
                self.bump();
                fields.push(self.field_expr()?);
            }
            self.record(&chan.name, line, UseKind::Channel(fields.len()));
            self.expect_sym("->")?;
            let then = self.prefix()?;
            Ok(ProcTerm::chan_out(chan, fields, then))
        } else if self.is_sym("?") {
            self.bump();
            let mut bindings = vec![self.ident()?];
            while self.is_sym(".") {
                self.bump();
                bindings.push(self.ident()?);
            }
            self.record(&chan.name, line, UseKind::Channel(bindings.len()));
            self.expect_sym("->")?;
            let mark = self.locals.len();
            self.locals.extend(bindings.iter().cloned());
            let then = self.prefix();
            self.locals.truncate(mark);
            Ok(ProcTerm::chan_in(chan, bindings, then?))
        } else {
            self.err("`!` or `?`")
        }
    }

    fn interleave(&mut self) -> PResult<ProcTerm> {
        self.expect_sym("|||")?;
        let binder = self.ident()?;
        self.expect_sym(":")?;
        self.expect_sym("{")?;
        let lo = self.expr()?;
        self.expect_sym("..")?;
        let hi = self.expr()?;
        self.expect_sym("}")?;
        self.expect_sym("@")?;
        let mark = self.locals.len();
        self.locals.push(binder.clone());
        let body = self.prefix();
        self.locals.truncate(mark);
        Ok(ProcTerm::Interleave {
            binder,
            lo,
            hi,
            body: Box::new(body?),
        })
    }

    // ---- expressions -----------------------------------------------------

    fn expr(&mut self) -> PResult<Expr> {
        self.binary(1)
    }

    /// Message fields are separated by `.`, so they stop at additive level.
    fn field_expr(&mut self) -> PResult<Expr> {
        self.binary(5)
    }

    fn binop(&self) -> Option<BinOp> {
        Some(match self.peek() {
            Tok::Sym("+") => BinOp::Add,
            Tok::Sym("-") => BinOp::Sub,
            Tok::Sym("*") => BinOp::Mul,
            Tok::Sym("==") => BinOp::Eq,
            Tok::Sym("!=") => BinOp::Ne,
            Tok::Sym("<") => BinOp::Lt,
            Tok::Sym("<=") => BinOp::Le,
            Tok::Sym(">") => BinOp::Gt,
            Tok::Sym(">=") => BinOp::Ge,
            Tok::Sym("&&") => BinOp::And,
            Tok::Sym("||") => BinOp::Or,
            _ => return None,
        })
    }

    fn binary(&mut self, min_prec: u8) -> PResult<Expr> {
        let mut lhs = self.unary()?;
        while let Some(op) = self.binop() {
            let prec = op.precedence();
            if prec < min_prec {
                break;
            }
            self.bump();
            let rhs = self.binary(prec + 1)?;
            lhs = Expr::bin(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Expr> {
        if self.is_sym("-") {
            self.bump();
            let e = self.unary()?;
            return Ok(match e {
                Expr::Int(v) => Expr::Int(-v),
                e => Expr::Unary(UnOp::Neg, Box::new(e)),
            });
        }
        if self.is_sym("!") {
            self.bump();
            let e = self.unary()?;
            return Ok(Expr::Unary(UnOp::Not, Box::new(e)));
        }
        self.primary()
    }

    fn primary(&mut self) -> PResult<Expr> {
        let line = self.line();
        match self.peek().clone() {
            Tok::Int(v) => {
                self.bump();
                Ok(Expr::Int(v))
            }
            Tok::Sym("(") => {
                self.bump();
                let e = self.expr()?;
                self.expect_sym(")")?;
                Ok(e)
            }
            Tok::Ident(k) if k == "call" => {
                self.bump();
                self.expect_sym("(")?;
                self.expect_kw("ccount")?;
                self.expect_sym(",")?;
                let cline = self.line();
                let chan = self.chan_ref()?;
                self.record(&chan.name, cline, UseKind::ChannelCount);
                self.expect_sym(")")?;
                Ok(Expr::CCount(chan))
            }
            Tok::Ident(name) => {
                self.bump();
                if self.is_sym("[") {
                    self.bump();
                    let idx = self.expr()?;
                    self.expect_sym("]")?;
                    self.record(&name, line, UseKind::Array);
                    Ok(Expr::Index(name, Box::new(idx)))
                } else {
                    self.record(&name, line, UseKind::Value);
                    Ok(Expr::Ident(name))
                }
            }
            _ => self.err("an expression"),
        }
    }

    // ---- resolution ------------------------------------------------------

    fn finish(mut self) -> PResult<CspModel> {
        let var_names: Vec<String> = self.model.vars.iter().map(|v| v.name.clone()).collect();
        for (d, _) in std::mem::take(&mut self.raw_defines) {
            if is_predicate(&d.value, &var_names) {
                self.model.predicates.push(d);
            } else {
                self.model.defines.push(d);
            }
        }
        check_uses(&self.model, &self.decl_lines, &self.uses)?;
        Ok(self.model)
    }
}

/// A `#define` is a predicate when its body compares, combines booleans, or
/// reads a variable.
fn is_predicate(e: &Expr, vars: &[String]) -> bool {
    match e {
        Expr::Binary(op, a, b) => {
            matches!(
                op,
                BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge | BinOp::And | BinOp::Or
            ) || is_predicate(a, vars)
                || is_predicate(b, vars)
        }
        Expr::Unary(UnOp::Not, _) => true,
        Expr::Unary(_, a) => is_predicate(a, vars),
        Expr::Ident(n) | Expr::Index(n, _) => vars.iter().any(|v| v == n),
        Expr::Int(_) | Expr::CCount(_) => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "P() = Skip;";

    #[test]
    fn minimal_process() {
        let m = parse_model(MINIMAL).unwrap();
        assert_eq!(m.processes.len(), 1);
        assert_eq!(m.processes[0].body, ProcTerm::Skip);
        assert_eq!(m.system().unwrap().name, "P");
    }

    #[test]
    fn arrow_binds_tighter_than_semicolon() {
        let src = "channel c 1; P() = c!1 -> Skip; Q(); Q() = Skip;";
        let m = parse_model(src).unwrap();
        let body = &m.process("P").unwrap().body;
        assert!(matches!(body, ProcTerm::Seq(a, b)
            if matches!(**a, ProcTerm::ChanOut { .. }) && matches!(**b, ProcTerm::Call { .. })));
    }

    #[test]
    fn definition_boundary_after_semicolon() {
        let src = "var x; P(n) = if (x != 0) { Q(n) }; R(0, n);\nQ(n) = Skip;\nR(i, n) = Skip;";
        let m = parse_model(src).unwrap();
        assert_eq!(m.processes.len(), 3);
        assert!(matches!(m.processes[0].body, ProcTerm::Seq(..)));
    }

    #[test]
    fn call_used_as_prefix_is_rejected() {
        let src = "P() = Q() ->\n  Skip;\nQ() = Skip;";
        match parse_model(src) {
            Err(CspError::Syntax { line, .. }) => assert_eq!(line, 1),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unbraced_assignment_is_rejected() {
        let src = "var x;\nP() =\n  x = 1;\n  Skip;";
        match parse_model(src) {
            Err(CspError::Syntax { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn conflicting_widths() {
        let src = "channel c 2;\nP() = c!1.2 -> Skip;\nQ() = c!1 -> Skip;";
        match parse_model(src) {
            Err(CspError::ArityMismatch { channel, line, .. }) => {
                assert_eq!(channel, "c");
                assert_eq!(line, 3);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn typeset_ltl_operator_is_flagged() {
        let src = "var t; #define T (t == 1); P() = Skip;\n#assert P() != []<> T;";
        match parse_model(src) {
            Err(CspError::Syntax { line, expected, .. }) => {
                assert_eq!(line, 2);
                assert!(expected.contains("|="));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn predicates_are_separated_from_constants() {
        let src = "enum {False, True}; #define N 3; var t = False;\n#define Done (t == True);\nP() = Skip;\n#assert P() reaches Done;";
        let m = parse_model(src).unwrap();
        assert_eq!(m.defines.len(), 1);
        assert_eq!(m.predicates.len(), 1);
        assert_eq!(m.predicates[0].name, "Done");
    }

    #[test]
    fn undeclared_identifier_reports_line() {
        let src = "channel c 1;\nP(a) =\n  c!a -> c!b -> Skip;";
        match parse_model(src) {
            Err(CspError::Undeclared { name, line }) => {
                assert_eq!(name, "b");
                assert_eq!(line, 3);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn input_bindings_scope_over_continuation_only() {
        let ok = "channel c 1; P() = c?x -> c!x -> Skip;";
        assert!(parse_model(ok).is_ok());
        let bad = "channel c 1; P() = (c?x -> Skip); c!x -> Skip;";
        assert!(matches!(parse_model(bad), Err(CspError::Undeclared { .. })));
    }

    #[test]
    fn call_arity_checked() {
        let src = "P() = Q(1, 2);\nQ(a) = Skip;";
        assert!(matches!(parse_model(src), Err(CspError::CallArity { .. })));
    }

    #[test]
    fn ccount_and_interleave() {
        let src = "#define N 2; var a[N]; channel c[N] 1;\nS() = |||i:{0..N-1}@P(i, a[i]);\nP(i, d) = D(call(ccount, c[i]));\nD(n) = Skip;";
        let m = parse_model(src).unwrap();
        assert!(matches!(m.system().unwrap().body, ProcTerm::Interleave { .. }));
    }
}
