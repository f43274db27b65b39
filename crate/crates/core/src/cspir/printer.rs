//! Pretty printer producing PAT-compatible CSP# text.

use std::fmt::Write;

use super::ast::*;

const INDENT: &str = "  ";

pub fn print_model(model: &CspModel) -> String {
    let mut out = String::new();
    for names in &model.enums {
        let _ = writeln!(out, "enum {{{}}};", names.join(", "));
    }
    for d in &model.defines {
        let _ = writeln!(out, "#define {} {};", d.name, expr(&d.value));
    }
    for v in &model.vars {
        let _ = write!(out, "var {}", v.name);
        if let Some(s) = &v.size {
            let _ = write!(out, "[{}]", expr(s));
        }
        if let Some(i) = &v.init {
            let _ = write!(out, " = {}", expr(i));
        }
        out.push_str(";\n");
    }
    for c in &model.channels {
        let _ = write!(out, "channel {}", c.name);
        if let Some(s) = &c.size {
            let _ = write!(out, "[{}]", expr(s));
        }
        let _ = writeln!(out, " {};", expr(&c.capacity));
    }
    for p in &model.processes {
        out.push('\n');
        out.push_str(&print_process(p));
    }
    if !model.predicates.is_empty() || !model.assertions.is_empty() {
        out.push('\n');
    }
    for d in &model.predicates {
        let _ = writeln!(out, "#define {} ({});", d.name, expr(&d.value));
    }
    for a in &model.assertions {
        let _ = writeln!(out, "#assert {a};");
    }
    out
}

pub fn print_process(p: &ProcessDef) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{}({}) =", p.name, p.params.join(", "));
    term(&p.body, 1, &mut out);
    out.push_str(";\n");
    out
}

fn pad(out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push_str(INDENT);
    }
}

/// Writes `t` starting on a fresh, indented line; no trailing newline.
fn term(t: &ProcTerm, depth: usize, out: &mut String) {
    pad(out, depth);
    match t {
        ProcTerm::Skip => out.push_str("Skip"),
        ProcTerm::DataOp { assigns, then } => {
            let body: Vec<String> = assigns.iter().map(assign).collect();
            let _ = writeln!(out, "{{{}}} ->", body.join("; "));
            prefix_tail(then, depth, out);
        }
        ProcTerm::ChanOut { chan, fields, then } => {
            let f: Vec<String> = fields.iter().map(field).collect();
            let _ = writeln!(out, "{}!{} ->", chan_ref(chan), f.join("."));
            prefix_tail(then, depth, out);
        }
        ProcTerm::ChanIn {
            chan,
            bindings,
            then,
        } => {
            let _ = writeln!(out, "{}?{} ->", chan_ref(chan), bindings.join("."));
            prefix_tail(then, depth, out);
        }
        ProcTerm::Cond {
            cond,
            then,
            otherwise,
        } => cond_term(cond, then, otherwise.as_deref(), depth, out),
        ProcTerm::Seq(a, b) => {
            if matches!(**a, ProcTerm::Seq(..)) {
                out.push_str("(\n");
                term(a, depth + 1, out);
                out.push('\n');
                pad(out, depth);
                out.push(')');
            } else {
                // `term` pads; undo the padding we already wrote.
                out.truncate(out.len() - depth * INDENT.len());
                term(a, depth, out);
            }
            out.push_str(";\n");
            term(b, depth, out);
        }
        ProcTerm::Call { name, args } => {
            let a: Vec<String> = args.iter().map(expr).collect();
            let _ = write!(out, "{}({})", name, a.join(", "));
        }
        ProcTerm::Interleave {
            binder,
            lo,
            hi,
            body,
        } => {
            let _ = writeln!(out, "|||{}:{{{}..{}}}@", binder, expr(lo), expr(hi));
            prefix_tail(body, depth + 1, out);
        }
    }
}

fn cond_term(cond: &Expr, then: &ProcTerm, otherwise: Option<&ProcTerm>, depth: usize, out: &mut String) {
    let _ = writeln!(out, "if ({}) {{", expr(cond));
    term(then, depth + 1, out);
    out.push('\n');
    pad(out, depth);
    out.push('}');
    match otherwise {
        None => {}
        Some(ProcTerm::Cond {
            cond,
            then,
            otherwise,
        }) => {
            out.push_str(" else ");
            cond_term(cond, then, otherwise.as_deref(), depth, out);
        }
        Some(o) => {
            out.push_str(" else {\n");
            term(o, depth + 1, out);
            out.push('\n');
            pad(out, depth);
            out.push('}');
        }
    }
}

/// The continuation of a prefix: `->` binds tighter than `;`, so a
/// sequential continuation needs parentheses.
fn prefix_tail(t: &ProcTerm, depth: usize, out: &mut String) {
    if matches!(t, ProcTerm::Seq(..)) {
        pad(out, depth);
        out.push_str("(\n");
        term(t, depth + 1, out);
        out.push('\n');
        pad(out, depth);
        out.push(')');
    } else {
        term(t, depth, out);
    }
}

fn assign(a: &Assign) -> String {
    match a {
        Assign::Set(t, v) => format!("{} = {}", lvalue(t), expr(v)),
        Assign::Incr(t) => format!("{}++", lvalue(t)),
        Assign::Decr(t) => format!("{}--", lvalue(t)),
    }
}

fn lvalue(l: &LValue) -> String {
    match &l.index {
        None => l.name.clone(),
        Some(i) => format!("{}[{}]", l.name, expr(i)),
    }
}

fn chan_ref(c: &ChanRef) -> String {
    match &c.index {
        None => c.name.clone(),
        Some(i) => format!("{}[{}]", c.name, expr(i)),
    }
}

/// Message fields sit between `.` separators, so anything looser than
/// additive needs parentheses.
fn field(e: &Expr) -> String {
    match e {
        Expr::Binary(op, ..) if op.precedence() < 5 => format!("({})", expr(e)),
        _ => expr(e),
    }
}

pub fn expr(e: &Expr) -> String {
    let mut s = String::new();
    write_expr(e, 0, &mut s);
    s
}

fn write_expr(e: &Expr, ctx: u8, out: &mut String) {
    match e {
        Expr::Int(v) if *v < 0 => {
            let _ = write!(out, "({v})");
        }
        Expr::Int(v) => {
            let _ = write!(out, "{v}");
        }
        Expr::Ident(n) => out.push_str(n),
        Expr::Index(n, i) => {
            out.push_str(n);
            out.push('[');
            write_expr(i, 0, out);
            out.push(']');
        }
        Expr::Unary(op, a) => {
            out.push(match op {
                UnOp::Neg => '-',
                UnOp::Not => '!',
            });
            write_expr(a, 7, out);
        }
        Expr::Binary(op, a, b) => {
            let p = op.precedence();
            let paren = p < ctx;
            if paren {
                out.push('(');
            }
            write_expr(a, p, out);
            let _ = write!(out, " {} ", op.symbol());
            // left-associative: the right operand needs strictly tighter binding
            write_expr(b, p + 1, out);
            if paren {
                out.push(')');
            }
        }
        Expr::CCount(c) => {
            let _ = write!(out, "call(ccount, {})", chan_ref(c));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cspir::parse_model;

    #[test]
    fn minimal_process_text() {
        let p = ProcessDef {
            name: "P".into(),
            params: vec![],
            body: ProcTerm::Skip,
        };
        assert_eq!(print_process(&p), "P() =\n  Skip;\n");
        let m = parse_model(&print_process(&p)).unwrap();
        assert_eq!(m.processes[0], p);
    }

    #[test]
    fn dotted_compound_messages() {
        let t = ProcTerm::chan_out(
            ChanRef::indexed("nodeChannels", Expr::ident("i")),
            ["m1", "m2", "m3", "m4"].iter().map(|n| Expr::ident(*n)).collect(),
            ProcTerm::Skip,
        );
        let p = ProcessDef {
            name: "B".into(),
            params: vec!["i".into(), "m1".into(), "m2".into(), "m3".into(), "m4".into()],
            body: t,
        };
        assert!(print_process(&p).contains("nodeChannels[i]!m1.m2.m3.m4 ->\n  Skip"));
    }

    #[test]
    fn expression_parenthesisation() {
        let e = Expr::bin(
            BinOp::Sub,
            Expr::ident("a"),
            Expr::bin(BinOp::Sub, Expr::ident("b"), Expr::int(1)),
        );
        assert_eq!(expr(&e), "a - (b - 1)");
        let e = Expr::bin(
            BinOp::Mul,
            Expr::int(2),
            Expr::bin(BinOp::Sub, Expr::ident("N"), Expr::int(1)),
        );
        assert_eq!(expr(&e), "2 * (N - 1)");
    }

    #[test]
    fn nested_sequence_round_trips_exactly() {
        let src = "channel c 2;\nP() = c!1 -> (Q(); Q()); (Q(); Q()); Q();\nQ() = Skip;";
        let m = parse_model(src).unwrap();
        let again = parse_model(&print_model(&m)).unwrap();
        assert_eq!(m, again);
    }
}
