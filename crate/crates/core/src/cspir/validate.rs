//! Name resolution and well-formedness checks for [`CspModel`]s.

use rustc_hash::{FxHashMap, FxHashSet};

use super::ast::*;
use super::CspError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum UseKind {
    /// Plain identifier in an expression.
    Value,
    /// `x[...]` in an expression.
    Array,
    /// Target of an assignment; `true` when indexed.
    AssignTarget(bool),
    /// Channel output or input with the given number of fields.
    Channel(usize),
    ChannelCount,
    /// Process call with the given number of arguments.
    Call(usize),
    Predicate,
}

#[derive(Debug, Clone)]
pub(crate) struct Use {
    pub name: String,
    pub line: usize,
    pub kind: UseKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Global {
    Constant,
    Var { array: bool },
    Channel,
    Predicate,
}

pub(crate) fn check_uses(
    model: &CspModel,
    decl_lines: &[(String, usize)],
    uses: &[Use],
) -> Result<(), CspError> {
    let mut globals: FxHashMap<&str, Global> = FxHashMap::default();
    let mut seen: FxHashSet<&str> = FxHashSet::default();
    for (name, line) in decl_lines {
        if !seen.insert(name.as_str()) {
            return Err(CspError::Duplicate {
                name: name.clone(),
                line: *line,
            });
        }
    }
    for e in model.enums.iter().flatten() {
        globals.insert(e, Global::Constant);
    }
    for d in &model.defines {
        globals.insert(&d.name, Global::Constant);
    }
    for v in &model.vars {
        globals.insert(
            &v.name,
            Global::Var {
                array: v.size.is_some(),
            },
        );
    }
    for c in &model.channels {
        globals.insert(&c.name, Global::Channel);
    }
    for p in &model.predicates {
        globals.insert(&p.name, Global::Predicate);
    }
    let procs: FxHashMap<&str, usize> = model
        .processes
        .iter()
        .map(|p| (p.name.as_str(), p.params.len()))
        .collect();

    let mut widths: FxHashMap<&str, usize> = FxHashMap::default();
    for u in uses {
        let g = globals.get(u.name.as_str()).copied();
        let undeclared = || CspError::Undeclared {
            name: u.name.clone(),
            line: u.line,
        };
        match u.kind {
            UseKind::Value => match g {
                Some(Global::Constant) | Some(Global::Var { array: false }) => {}
                // predicates may reference one another
                Some(Global::Predicate) => {}
                _ => return Err(undeclared()),
            },
            UseKind::Array => match g {
                Some(Global::Var { array: true }) => {}
                _ => return Err(undeclared()),
            },
            UseKind::AssignTarget(indexed) => match g {
                Some(Global::Var { array }) if array == indexed => {}
                _ => return Err(undeclared()),
            },
            UseKind::ChannelCount => {
                if g != Some(Global::Channel) {
                    return Err(undeclared());
                }
            }
            UseKind::Channel(n) => {
                if g != Some(Global::Channel) {
                    return Err(undeclared());
                }
                match widths.get(u.name.as_str()) {
                    Some(&w) if w != n => {
                        return Err(CspError::ArityMismatch {
                            channel: u.name.clone(),
                            expected: w,
                            found: n,
                            line: u.line,
                        })
                    }
                    Some(_) => {}
                    None => {
                        widths.insert(&u.name, n);
                    }
                }
            }
            UseKind::Call(n) => match procs.get(u.name.as_str()) {
                None => {
                    return Err(CspError::UnknownProcess {
                        name: u.name.clone(),
                        line: u.line,
                    })
                }
                Some(&arity) if arity != n => {
                    return Err(CspError::CallArity {
                        name: u.name.clone(),
                        expected: arity,
                        found: n,
                        line: u.line,
                    })
                }
                Some(_) => {}
            },
            UseKind::Predicate => {
                if g != Some(Global::Predicate) {
                    return Err(undeclared());
                }
            }
        }
    }

    let consts = eval_constants(model)?;
    for c in &model.channels {
        let cap = eval_const(&c.capacity, &consts)?;
        if cap < 1 {
            return Err(CspError::Capacity {
                channel: c.name.clone(),
                value: cap,
            });
        }
    }
    Ok(())
}

/// Checks a model built in memory: every identifier is declared, calls match
/// arities, channel widths agree and capacities are positive.
pub fn validate_model(model: &CspModel) -> Result<(), CspError> {
    let mut uses = Vec::new();
    let mut decls = Vec::new();
    for e in model.enums.iter().flatten() {
        decls.push((e.clone(), 0));
    }
    for d in model.defines.iter().chain(&model.predicates) {
        decls.push((d.name.clone(), 0));
        collect_expr(&d.value, &[], &mut uses);
    }
    for v in &model.vars {
        decls.push((v.name.clone(), 0));
    }
    for c in &model.channels {
        decls.push((c.name.clone(), 0));
    }
    for p in &model.processes {
        decls.push((p.name.clone(), 0));
        let mut locals = p.params.clone();
        collect_term(&p.body, &mut locals, &mut uses);
    }
    for a in &model.assertions {
        uses.push(Use {
            name: a.system().to_string(),
            line: 0,
            kind: UseKind::Call(0),
        });
        if let Some(pred) = a.predicate() {
            uses.push(Use {
                name: pred.to_string(),
                line: 0,
                kind: UseKind::Predicate,
            });
        }
    }
    check_uses(model, &decls, &uses)
}

fn push(uses: &mut Vec<Use>, name: &str, kind: UseKind) {
    uses.push(Use {
        name: name.to_string(),
        line: 0,
        kind,
    });
}

fn collect_expr(e: &Expr, locals: &[String], uses: &mut Vec<Use>) {
    match e {
        Expr::Int(_) => {}
        Expr::Ident(n) => {
            if !locals.contains(n) {
                push(uses, n, UseKind::Value);
            }
        }
        Expr::Index(n, i) => {
            push(uses, n, UseKind::Array);
            collect_expr(i, locals, uses);
        }
        Expr::Unary(_, a) => collect_expr(a, locals, uses),
        Expr::Binary(_, a, b) => {
            collect_expr(a, locals, uses);
            collect_expr(b, locals, uses);
        }
        Expr::CCount(c) => {
            push(uses, &c.name, UseKind::ChannelCount);
            if let Some(i) = &c.index {
                collect_expr(i, locals, uses);
            }
        }
    }
}

fn collect_chan(c: &ChanRef, width: usize, locals: &[String], uses: &mut Vec<Use>) {
    if let Some(i) = &c.index {
        collect_expr(i, locals, uses);
    }
    push(uses, &c.name, UseKind::Channel(width));
}

fn collect_term(t: &ProcTerm, locals: &mut Vec<String>, uses: &mut Vec<Use>) {
    match t {
        ProcTerm::Skip => {}
        ProcTerm::DataOp { assigns, then } => {
            for a in assigns {
                let target = a.target();
                if let Some(i) = &target.index {
                    collect_expr(i, locals, uses);
                }
                push(uses, &target.name, UseKind::AssignTarget(target.index.is_some()));
                if let Assign::Set(_, v) = a {
                    collect_expr(v, locals, uses);
                }
            }
            collect_term(then, locals, uses);
        }
        ProcTerm::ChanOut { chan, fields, then } => {
            collect_chan(chan, fields.len(), locals, uses);
            for f in fields {
                collect_expr(f, locals, uses);
            }
            collect_term(then, locals, uses);
        }
        ProcTerm::ChanIn {
            chan,
            bindings,
            then,
        } => {
            collect_chan(chan, bindings.len(), locals, uses);
            let mark = locals.len();
            locals.extend(bindings.iter().cloned());
            collect_term(then, locals, uses);
            locals.truncate(mark);
        }
        ProcTerm::Cond {
            cond,
            then,
            otherwise,
        } => {
            collect_expr(cond, locals, uses);
            collect_term(then, locals, uses);
            if let Some(o) = otherwise {
                collect_term(o, locals, uses);
            }
        }
        ProcTerm::Seq(a, b) => {
            collect_term(a, locals, uses);
            collect_term(b, locals, uses);
        }
        ProcTerm::Call { name, args } => {
            for a in args {
                collect_expr(a, locals, uses);
            }
            push(uses, name, UseKind::Call(args.len()));
        }
        ProcTerm::Interleave {
            binder,
            lo,
            hi,
            body,
        } => {
            collect_expr(lo, locals, uses);
            collect_expr(hi, locals, uses);
            locals.push(binder.clone());
            collect_term(body, locals, uses);
            locals.pop();
        }
    }
}

/// Evaluates the enum members and constant defines of a model.
pub fn eval_constants(model: &CspModel) -> Result<FxHashMap<String, i64>, CspError> {
    let mut env = FxHashMap::default();
    for names in &model.enums {
        for (i, n) in names.iter().enumerate() {
            env.insert(n.clone(), i as i64);
        }
    }
    // Defines may refer to later defines; iterate until nothing changes.
    let mut pending: Vec<&Define> = model.defines.iter().collect();
    while !pending.is_empty() {
        let before = pending.len();
        let mut rest = Vec::new();
        for d in pending {
            match eval_const(&d.value, &env) {
                Ok(v) => {
                    env.insert(d.name.clone(), v);
                }
                Err(_) => rest.push(d),
            }
        }
        if rest.len() == before {
            let d = rest[0];
            return eval_const(&d.value, &env).map(|_| env.clone());
        }
        pending = rest;
    }
    Ok(env)
}

pub fn eval_const(e: &Expr, env: &FxHashMap<String, i64>) -> Result<i64, CspError> {
    Ok(match e {
        Expr::Int(v) => *v,
        Expr::Ident(n) => *env.get(n).ok_or_else(|| CspError::NotConstant {
            what: format!("`{n}`"),
        })?,
        Expr::Unary(UnOp::Neg, a) => -eval_const(a, env)?,
        Expr::Unary(UnOp::Not, a) => (eval_const(a, env)? == 0) as i64,
        Expr::Binary(op, a, b) => {
            let x = eval_const(a, env)?;
            let y = eval_const(b, env)?;
            apply_binop(*op, x, y).ok_or_else(|| CspError::NotConstant {
                what: "an overflowing expression".into(),
            })?
        }
        Expr::Index(n, _) => {
            return Err(CspError::NotConstant {
                what: format!("array access `{n}[..]`"),
            })
        }
        Expr::CCount(_) => {
            return Err(CspError::NotConstant {
                what: "`call(ccount, ..)`".into(),
            })
        }
    })
}

pub fn apply_binop(op: BinOp, x: i64, y: i64) -> Option<i64> {
    Some(match op {
        BinOp::Add => x.checked_add(y)?,
        BinOp::Sub => x.checked_sub(y)?,
        BinOp::Mul => x.checked_mul(y)?,
        BinOp::Eq => (x == y) as i64,
        BinOp::Ne => (x != y) as i64,
        BinOp::Lt => (x < y) as i64,
        BinOp::Le => (x <= y) as i64,
        BinOp::Gt => (x > y) as i64,
        BinOp::Ge => (x >= y) as i64,
        BinOp::And => (x != 0 && y != 0) as i64,
        BinOp::Or => (x != 0 || y != 0) as i64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cspir::parse_model;

    #[test]
    fn defines_resolve_forward_references() {
        let m = parse_model("#define A B + 1; #define B 2; P() = Skip;").unwrap();
        let env = eval_constants(&m).unwrap();
        assert_eq!(env["A"], 3);
    }

    #[test]
    fn zero_capacity_rejected() {
        let r = parse_model("#define N 1; channel c N-1; P() = Skip;");
        assert!(matches!(r, Err(CspError::Capacity { value: 0, .. })));
    }

    #[test]
    fn built_model_validation_matches_parser() {
        let src = "enum {False, True}; var t = False; channel c[2] 1;\nP(i) = c[i]?x -> {t = True} -> c[i]!x -> Skip;";
        let m = parse_model(src).unwrap();
        validate_model(&m).unwrap();
        let mut broken = m.clone();
        broken.vars.clear();
        assert!(matches!(
            validate_model(&broken),
            Err(CspError::Undeclared { name, .. }) if name == "t"
        ));
    }
}
