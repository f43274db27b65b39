//! Canonical normal form of CSP# models and structural comparison.
//!
//! The normal form is invariant under:
//! - declaration order,
//! - process names (renamed `P0, P1, ...` in first-use order from the system),
//! - parameter names and order (parameters are re-ordered by first use in the
//!   body and every call site is permuted accordingly, then renamed `p0, ...`),
//! - input binding names (`b0, b1, ...` in traversal order),
//! - placement of sequential continuations: `(if (c) {P} else {Q}); R` and
//!   `if (c) {P; R} else {Q; R}` coincide, as do `Skip; R` and `R`,
//! - `x++` / `x = x + 1` (and `--`).

use rustc_hash::{FxHashMap, FxHashSet};
use serde::Serialize;

use super::ast::*;

/// Result of [`compare_structural`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EquivalenceReport {
    pub equal: bool,
    /// First differing declaration or process location, named after the
    /// left-hand model.
    pub first_difference: Option<String>,
}

pub fn canonicalize(model: &CspModel) -> CspModel {
    Canonicalizer::new(model).run().model
}

pub fn compare_structural(a: &CspModel, b: &CspModel) -> EquivalenceReport {
    let ca = Canonicalizer::new(a).run();
    let cb = Canonicalizer::new(b).run();
    match first_difference(&ca, &cb) {
        None => EquivalenceReport {
            equal: true,
            first_difference: None,
        },
        Some(d) => EquivalenceReport {
            equal: false,
            first_difference: Some(d),
        },
    }
}

struct Canonical {
    model: CspModel,
    /// canonical process name -> original name
    originals: FxHashMap<String, String>,
}

struct Canonicalizer<'a> {
    src: &'a CspModel,
    fresh: usize,
}

impl<'a> Canonicalizer<'a> {
    fn new(src: &'a CspModel) -> Self {
        Canonicalizer { src, fresh: 0 }
    }

    fn run(mut self) -> Canonical {
        // 1. unique binding names, then push continuations to the leaves
        let mut procs: Vec<ProcessDef> = Vec::with_capacity(self.src.processes.len());
        for p in &self.src.processes {
            let mut scope: Vec<(String, String)> =
                p.params.iter().map(|x| (x.clone(), x.clone())).collect();
            let body = self.freshen(&p.body, &mut scope);
            procs.push(ProcessDef {
                name: p.name.clone(),
                params: p.params.clone(),
                body: normalize(&body, None),
            });
        }

        // 2. parameter order
        let perms = param_orders(&procs);
        let procs: Vec<ProcessDef> = procs
            .iter()
            .map(|p| {
                let perm = &perms[&p.name];
                ProcessDef {
                    name: p.name.clone(),
                    params: perm.iter().map(|&i| p.params[i].clone()).collect(),
                    body: permute_calls(&p.body, &perms),
                }
            })
            .collect();

        // 3. process order and names
        let by_name: FxHashMap<&str, &ProcessDef> =
            procs.iter().map(|p| (p.name.as_str(), p)).collect();
        let mut order: Vec<&str> = Vec::new();
        let mut seen: FxHashSet<&str> = FxHashSet::default();
        if let Some(sys) = self.src.system() {
            order.push(&sys.name);
            seen.insert(&sys.name);
        }
        let mut i = 0;
        while i < order.len() {
            if let Some(p) = by_name.get(order[i]) {
                let mut callees = Vec::new();
                callees_in_order(&p.body, &mut callees);
                for c in callees {
                    if by_name.contains_key(c) && seen.insert(c) {
                        order.push(c);
                    }
                }
            }
            i += 1;
        }
        let mut unreached: Vec<&str> = procs
            .iter()
            .map(|p| p.name.as_str())
            .filter(|n| !seen.contains(n))
            .collect();
        unreached.sort_unstable();
        order.extend(unreached);
        let names: FxHashMap<String, String> = order
            .iter()
            .enumerate()
            .map(|(i, n)| (n.to_string(), format!("P{i}")))
            .collect();

        // 4. local names
        let processes = order
            .iter()
            .map(|n| {
                let p = by_name[n];
                let mut scope: Vec<(String, String)> = p
                    .params
                    .iter()
                    .enumerate()
                    .map(|(i, x)| (x.clone(), format!("p{i}")))
                    .collect();
                let mut counter = 0;
                ProcessDef {
                    name: names[*n].clone(),
                    params: (0..p.params.len()).map(|i| format!("p{i}")).collect(),
                    body: rename(&p.body, &mut scope, &mut counter, &names),
                }
            })
            .collect();

        let mut defines = self.src.defines.clone();
        defines.sort_by(|a, b| a.name.cmp(&b.name));
        let mut vars = self.src.vars.clone();
        vars.sort_by(|a, b| a.name.cmp(&b.name));
        let mut channels = self.src.channels.clone();
        channels.sort_by(|a, b| a.name.cmp(&b.name));
        let mut predicates = self.src.predicates.clone();
        predicates.sort_by(|a, b| a.name.cmp(&b.name));
        let mut assertions: Vec<Assertion> = self
            .src
            .assertions
            .iter()
            .map(|a| rename_assertion(a, &names))
            .collect();
        assertions.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
        assertions.dedup();

        let originals = names.into_iter().map(|(o, c)| (c, o)).collect();
        Canonical {
            model: CspModel {
                enums: self.src.enums.clone(),
                defines,
                vars,
                channels,
                processes,
                predicates,
                assertions,
            },
            originals,
        }
    }

    /// Gives every input binding a unique name so continuations can be
    /// moved under binders without capture.
    fn freshen(&mut self, t: &ProcTerm, scope: &mut Vec<(String, String)>) -> ProcTerm {
        match t {
            ProcTerm::Skip => ProcTerm::Skip,
            ProcTerm::DataOp { assigns, then } => ProcTerm::DataOp {
                assigns: assigns.iter().map(|a| map_assign(a, &|e| subst(e, scope))).collect(),
                then: Box::new(self.freshen(then, scope)),
            },
            ProcTerm::ChanOut { chan, fields, then } => ProcTerm::ChanOut {
                chan: map_chan(chan, &|e| subst(e, scope)),
                fields: fields.iter().map(|f| subst(f, scope)).collect(),
                then: Box::new(self.freshen(then, scope)),
            },
            ProcTerm::ChanIn {
                chan,
                bindings,
                then,
            } => {
                let chan = map_chan(chan, &|e| subst(e, scope));
                let mark = scope.len();
                let mut fresh = Vec::with_capacity(bindings.len());
                for b in bindings {
                    let n = format!("#{}", self.fresh);
                    self.fresh += 1;
                    scope.push((b.clone(), n.clone()));
                    fresh.push(n);
                }
                let then = self.freshen(then, scope);
                scope.truncate(mark);
                ProcTerm::ChanIn {
                    chan,
                    bindings: fresh,
                    then: Box::new(then),
                }
            }
            ProcTerm::Cond {
                cond,
                then,
                otherwise,
            } => ProcTerm::Cond {
                cond: subst(cond, scope),
                then: Box::new(self.freshen(then, scope)),
                otherwise: otherwise.as_ref().map(|o| Box::new(self.freshen(o, scope))),
            },
            ProcTerm::Seq(a, b) => ProcTerm::Seq(
                Box::new(self.freshen(a, scope)),
                Box::new(self.freshen(b, scope)),
            ),
            ProcTerm::Call { name, args } => ProcTerm::Call {
                name: name.clone(),
                args: args.iter().map(|a| subst(a, scope)).collect(),
            },
            ProcTerm::Interleave {
                binder,
                lo,
                hi,
                body,
            } => {
                let lo = subst(lo, scope);
                let hi = subst(hi, scope);
                let n = format!("#{}", self.fresh);
                self.fresh += 1;
                scope.push((binder.clone(), n.clone()));
                let body = self.freshen(body, scope);
                scope.pop();
                ProcTerm::Interleave {
                    binder: n,
                    lo,
                    hi,
                    body: Box::new(body),
                }
            }
        }
    }
}

fn lookup<'s>(scope: &'s [(String, String)], name: &str) -> Option<&'s str> {
    scope
        .iter()
        .rev()
        .find(|(o, _)| o == name)
        .map(|(_, n)| n.as_str())
}

/// Renames local identifiers per `scope`; globals pass through.
fn subst(e: &Expr, scope: &[(String, String)]) -> Expr {
    match e {
        Expr::Int(v) => Expr::Int(*v),
        Expr::Ident(n) => Expr::Ident(lookup(scope, n).unwrap_or(n).to_string()),
        Expr::Index(n, i) => Expr::Index(n.clone(), Box::new(subst(i, scope))),
        Expr::Unary(op, a) => Expr::Unary(*op, Box::new(subst(a, scope))),
        Expr::Binary(op, a, b) => {
            Expr::Binary(*op, Box::new(subst(a, scope)), Box::new(subst(b, scope)))
        }
        Expr::CCount(c) => Expr::CCount(map_chan(c, &|i| subst(i, scope))),
    }
}

fn map_chan(c: &ChanRef, f: &dyn Fn(&Expr) -> Expr) -> ChanRef {
    ChanRef {
        name: c.name.clone(),
        index: c.index.as_ref().map(|i| Box::new(f(i))),
    }
}

fn map_assign(a: &Assign, f: &dyn Fn(&Expr) -> Expr) -> Assign {
    let lv = |l: &LValue| LValue {
        name: l.name.clone(),
        index: l.index.as_ref().map(f),
    };
    match a {
        Assign::Set(t, v) => Assign::Set(lv(t), f(v)),
        Assign::Incr(t) => Assign::Incr(lv(t)),
        Assign::Decr(t) => Assign::Decr(lv(t)),
    }
}

fn normalize_assign(a: Assign) -> Assign {
    match a {
        Assign::Incr(t) => {
            let v = Expr::bin(BinOp::Add, t.to_expr(), Expr::Int(1));
            Assign::Set(t, v)
        }
        Assign::Decr(t) => {
            let v = Expr::bin(BinOp::Sub, t.to_expr(), Expr::Int(1));
            Assign::Set(t, v)
        }
        a => a,
    }
}

/// Pushes the continuation `k` (`None` = successful end) to every leaf.
fn normalize(t: &ProcTerm, k: Option<&ProcTerm>) -> ProcTerm {
    match t {
        ProcTerm::Skip => k.cloned().unwrap_or(ProcTerm::Skip),
        ProcTerm::DataOp { assigns, then } => ProcTerm::DataOp {
            assigns: assigns.iter().cloned().map(normalize_assign).collect(),
            then: Box::new(normalize(then, k)),
        },
        ProcTerm::ChanOut { chan, fields, then } => ProcTerm::ChanOut {
            chan: chan.clone(),
            fields: fields.clone(),
            then: Box::new(normalize(then, k)),
        },
        ProcTerm::ChanIn {
            chan,
            bindings,
            then,
        } => ProcTerm::ChanIn {
            chan: chan.clone(),
            bindings: bindings.clone(),
            then: Box::new(normalize(then, k)),
        },
        ProcTerm::Cond {
            cond,
            then,
            otherwise,
        } => ProcTerm::Cond {
            cond: cond.clone(),
            then: Box::new(normalize(then, k)),
            otherwise: Some(Box::new(match otherwise {
                Some(o) => normalize(o, k),
                None => normalize(&ProcTerm::Skip, k),
            })),
        },
        ProcTerm::Seq(a, b) => {
            let kb = normalize(b, k);
            normalize(a, Some(&kb))
        }
        ProcTerm::Call { .. } | ProcTerm::Interleave { .. } => {
            let head = match t {
                ProcTerm::Interleave {
                    binder,
                    lo,
                    hi,
                    body,
                } => ProcTerm::Interleave {
                    binder: binder.clone(),
                    lo: lo.clone(),
                    hi: hi.clone(),
                    body: Box::new(normalize(body, None)),
                },
                _ => t.clone(),
            };
            match k {
                None | Some(ProcTerm::Skip) => head,
                Some(k) => ProcTerm::Seq(Box::new(head), Box::new(k.clone())),
            }
        }
    }
}

// ---- parameter ordering ---------------------------------------------------

fn expr_params(e: &Expr, params: &[String], out: &mut Vec<usize>) {
    e.visit_names(&mut |n| {
        if let Some(i) = params.iter().position(|p| p == n) {
            if !out.contains(&i) {
                out.push(i);
            }
        }
    });
}

/// Parameters in order of first use outside call arguments; when
/// `perms` is given, also inside call arguments visited in the callee's
/// canonical parameter order.
fn param_uses(
    t: &ProcTerm,
    params: &[String],
    perms: Option<&FxHashMap<String, Vec<usize>>>,
    out: &mut Vec<usize>,
) {
    match t {
        ProcTerm::Skip => {}
        ProcTerm::DataOp { assigns, then } => {
            if perms.is_none() {
                for a in assigns {
                    if let Some(i) = &a.target().index {
                        expr_params(i, params, out);
                    }
                    if let Assign::Set(_, v) = a {
                        expr_params(v, params, out);
                    }
                }
            }
            param_uses(then, params, perms, out);
        }
        ProcTerm::ChanOut { chan, fields, then } => {
            if perms.is_none() {
                if let Some(i) = &chan.index {
                    expr_params(i, params, out);
                }
                for f in fields {
                    expr_params(f, params, out);
                }
            }
            param_uses(then, params, perms, out);
        }
        ProcTerm::ChanIn { chan, then, .. } => {
            if perms.is_none() {
                if let Some(i) = &chan.index {
                    expr_params(i, params, out);
                }
            }
            param_uses(then, params, perms, out);
        }
        ProcTerm::Cond {
            cond,
            then,
            otherwise,
        } => {
            if perms.is_none() {
                expr_params(cond, params, out);
            }
            param_uses(then, params, perms, out);
            if let Some(o) = otherwise {
                param_uses(o, params, perms, out);
            }
        }
        ProcTerm::Seq(a, b) => {
            param_uses(a, params, perms, out);
            param_uses(b, params, perms, out);
        }
        ProcTerm::Call { name, args } => {
            if let Some(perms) = perms {
                match perms.get(name) {
                    Some(perm) if perm.len() == args.len() => {
                        for &i in perm {
                            expr_params(&args[i], params, out);
                        }
                    }
                    _ => {
                        for a in args {
                            expr_params(a, params, out);
                        }
                    }
                }
            }
        }
        ProcTerm::Interleave { lo, hi, body, .. } => {
            if perms.is_none() {
                expr_params(lo, params, out);
                expr_params(hi, params, out);
            }
            param_uses(body, params, perms, out);
        }
    }
}

fn param_orders(procs: &[ProcessDef]) -> FxHashMap<String, Vec<usize>> {
    let direct: FxHashMap<String, Vec<usize>> = procs
        .iter()
        .map(|p| {
            let mut v = Vec::new();
            param_uses(&p.body, &p.params, None, &mut v);
            (p.name.clone(), v)
        })
        .collect();
    let complete = |p: &ProcessDef, mut order: Vec<usize>| {
        for i in 0..p.params.len() {
            if !order.contains(&i) {
                order.push(i);
            }
        }
        order
    };
    let mut perms: FxHashMap<String, Vec<usize>> = procs
        .iter()
        .map(|p| (p.name.clone(), complete(p, direct[&p.name].clone())))
        .collect();
    // Call-only parameters depend on callee orders; iterate to a fixpoint.
    for _ in 0..=procs.len() {
        let mut next = FxHashMap::default();
        for p in procs {
            let mut order = direct[&p.name].clone();
            param_uses(&p.body, &p.params, Some(&perms), &mut order);
            next.insert(p.name.clone(), complete(p, order));
        }
        if next == perms {
            break;
        }
        perms = next;
    }
    perms
}

fn permute_calls(t: &ProcTerm, perms: &FxHashMap<String, Vec<usize>>) -> ProcTerm {
    match t {
        ProcTerm::Skip => ProcTerm::Skip,
        ProcTerm::DataOp { assigns, then } => ProcTerm::DataOp {
            assigns: assigns.clone(),
            then: Box::new(permute_calls(then, perms)),
        },
        ProcTerm::ChanOut { chan, fields, then } => ProcTerm::ChanOut {
            chan: chan.clone(),
            fields: fields.clone(),
            then: Box::new(permute_calls(then, perms)),
        },
        ProcTerm::ChanIn {
            chan,
            bindings,
            then,
        } => ProcTerm::ChanIn {
            chan: chan.clone(),
            bindings: bindings.clone(),
            then: Box::new(permute_calls(then, perms)),
        },
        ProcTerm::Cond {
            cond,
            then,
            otherwise,
        } => ProcTerm::Cond {
            cond: cond.clone(),
            then: Box::new(permute_calls(then, perms)),
            otherwise: otherwise.as_ref().map(|o| Box::new(permute_calls(o, perms))),
        },
        ProcTerm::Seq(a, b) => ProcTerm::Seq(
            Box::new(permute_calls(a, perms)),
            Box::new(permute_calls(b, perms)),
        ),
        ProcTerm::Call { name, args } => {
            let args = match perms.get(name) {
                Some(perm) if perm.len() == args.len() => {
                    perm.iter().map(|&i| args[i].clone()).collect()
                }
                _ => args.clone(),
            };
            ProcTerm::Call {
                name: name.clone(),
                args,
            }
        }
        ProcTerm::Interleave {
            binder,
            lo,
            hi,
            body,
        } => ProcTerm::Interleave {
            binder: binder.clone(),
            lo: lo.clone(),
            hi: hi.clone(),
            body: Box::new(permute_calls(body, perms)),
        },
    }
}

fn callees_in_order<'t>(t: &'t ProcTerm, out: &mut Vec<&'t str>) {
    match t {
        ProcTerm::Skip => {}
        ProcTerm::DataOp { then, .. }
        | ProcTerm::ChanOut { then, .. }
        | ProcTerm::ChanIn { then, .. } => callees_in_order(then, out),
        ProcTerm::Cond {
            then, otherwise, ..
        } => {
            callees_in_order(then, out);
            if let Some(o) = otherwise {
                callees_in_order(o, out);
            }
        }
        ProcTerm::Seq(a, b) => {
            callees_in_order(a, out);
            callees_in_order(b, out);
        }
        ProcTerm::Call { name, .. } => out.push(name),
        ProcTerm::Interleave { body, .. } => callees_in_order(body, out),
    }
}

fn rename(
    t: &ProcTerm,
    scope: &mut Vec<(String, String)>,
    counter: &mut usize,
    procs: &FxHashMap<String, String>,
) -> ProcTerm {
    match t {
        ProcTerm::Skip => ProcTerm::Skip,
        ProcTerm::DataOp { assigns, then } => ProcTerm::DataOp {
            assigns: assigns.iter().map(|a| map_assign(a, &|e| subst(e, scope))).collect(),
            then: Box::new(rename(then, scope, counter, procs)),
        },
        ProcTerm::ChanOut { chan, fields, then } => ProcTerm::ChanOut {
            chan: map_chan(chan, &|e| subst(e, scope)),
            fields: fields.iter().map(|f| subst(f, scope)).collect(),
            then: Box::new(rename(then, scope, counter, procs)),
        },
        ProcTerm::ChanIn {
            chan,
            bindings,
            then,
        } => {
            let chan = map_chan(chan, &|e| subst(e, scope));
            let mark = scope.len();
            let mut names = Vec::with_capacity(bindings.len());
            for b in bindings {
                let n = format!("b{counter}");
                *counter += 1;
                scope.push((b.clone(), n.clone()));
                names.push(n);
            }
            let then = rename(then, scope, counter, procs);
            scope.truncate(mark);
            ProcTerm::ChanIn {
                chan,
                bindings: names,
                then: Box::new(then),
            }
        }
        ProcTerm::Cond {
            cond,
            then,
            otherwise,
        } => ProcTerm::Cond {
            cond: subst(cond, scope),
            then: Box::new(rename(then, scope, counter, procs)),
            otherwise: otherwise
                .as_ref()
                .map(|o| Box::new(rename(o, scope, counter, procs))),
        },
        ProcTerm::Seq(a, b) => ProcTerm::Seq(
            Box::new(rename(a, scope, counter, procs)),
            Box::new(rename(b, scope, counter, procs)),
        ),
        ProcTerm::Call { name, args } => ProcTerm::Call {
            name: procs.get(name).cloned().unwrap_or_else(|| name.clone()),
            args: args.iter().map(|a| subst(a, scope)).collect(),
        },
        ProcTerm::Interleave {
            binder,
            lo,
            hi,
            body,
        } => {
            let lo = subst(lo, scope);
            let hi = subst(hi, scope);
            let n = format!("b{counter}");
            *counter += 1;
            scope.push((binder.clone(), n.clone()));
            let body = rename(body, scope, counter, procs);
            scope.pop();
            ProcTerm::Interleave {
                binder: n,
                lo,
                hi,
                body: Box::new(body),
            }
        }
    }
}

fn rename_assertion(a: &Assertion, names: &FxHashMap<String, String>) -> Assertion {
    let sys = |s: &String| names.get(s).cloned().unwrap_or_else(|| s.clone());
    match a {
        Assertion::DeadlockFree { system } => Assertion::DeadlockFree {
            system: sys(system),
        },
        Assertion::Reaches { system, predicate } => Assertion::Reaches {
            system: sys(system),
            predicate: predicate.clone(),
        },
        Assertion::AlwaysEventually { system, predicate } => Assertion::AlwaysEventually {
            system: sys(system),
            predicate: predicate.clone(),
        },
    }
}

// ---- diff -------------------------------------------------------------------

fn first_difference(a: &Canonical, b: &Canonical) -> Option<String> {
    let (ma, mb) = (&a.model, &b.model);
    if ma.enums != mb.enums {
        return Some("enum declarations".into());
    }
    if let Some(d) = decl_diff("define", &ma.defines, &mb.defines, |d| &d.name) {
        return Some(d);
    }
    if let Some(d) = decl_diff("var", &ma.vars, &mb.vars, |v| &v.name) {
        return Some(d);
    }
    if let Some(d) = decl_diff("channel", &ma.channels, &mb.channels, |c| &c.name) {
        return Some(d);
    }
    // A changed body can reorder the callee's canonical parameters, which
    // shows up at every call site. The deepest differing process is the
    // likeliest origin, so it is named first.
    let mut differing: Vec<(&ProcessDef, &ProcessDef)> = Vec::new();
    let n = ma.processes.len().max(mb.processes.len());
    for i in 0..n {
        match (ma.processes.get(i), mb.processes.get(i)) {
            (Some(pa), Some(pb)) => {
                if pa != pb {
                    differing.push((pa, pb));
                }
            }
            _ if !differing.is_empty() => break,
            (Some(pa), None) => {
                let name = a.originals.get(&pa.name).unwrap_or(&pa.name);
                return Some(format!("process {name}: missing on the right"));
            }
            (None, Some(pb)) => {
                let name = b.originals.get(&pb.name).unwrap_or(&pb.name);
                return Some(format!("process {name}: missing on the left"));
            }
            (None, None) => unreachable!(),
        }
    }
    if let Some(((pa, pb), rest)) = differing.split_last() {
        let mut d = process_diff(a, pa, pb);
        if !rest.is_empty() {
            let names: Vec<&str> = rest
                .iter()
                .map(|(p, _)| a.originals.get(&p.name).unwrap_or(&p.name).as_str())
                .collect();
            d.push_str(&format!("; also differs: {}", names.join(", ")));
        }
        return Some(d);
    }
    if let Some(d) = decl_diff("predicate", &ma.predicates, &mb.predicates, |p| &p.name) {
        return Some(d);
    }
    if ma.assertions != mb.assertions {
        return Some("assertions".into());
    }
    None
}

fn process_diff(a: &Canonical, pa: &ProcessDef, pb: &ProcessDef) -> String {
    let name = a.originals.get(&pa.name).unwrap_or(&pa.name);
    if pa.params.len() != pb.params.len() {
        return format!("process {name}: parameter count");
    }
    let mut path = Vec::new();
    term_diff(&pa.body, &pb.body, &mut path);
    format!("process {name}: body/{}", path.join("/"))
}

fn decl_diff<T: PartialEq>(
    kind: &str,
    a: &[T],
    b: &[T],
    name: impl Fn(&T) -> &String,
) -> Option<String> {
    let n = a.len().max(b.len());
    for i in 0..n {
        match (a.get(i), b.get(i)) {
            (Some(x), Some(y)) if x == y => {}
            (Some(x), Some(y)) if name(x) == name(y) => {
                return Some(format!("{kind} {}", name(x)))
            }
            (Some(x), Some(y)) => {
                let first = name(x).min(name(y));
                return Some(format!("{kind} {first}"));
            }
            (Some(x), None) => return Some(format!("{kind} {}", name(x))),
            (None, Some(y)) => return Some(format!("{kind} {}", name(y))),
            (None, None) => unreachable!(),
        }
    }
    None
}

fn label(t: &ProcTerm) -> &'static str {
    match t {
        ProcTerm::Skip => "skip",
        ProcTerm::DataOp { .. } => "data-op",
        ProcTerm::ChanOut { .. } => "send",
        ProcTerm::ChanIn { .. } => "receive",
        ProcTerm::Cond { .. } => "if",
        ProcTerm::Seq(..) => "seq",
        ProcTerm::Call { .. } => "call",
        ProcTerm::Interleave { .. } => "interleave",
    }
}

fn term_diff(a: &ProcTerm, b: &ProcTerm, path: &mut Vec<String>) {
    use ProcTerm::*;
    match (a, b) {
        (
            DataOp {
                assigns: x,
                then: tx,
            },
            DataOp {
                assigns: y,
                then: ty,
            },
        ) if x == y => {
            path.push("data-op".into());
            term_diff(tx, ty, path)
        }
        (
            ChanOut {
                chan: cx,
                fields: fx,
                then: tx,
            },
            ChanOut {
                chan: cy,
                fields: fy,
                then: ty,
            },
        ) if cx == cy && fx == fy => {
            path.push(format!("send {}", cx.name));
            term_diff(tx, ty, path)
        }
        (
            ChanIn {
                chan: cx,
                bindings: bx,
                then: tx,
            },
            ChanIn {
                chan: cy,
                bindings: by,
                then: ty,
            },
        ) if cx == cy && bx == by => {
            path.push(format!("receive {}", cx.name));
            term_diff(tx, ty, path)
        }
        (
            Cond {
                cond: cx,
                then: tx,
                otherwise: ox,
            },
            Cond {
                cond: cy,
                then: ty,
                otherwise: oy,
            },
        ) if cx == cy => {
            if tx != ty {
                path.push("if-then".into());
                term_diff(tx, ty, path)
            } else {
                path.push("if-else".into());
                if let (Some(x), Some(y)) = (ox, oy) {
                    term_diff(x, y, path)
                }
            }
        }
        (Seq(ax, bx), Seq(ay, by)) => {
            if ax != ay {
                path.push("seq-first".into());
                term_diff(ax, ay, path)
            } else {
                path.push("seq-then".into());
                term_diff(bx, by, path)
            }
        }
        _ => path.push(format!("{} vs {}", label(a), label(b))),
    }
}
