//! Abstract syntax for the CSP# subset emitted by the translator and accepted
//! by the checker.

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum UnOp {
    Neg,
    Not,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::And => "&&",
            BinOp::Or => "||",
        }
    }

    /// Binding strength; larger binds tighter.
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Eq | BinOp::Ne => 3,
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 4,
            BinOp::Add | BinOp::Sub => 5,
            BinOp::Mul => 6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub enum Expr {
    Int(i64),
    Ident(String),
    /// `a[i]`
    Index(String, Box<Expr>),
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    /// `call(ccount, ch[i])`: number of messages buffered in a channel instance.
    CCount(ChanRef),
}

impl Expr {
    pub fn int(v: i64) -> Self {
        Expr::Int(v)
    }

    pub fn ident(name: impl Into<String>) -> Self {
        Expr::Ident(name.into())
    }

    pub fn index(name: impl Into<String>, idx: Expr) -> Self {
        Expr::Index(name.into(), Box::new(idx))
    }

    pub fn bin(op: BinOp, lhs: Expr, rhs: Expr) -> Self {
        Expr::Binary(op, Box::new(lhs), Box::new(rhs))
    }

    /// Calls `f` on every identifier occurrence, including array and channel names.
    pub fn visit_names<'a>(&'a self, f: &mut impl FnMut(&'a str)) {
        match self {
            Expr::Int(_) => {}
            Expr::Ident(n) => f(n),
            Expr::Index(n, i) => {
                f(n);
                i.visit_names(f);
            }
            Expr::Unary(_, e) => e.visit_names(f),
            Expr::Binary(_, a, b) => {
                a.visit_names(f);
                b.visit_names(f);
            }
            Expr::CCount(c) => {
                f(&c.name);
                if let Some(i) = &c.index {
                    i.visit_names(f);
                }
            }
        }
    }
}

/// A channel instance reference, `ch` or `ch[i]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct ChanRef {
    pub name: String,
    pub index: Option<Box<Expr>>,
}

impl ChanRef {
    pub fn indexed(name: impl Into<String>, idx: Expr) -> Self {
        ChanRef {
            name: name.into(),
            index: Some(Box::new(idx)),
        }
    }
}

/// Assignment target: a scalar var or one array element.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct LValue {
    pub name: String,
    pub index: Option<Expr>,
}

impl LValue {
    pub fn to_expr(&self) -> Expr {
        match &self.index {
            None => Expr::Ident(self.name.clone()),
            Some(i) => Expr::Index(self.name.clone(), Box::new(i.clone())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub enum Assign {
    Set(LValue, Expr),
    Incr(LValue),
    Decr(LValue),
}

impl Assign {
    pub fn target(&self) -> &LValue {
        match self {
            Assign::Set(t, _) | Assign::Incr(t) | Assign::Decr(t) => t,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub enum ProcTerm {
    Skip,
    /// `{ a1; a2 } -> P`
    DataOp {
        assigns: Vec<Assign>,
        then: Box<ProcTerm>,
    },
    /// `ch[i]!e1.e2 -> P`
    ChanOut {
        chan: ChanRef,
        fields: Vec<Expr>,
        then: Box<ProcTerm>,
    },
    /// `ch[i]?x1.x2 -> P`; the bindings scope over `then`.
    ChanIn {
        chan: ChanRef,
        bindings: Vec<String>,
        then: Box<ProcTerm>,
    },
    /// `if (c) { P } else { Q }`. A missing else behaves as `Skip`, so
    /// `if (c) { P }; R` falls through to `R`.
    Cond {
        cond: Expr,
        then: Box<ProcTerm>,
        otherwise: Option<Box<ProcTerm>>,
    },
    /// `P; Q`
    Seq(Box<ProcTerm>, Box<ProcTerm>),
    Call {
        name: String,
        args: Vec<Expr>,
    },
    /// `|||x:{lo..hi}@P(...)`
    Interleave {
        binder: String,
        lo: Expr,
        hi: Expr,
        body: Box<ProcTerm>,
    },
}

impl ProcTerm {
    pub fn call(name: impl Into<String>, args: Vec<Expr>) -> Self {
        ProcTerm::Call {
            name: name.into(),
            args,
        }
    }

    pub fn data_op(assigns: Vec<Assign>, then: ProcTerm) -> Self {
        ProcTerm::DataOp {
            assigns,
            then: Box::new(then),
        }
    }

    pub fn chan_out(chan: ChanRef, fields: Vec<Expr>, then: ProcTerm) -> Self {
        ProcTerm::ChanOut {
            chan,
            fields,
            then: Box::new(then),
        }
    }

    pub fn chan_in(chan: ChanRef, bindings: Vec<String>, then: ProcTerm) -> Self {
        ProcTerm::ChanIn {
            chan,
            bindings,
            then: Box::new(then),
        }
    }

    pub fn cond(cond: Expr, then: ProcTerm, otherwise: Option<ProcTerm>) -> Self {
        ProcTerm::Cond {
            cond,
            then: Box::new(then),
            otherwise: otherwise.map(Box::new),
        }
    }

    /// `self; next`, dropping a trailing `Skip`.
    pub fn then_seq(self, next: ProcTerm) -> Self {
        match (self, next) {
            (ProcTerm::Skip, n) => n,
            (p, ProcTerm::Skip) => p,
            (p, n) => ProcTerm::Seq(Box::new(p), Box::new(n)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct ProcessDef {
    pub name: String,
    pub params: Vec<String>,
    pub body: ProcTerm,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Define {
    pub name: String,
    pub value: Expr,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct VarDecl {
    pub name: String,
    pub size: Option<Expr>,
    pub init: Option<Expr>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct ChanDecl {
    pub name: String,
    pub size: Option<Expr>,
    pub capacity: Expr,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub enum Assertion {
    DeadlockFree { system: String },
    Reaches { system: String, predicate: String },
    /// `|= []<> P`
    AlwaysEventually { system: String, predicate: String },
}

/// The assertion as written after `#assert`, e.g. `Sys() deadlockfree`.
impl std::fmt::Display for Assertion {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Assertion::DeadlockFree { system } => write!(f, "{system}() deadlockfree"),
            Assertion::Reaches { system, predicate } => write!(f, "{system}() reaches {predicate}"),
            Assertion::AlwaysEventually { system, predicate } => {
                write!(f, "{system}() |= []<> {predicate}")
            }
        }
    }
}

impl Assertion {
    pub fn system(&self) -> &str {
        match self {
            Assertion::DeadlockFree { system }
            | Assertion::Reaches { system, .. }
            | Assertion::AlwaysEventually { system, .. } => system,
        }
    }

    pub fn predicate(&self) -> Option<&str> {
        match self {
            Assertion::DeadlockFree { .. } => None,
            Assertion::Reaches { predicate, .. } | Assertion::AlwaysEventually { predicate, .. } => {
                Some(predicate)
            }
        }
    }

    fn rank(&self) -> u8 {
        match self {
            Assertion::DeadlockFree { .. } => 0,
            Assertion::Reaches { .. } => 1,
            Assertion::AlwaysEventually { .. } => 2,
        }
    }

    pub(crate) fn sort_key(&self) -> (u8, &str, &str) {
        (self.rank(), self.system(), self.predicate().unwrap_or(""))
    }
}

/// A CSP# model: declarations, process definitions and assertions.
///
/// Predicates are `#define`s with a boolean body (`#define Terminated
/// (terminated == True);`) and are kept apart from constant defines.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize)]
pub struct CspModel {
    pub enums: Vec<Vec<String>>,
    pub defines: Vec<Define>,
    pub vars: Vec<VarDecl>,
    pub channels: Vec<ChanDecl>,
    pub processes: Vec<ProcessDef>,
    pub predicates: Vec<Define>,
    pub assertions: Vec<Assertion>,
}

impl CspModel {
    pub fn process(&self, name: &str) -> Option<&ProcessDef> {
        self.processes.iter().find(|p| p.name == name)
    }

    pub fn channel(&self, name: &str) -> Option<&ChanDecl> {
        self.channels.iter().find(|c| c.name == name)
    }

    pub fn predicate(&self, name: &str) -> Option<&Define> {
        self.predicates.iter().find(|p| p.name == name)
    }

    /// The root process: the target of the assertions if any, otherwise the
    /// first process whose body is an indexed interleaving, otherwise the
    /// first process.
    pub fn system(&self) -> Option<&ProcessDef> {
        if let Some(a) = self.assertions.first() {
            if let Some(p) = self.process(a.system()) {
                return Some(p);
            }
        }
        self.processes
            .iter()
            .find(|p| matches!(p.body, ProcTerm::Interleave { .. }))
            .or_else(|| self.processes.first())
    }
}
