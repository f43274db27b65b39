use std::collections::BTreeMap;

use serde::Serialize;

/// A parsed translation unit: constant declarations plus exactly one FLA
/// function.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PyProgram {
    pub functions: Vec<PyFunc>,
    /// Constants used as message subscripts, e.g. `msgIterNo -> 0`.
    pub field_index_decls: BTreeMap<String, i64>,
    /// Remaining integer constants, e.g. `PHASE1 -> 1`.
    pub phase_constants: BTreeMap<String, i64>,
}

impl PyProgram {
    /// The FLA function.
    pub fn entry(&self) -> &PyFunc {
        &self.functions[0]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PyFunc {
    pub name: String,
    pub params: Vec<String>,
    pub body: Vec<PyStmt>,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PyStmt {
    pub kind: StmtKind,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum StmtKind {
    ForRange {
        counter: String,
        bound: String,
        body: Vec<PyStmt>,
    },
    While {
        cond: PyExpr,
        body: Vec<PyStmt>,
    },
    If {
        cond: PyExpr,
        then_body: Vec<PyStmt>,
        else_body: Vec<PyStmt>,
    },
    /// `x = e`; augmented forms are desugared (`x += e` is `x = x + e`).
    Assign { target: String, value: PyExpr },
    Mpapi(MpapiCall),
    ListAppend { list: String, message: Message },
    /// `x = buf.pop(0)`
    ListPop { target: RecvTarget, list: String },
    /// `dropXxx(buf)`
    DrainHelperCall { helper: String, list: String },
    Continue,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum MpapiKind {
    SendMsg,
    RcvMsg,
    BroadcastMsg,
    RcvMsgs,
}

impl MpapiKind {
    pub fn name(self) -> &'static str {
        match self {
            MpapiKind::SendMsg => "sendMsg",
            MpapiKind::RcvMsg => "rcvMsg",
            MpapiKind::BroadcastMsg => "broadcastMsg",
            MpapiKind::RcvMsgs => "rcvMsgs",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MpapiCall {
    pub kind: MpapiKind,
    /// sendMsg: the destination node; broadcastMsg: the address list.
    pub destination: Option<PyExpr>,
    pub message: Option<Message>,
    /// rcvMsgs only.
    pub count: Option<PyExpr>,
    /// broadcastMsg only.
    pub sender: Option<PyExpr>,
    pub target: Option<RecvTarget>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Message {
    Scalar(PyExpr),
    List(Vec<PyExpr>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum RecvTarget {
    /// `msg = rcvMsg()`
    Name(String),
    /// `[a, b] = rcvMsg()`
    Fields(Vec<String>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PyBinOp {
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

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PyUnOp {
    Neg,
    Not,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum PyExpr {
    Int(i64),
    Name(String),
    /// `x[e]`
    Subscript(String, Box<PyExpr>),
    Unary(PyUnOp, Box<PyExpr>),
    Binary(PyBinOp, Box<PyExpr>, Box<PyExpr>),
    /// `len(buf)`
    Len(String),
    /// List literal; only meaningful as a message.
    List(Vec<PyExpr>),
}

impl PyExpr {
    /// Calls `f` on every name read by the expression (subscripted names and
    /// `len` arguments included).
    pub fn visit_names<'a>(&'a self, f: &mut impl FnMut(&'a str)) {
        match self {
            PyExpr::Int(_) => {}
            PyExpr::Name(n) | PyExpr::Len(n) => f(n),
            PyExpr::Subscript(n, i) => {
                f(n);
                i.visit_names(f);
            }
            PyExpr::Unary(_, a) => a.visit_names(f),
            PyExpr::Binary(_, a, b) => {
                a.visit_names(f);
                b.visit_names(f);
            }
            PyExpr::List(items) => items.iter().for_each(|e| e.visit_names(f)),
        }
    }
}

impl Message {
    pub fn visit_names<'a>(&'a self, f: &mut impl FnMut(&'a str)) {
        match self {
            Message::Scalar(e) => e.visit_names(f),
            Message::List(items) => items.iter().for_each(|e| e.visit_names(f)),
        }
    }
}

/// Calls `f` on every statement, depth first, in source order.
pub fn walk_stmts<'a>(stmts: &'a [PyStmt], f: &mut impl FnMut(&'a PyStmt)) {
    for s in stmts {
        f(s);
        match &s.kind {
            StmtKind::ForRange { body, .. } | StmtKind::While { body, .. } => walk_stmts(body, f),
            StmtKind::If {
                then_body,
                else_body,
                ..
            } => {
                walk_stmts(then_body, f);
                walk_stmts(else_body, f);
            }
            _ => {}
        }
    }
}
