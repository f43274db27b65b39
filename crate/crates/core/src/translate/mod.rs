//! Deterministic lowering of a validated FLA program into a CSP# model.
//!
//! The model consists of a fixed skeleton (constants, per-node variables,
//! channels, the system process and the three assertions), the message
//! passing templates the program uses, the processes produced by lowering
//! the function body, and the helpers that drop buffered messages.

mod config;
mod lower;

use std::collections::BTreeSet;

use thiserror::Error;

use crate::cspir::{
    validate_model, Assertion, Assign, BinOp, ChanDecl, ChanRef, CspError, CspModel, Define, Expr,
    LValue, ProcTerm, ProcessDef, VarDecl,
};
use crate::frontend::{analyze, FrontendError, MessageShapeMap, ValidatedProgram, NODE_CHANNELS};

pub use config::{ConfigError, TranslationConfig};

use lower::{lower_program, BROADCAST, RCV_MSGS};

/// Name of the predicate the liveness assertions refer to.
pub const TERMINATED: &str = "Terminated";

const CLEAR_BUFF: &str = "ClearBuffT";
const RCV_MSGS_T: &str = "RcvMsgsT";
const BUFFER: &str = "buffer";
const BUFFER_SIZE: &str = "bufferSize";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TranslateError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("loop bound `{name}` is not a declared constant")]
    UnboundCounter { name: String },
    #[error("list `{list}` has no configured channel capacity (add `fifo.{list} = ...`)")]
    MissingCapacity { list: String },
    #[error("line {line}: cannot translate {construct}")]
    Unsupported { construct: String, line: usize },
    #[error("generated model is ill-formed: {0}")]
    InvalidModel(CspError),
}

/// Failure anywhere in the source-to-model pipeline.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Frontend(#[from] FrontendError),
    #[error(transparent)]
    Translate(#[from] TranslateError),
}

/// Parses, validates and translates `src` under `cfg`.
pub fn translate_source(src: &str, cfg: &TranslationConfig) -> Result<CspModel, PipelineError> {
    cfg.validate().map_err(TranslateError::from)?;
    let (v, shapes) = analyze(src, &cfg.name_map())?;
    Ok(translate(&v, cfg, &shapes)?)
}

pub fn translate(
    v: &ValidatedProgram,
    cfg: &TranslationConfig,
    shapes: &MessageShapeMap,
) -> Result<CspModel, TranslateError> {
    cfg.validate()?;
    let names = cfg.name_map();
    let lowered = lower_program(v, shapes, &names)?;
    let entry = lowered.processes[0].name.clone();
    let mut m = skeleton(v, cfg, shapes, lowered.uses_rcv_msgs)?;

    let declared: BTreeSet<&str> = m.defines.iter().map(|d| d.name.as_str()).collect();
    if let Some(b) = lowered.loop_bounds.iter().find(|b| !declared.contains(b.as_str())) {
        return Err(TranslateError::UnboundCounter { name: b.clone() });
    }

    let node_id = Expr::ident("nodeId");
    m.processes.push(ProcessDef {
        name: system_name(cfg, &v.entry().name),
        params: Vec::new(),
        body: ProcTerm::Interleave {
            binder: "nodeId".into(),
            lo: Expr::int(0),
            hi: no_nodes_minus_one(),
            body: Box::new(ProcTerm::call(
                entry,
                vec![
                    node_id.clone(),
                    Expr::index("ldataArr", node_id.clone()),
                    Expr::index("pdataArr", node_id),
                ],
            )),
        },
    });
    if lowered.uses_broadcast {
        m.processes.extend(broadcast_template(&shapes.node_channels().fields));
    }
    if lowered.uses_rcv_msgs {
        m.processes.extend(rcv_msgs_template(shapes.node_channels().arity));
    }
    m.processes.extend(lowered.processes);
    for (name, list) in &lowered.drop_helpers {
        let fields = match shapes.get(list) {
            Some(s) => s.fields.clone(),
            None => return Err(TranslateError::MissingCapacity { list: list.clone() }),
        };
        m.processes.push(drop_helper(name, list, fields));
    }

    let system = m.processes[0].name.clone();
    m.predicates.push(Define {
        name: TERMINATED.into(),
        value: Expr::bin(BinOp::Eq, Expr::ident("terminated"), Expr::ident("True")),
    });
    m.assertions = vec![
        Assertion::DeadlockFree {
            system: system.clone(),
        },
        Assertion::Reaches {
            system: system.clone(),
            predicate: TERMINATED.into(),
        },
        Assertion::AlwaysEventually {
            system,
            predicate: TERMINATED.into(),
        },
    ];
    validate_model(&m).map_err(TranslateError::InvalidModel)?;
    Ok(m)
}

/// `Sys` followed by the function name in camel case without its `fl_`
/// prefix, unless the config names the system.
fn system_name(cfg: &TranslationConfig, func: &str) -> String {
    if let Some(s) = &cfg.system_name {
        return s.clone();
    }
    let base = func.strip_prefix("fl_").unwrap_or(func);
    let camel: String = base
        .split('_')
        .filter(|p| !p.is_empty())
        .map(lower::capitalize)
        .collect();
    format!("Sys{camel}")
}

fn no_nodes_minus_one() -> Expr {
    Expr::bin(BinOp::Sub, Expr::ident("NoNodes"), Expr::int(1))
}

fn node_array(name: &str, init: Option<Expr>) -> VarDecl {
    VarDecl {
        name: name.into(),
        size: Some(Expr::ident("NoNodes")),
        init,
    }
}

fn skeleton(
    v: &ValidatedProgram,
    cfg: &TranslationConfig,
    shapes: &MessageShapeMap,
    uses_rcv_msgs: bool,
) -> Result<CspModel, TranslateError> {
    let mut m = CspModel {
        enums: vec![vec!["False".into(), "True".into()]],
        ..CspModel::default()
    };
    let mut define = |name: &str, value: Expr| {
        if !m.defines.iter().any(|d| d.name == name) {
            m.defines.push(Define {
                name: name.into(),
                value,
            });
        }
    };
    define("NoNodes", Expr::int(cfg.no_nodes));
    if let Some(id) = cfg.fl_srv_id {
        define("FlSrvId", Expr::int(id));
    }
    define("NoIterations", Expr::int(cfg.no_iterations));
    for (name, e) in &cfg.defines {
        define(name, e.clone());
    }
    for (name, value) in &v.program.phase_constants {
        define(name, Expr::int(*value));
    }

    m.vars.push(node_array("ldataArr", None));
    m.vars.push(node_array("pdataArr", None));
    m.vars.push(VarDecl {
        name: "terminated".into(),
        size: None,
        init: Some(Expr::ident("False")),
    });
    for l in &v.locals {
        m.vars.push(node_array(l, None));
    }
    if uses_rcv_msgs {
        m.vars.push(node_array(BUFFER_SIZE, None));
    }

    let chan = |name: &str, capacity: Expr| ChanDecl {
        name: name.into(),
        size: Some(Expr::ident("NoNodes")),
        capacity,
    };
    m.channels.push(chan(NODE_CHANNELS, cfg.node_channel_capacity()));
    if uses_rcv_msgs {
        m.channels.push(chan(BUFFER, no_nodes_minus_one()));
    }
    for list in &v.fifo_lists {
        if shapes.get(list).is_none() {
            return Err(TranslateError::Unsupported {
                construct: format!("list `{list}` with no message shape"),
                line: 0,
            });
        }
        match cfg.fifo_capacities.get(list) {
            Some(cap) => m.channels.push(chan(list, cap.clone())),
            None => return Err(TranslateError::MissingCapacity { list: list.clone() }),
        }
    }
    Ok(m)
}

fn ids(names: &[&str]) -> Vec<Expr> {
    names.iter().map(|n| Expr::ident(*n)).collect()
}

fn strings(names: &[&str]) -> Vec<String> {
    names.iter().map(|n| n.to_string()).collect()
}

/// `BroadcastMsg` and `BroadcastMsgT` for messages with the given fields.
fn broadcast_template(fields: &[String]) -> [ProcessDef; 2] {
    let ms: Vec<String> = if fields.len() == 1 {
        vec![fields[0].clone()]
    } else {
        (1..=fields.len()).map(|i| format!("m{i}")).collect()
    };
    let ms: Vec<&str> = ms.iter().map(String::as_str).collect();
    let tname = format!("{BROADCAST}T");

    let mut outer_params = ms.clone();
    outer_params.push("senderId");
    let mut start_args = vec![Expr::int(0), Expr::ident("NoNodes")];
    start_args.extend(ids(&outer_params));

    let mut t_params = vec!["i", "noNodes"];
    t_params.extend(&outer_params);
    let mut next_args = vec![
        Expr::bin(BinOp::Add, Expr::ident("i"), Expr::int(1)),
        Expr::ident("noNodes"),
    ];
    next_args.extend(ids(&outer_params));

    let send = ProcTerm::chan_out(
        ChanRef::indexed(NODE_CHANNELS, Expr::ident("i")),
        ids(&ms),
        ProcTerm::Skip,
    );
    let body = ProcTerm::cond(
        Expr::bin(BinOp::Lt, Expr::ident("i"), Expr::ident("noNodes")),
        ProcTerm::cond(
            Expr::bin(BinOp::Ne, Expr::ident("i"), Expr::ident("senderId")),
            send,
            None,
        )
        .then_seq(ProcTerm::call(tname.clone(), next_args)),
        None,
    );
    [
        ProcessDef {
            name: BROADCAST.into(),
            params: strings(&outer_params),
            body: ProcTerm::call(tname.clone(), start_args),
        },
        ProcessDef {
            name: tname,
            params: strings(&t_params),
            body,
        },
    ]
}

/// `RcvMsgs`, `ClearBuffT` and `RcvMsgsT`: receive `noMsgs` messages into
/// the node's `buffer`, first discarding whatever the buffer still holds.
fn rcv_msgs_template(arity: usize) -> [ProcessDef; 3] {
    let temps: Vec<String> = if arity == 1 {
        vec!["temp".into()]
    } else {
        (1..=arity).map(|i| format!("temp{i}")).collect()
    };
    let node = || Expr::ident("nodeId");
    let size = || LValue {
        name: BUFFER_SIZE.into(),
        index: Some(node()),
    };
    let buffer_nonempty = || Expr::bin(BinOp::Ne, Expr::index(BUFFER_SIZE, node()), Expr::int(0));
    let clear = || ProcTerm::call(CLEAR_BUFF, vec![node()]);

    let rcv = ProcessDef {
        name: RCV_MSGS.into(),
        params: strings(&["nodeId", "noMsgs"]),
        body: ProcTerm::cond(buffer_nonempty(), clear(), None).then_seq(ProcTerm::call(
            RCV_MSGS_T,
            vec![Expr::int(0), node(), Expr::ident("noMsgs")],
        )),
    };
    let clear_buff = ProcessDef {
        name: CLEAR_BUFF.into(),
        params: strings(&["nodeId"]),
        body: ProcTerm::data_op(
            vec![Assign::Decr(size())],
            ProcTerm::chan_in(
                ChanRef::indexed(BUFFER, node()),
                temps.clone(),
                ProcTerm::cond(buffer_nonempty(), clear(), None),
            ),
        ),
    };
    let next = ProcTerm::call(
        RCV_MSGS_T,
        vec![
            Expr::bin(BinOp::Add, Expr::ident("i"), Expr::int(1)),
            node(),
            Expr::ident("noMsgs"),
        ],
    );
    let rcv_t = ProcessDef {
        name: RCV_MSGS_T.into(),
        params: strings(&["i", "nodeId", "noMsgs"]),
        body: ProcTerm::cond(
            Expr::bin(BinOp::Lt, Expr::ident("i"), Expr::ident("noMsgs")),
            ProcTerm::data_op(
                vec![Assign::Incr(size())],
                ProcTerm::chan_in(
                    ChanRef::indexed(NODE_CHANNELS, node()),
                    temps.clone(),
                    ProcTerm::chan_out(
                        ChanRef::indexed(BUFFER, node()),
                        temps.iter().map(Expr::ident).collect(),
                        next,
                    ),
                ),
            ),
            None,
        ),
    };
    [rcv, clear_buff, rcv_t]
}

/// `Name(nodeId, count)` receiving and discarding `count` messages from
/// `list`.
fn drop_helper(name: &str, list: &str, fields: Vec<String>) -> ProcessDef {
    let count = Expr::ident("count");
    ProcessDef {
        name: name.into(),
        params: strings(&["nodeId", "count"]),
        body: ProcTerm::cond(
            Expr::bin(BinOp::Gt, count.clone(), Expr::int(0)),
            ProcTerm::chan_in(
                ChanRef::indexed(list, Expr::ident("nodeId")),
                fields,
                ProcTerm::call(
                    name,
                    vec![
                        Expr::ident("nodeId"),
                        Expr::bin(BinOp::Sub, count, Expr::int(1)),
                    ],
                ),
            ),
            Some(ProcTerm::Skip),
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cspir::{compare_structural, parse_model, print_model};

    fn case(name: &str) -> (&'static str, TranslationConfig, &'static str) {
        let (src, cfg, golden) = match name {
            "centralized" => (
                include_str!("../../corpus/centralized/source.py"),
                include_str!("../../corpus/centralized/config.cfg"),
                include_str!("../../corpus/centralized/golden.csp"),
            ),
            _ => (
                include_str!("../../corpus/decentralized/source.py"),
                include_str!("../../corpus/decentralized/config.cfg"),
                include_str!("../../corpus/decentralized/golden.csp"),
            ),
        };
        (src, TranslationConfig::parse(cfg).unwrap(), golden)
    }

    fn assert_golden(name: &str) {
        let (src, cfg, golden) = case(name);
        let m = translate_source(src, &cfg).unwrap();
        let g = parse_model(golden).unwrap();
        let r = compare_structural(&m, &g);
        assert!(r.equal, "{name}: {r:?}\n{}", print_model(&m));
    }

    #[test]
    fn centralized_matches_golden() {
        assert_golden("centralized");
    }

    #[test]
    fn decentralized_matches_golden() {
        assert_golden("decentralized");
    }

    #[test]
    fn output_is_deterministic() {
        for name in ["centralized", "decentralized"] {
            let (src, cfg, _) = case(name);
            let a = print_model(&translate_source(src, &cfg).unwrap());
            let b = print_model(&translate_source(src, &cfg).unwrap());
            assert_eq!(a, b);
        }
    }

    #[test]
    fn helpers_are_emitted_once() {
        let src = "def fl_x(a, b, c):\n    for k in range(noIterations):\n        m = rcvMsgs(noNodes-1)\n        broadcastMsg(addresses, b, a)\n        m = rcvMsgs(noNodes-1)\n        broadcastMsg(addresses, b, a)\n    terminated = 1\n";
        let m = translate_source(src, &TranslationConfig::new(3, 2)).unwrap();
        let names: Vec<&str> = m.processes.iter().map(|p| p.name.as_str()).collect();
        let unique: BTreeSet<&str> = names.iter().copied().collect();
        assert_eq!(names.len(), unique.len());
        for h in [BROADCAST, "BroadcastMsgT", RCV_MSGS, CLEAR_BUFF, RCV_MSGS_T] {
            assert!(unique.contains(h), "{h} missing");
        }
        assert!(m.channel(BUFFER).is_some());
        assert!(m.vars.iter().any(|v| v.name == BUFFER_SIZE));
    }

    #[test]
    fn buffer_only_with_rcv_msgs() {
        let (src, cfg, _) = case("decentralized");
        let m = translate_source(src, &cfg).unwrap();
        assert!(m.channel(BUFFER).is_none());
        assert!(!m.vars.iter().any(|v| v.name == BUFFER_SIZE));
    }

    #[test]
    fn broadcast_send_is_doubly_guarded() {
        for fields in [vec!["msg".to_string()], (0..4).map(|i| format!("f{i}")).collect()] {
            let [_, t] = broadcast_template(&fields);
            let ProcTerm::Cond { cond, then, otherwise: None } = &t.body else {
                panic!("outer guard")
            };
            assert_eq!(*cond, Expr::bin(BinOp::Lt, Expr::ident("i"), Expr::ident("noNodes")));
            let ProcTerm::Seq(inner, _) = &**then else { panic!("sequence") };
            let ProcTerm::Cond { cond, then, .. } = &**inner else { panic!("inner guard") };
            assert_eq!(*cond, Expr::bin(BinOp::Ne, Expr::ident("i"), Expr::ident("senderId")));
            let ProcTerm::ChanOut { fields: f, .. } = &**then else { panic!("send") };
            assert_eq!(f.len(), fields.len());
        }
    }

    #[test]
    fn single_node_system() {
        // The default capacity NoNodes-1 is 0 here, so it must be given.
        let src = "def fl_x(a, b, c):\n    broadcastMsg(addresses, b, a)\n    terminated = 1\n";
        let mut cfg = TranslationConfig::new(1, 1);
        assert!(translate_source(src, &cfg).is_err());
        cfg.node_channel_capacity = Some(Expr::int(1));
        let m = translate_source(src, &cfg).unwrap();
        let ProcTerm::Interleave { hi, .. } = &m.system().unwrap().body else {
            panic!("system is not an interleaving")
        };
        assert_eq!(*hi, no_nodes_minus_one());
    }

    #[test]
    fn server_id_out_of_range_is_rejected() {
        let (src, mut cfg, _) = case("centralized");
        cfg.fl_srv_id = Some(5);
        assert!(matches!(
            translate_source(src, &cfg),
            Err(PipelineError::Translate(TranslateError::Config(ConfigError::InvalidValue { .. })))
        ));
    }

    #[test]
    fn list_without_capacity_is_rejected() {
        let (src, mut cfg, _) = case("decentralized");
        cfg.fifo_capacities.remove("dataFromClients2");
        assert_eq!(
            translate_source(src, &cfg).unwrap_err(),
            PipelineError::Translate(TranslateError::MissingCapacity {
                list: "dataFromClients2".into()
            })
        );
    }

    #[test]
    fn loop_bound_without_define_is_rejected() {
        let src = "def fl_x(a, b, c):\n    for k in range(rounds):\n        sendMsg(a, b)\n    terminated = 1\n";
        let mut cfg = TranslationConfig::new(2, 1);
        cfg.names.insert("rounds".into(), "Rounds".into());
        assert_eq!(
            translate_source(src, &cfg).unwrap_err(),
            PipelineError::Translate(TranslateError::UnboundCounter {
                name: "Rounds".into()
            })
        );
    }

    #[test]
    fn empty_loop_body_recurses() {
        let src = "def fl_x(a, b, c):\n    for k in range(noIterations):\n        x = 0\n    terminated = 1\n";
        let m = translate_source(src, &TranslationConfig::new(2, 3)).unwrap();
        assert!(m.process("Fl_xT").is_some());
        assert_eq!(m.processes[0].name, "SysX");
    }
}
