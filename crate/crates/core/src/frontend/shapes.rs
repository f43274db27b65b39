//! Message shape inference: the arity and field names of the messages
//! carried by the node channels and by each FIFO list.

use std::collections::BTreeMap;

use serde::Serialize;

use super::ast::*;
use super::validate::ValidatedProgram;
use super::FrontendError;

/// Channel family used by `sendMsg`, `broadcastMsg`, `rcvMsg` and `rcvMsgs`.
pub const NODE_CHANNELS: &str = "nodeChannels";

/// Field name of single-value messages.
pub const SCALAR_FIELD: &str = "msg";

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MessageShape {
    pub arity: usize,
    /// One name per field, in field-index order.
    pub fields: Vec<String>,
}

/// Shapes keyed by channel family: [`NODE_CHANNELS`] plus one entry per
/// FIFO list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MessageShapeMap {
    pub families: BTreeMap<String, MessageShape>,
}

impl MessageShapeMap {
    pub fn get(&self, family: &str) -> Option<&MessageShape> {
        self.families.get(family)
    }

    pub fn node_channels(&self) -> &MessageShape {
        &self.families[NODE_CHANNELS]
    }
}

/// Where an arity observation comes from.
enum Evidence<'a> {
    /// A message written to `family`.
    Write(&'a str, &'a Message),
    /// A destructuring read of `n` fields from `family`.
    Destructure(&'a str, usize),
}

pub fn infer_message_shapes<'a>(v: &'a ValidatedProgram) -> Result<MessageShapeMap, FrontendError> {
    let mut evidence = Vec::new();
    // Message variable -> families it is read from.
    let mut var_families: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    walk_stmts(&v.entry().body, &mut |s| match &s.kind {
        StmtKind::Mpapi(c) => match c.kind {
            MpapiKind::SendMsg | MpapiKind::BroadcastMsg => {
                if let Some(m) = &c.message {
                    evidence.push(Evidence::Write(NODE_CHANNELS, m));
                }
            }
            MpapiKind::RcvMsg => match &c.target {
                Some(RecvTarget::Name(n)) => var_families.entry(n).or_default().push(NODE_CHANNELS),
                Some(RecvTarget::Fields(f)) => {
                    evidence.push(Evidence::Destructure(NODE_CHANNELS, f.len()))
                }
                None => {}
            },
            MpapiKind::RcvMsgs => {}
        },
        StmtKind::ListAppend { list, message } => evidence.push(Evidence::Write(list, message)),
        StmtKind::ListPop { target, list } => match target {
            RecvTarget::Name(n) => var_families.entry(n).or_default().push(list),
            RecvTarget::Fields(f) => evidence.push(Evidence::Destructure(list, f.len())),
        },
        _ => {}
    });

    let mut arity: BTreeMap<&str, usize> = BTreeMap::new();
    let record = |arity: &mut BTreeMap<&'a str, usize>, fam: &'a str, n: usize| match arity.get(fam) {
        Some(&a) if a != n => Err(FrontendError::ShapeConflict {
            channel: fam.to_string(),
            first: a,
            second: n,
        }),
        Some(_) => Ok(false),
        None => {
            arity.insert(fam, n);
            Ok(true)
        }
    };
    // Arity of a message variable, if one of its families is known.
    let var_arity = |arity: &BTreeMap<&str, usize>, var: &str| {
        var_families
            .get(var)
            .and_then(|fams| fams.iter().find_map(|f| arity.get(f).copied()))
    };
    loop {
        let mut changed = false;
        for ev in &evidence {
            let (fam, n) = match ev {
                Evidence::Destructure(fam, n) => (*fam, Some(*n)),
                Evidence::Write(fam, Message::List(items)) => (*fam, Some(items.len())),
                Evidence::Write(fam, Message::Scalar(PyExpr::Name(x)))
                    if v.message_vars.contains(x) =>
                {
                    (*fam, var_arity(&arity, x))
                }
                Evidence::Write(fam, Message::Scalar(_)) => (*fam, Some(1)),
            };
            if let Some(n) = n {
                changed |= record(&mut arity, fam, n)?;
            }
        }
        // A variable read from several families forces them to agree.
        for fams in var_families.values() {
            if let Some(n) = fams.iter().find_map(|f| arity.get(f).copied()) {
                for f in fams {
                    changed |= record(&mut arity, f, n)?;
                }
            }
        }
        if !changed {
            break;
        }
    }

    let mut families = BTreeMap::new();
    let all = std::iter::once(NODE_CHANNELS).chain(v.fifo_lists.iter().map(String::as_str));
    for fam in all {
        let n = arity.get(fam).copied().unwrap_or(1);
        families.insert(fam.to_string(), shape(v, fam, n)?);
    }
    Ok(MessageShapeMap { families })
}

fn shape(v: &ValidatedProgram, family: &str, arity: usize) -> Result<MessageShape, FrontendError> {
    if arity == 1 {
        return Ok(MessageShape {
            arity,
            fields: vec![SCALAR_FIELD.to_string()],
        });
    }
    let by_index: BTreeMap<i64, &String> = v
        .program
        .field_index_decls
        .iter()
        .map(|(name, &i)| (i, name))
        .collect();
    let fields: Option<Vec<String>> = (0..arity as i64)
        .map(|i| by_index.get(&i).map(|n| (*n).clone()))
        .collect();
    match fields {
        Some(fields) if v.program.field_index_decls.len() == by_index.len() => {
            Ok(MessageShape { arity, fields })
        }
        _ => Err(FrontendError::MissingFieldNames {
            channel: family.to_string(),
            arity,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::super::{parse_program, validate_restrictions, NameMap};
    use super::*;

    fn names() -> NameMap {
        [
            ("noIterations", "NoIterations"),
            ("noNodes", "NoNodes"),
            ("dest", "FlSrvId"),
            ("flSrvId", "FlSrvId"),
            ("flSrvAddress", "FlSrvId"),
            ("noNeighbors", "NoNeighbors"),
        ]
            .into_iter()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect()
    }

    fn shapes(src: &str) -> Result<MessageShapeMap, FrontendError> {
        let v = validate_restrictions(parse_program(src)?, &names())?;
        infer_message_shapes(&v)
    }

    #[test]
    fn decentralized_shapes() {
        let s = shapes(include_str!("../../corpus/decentralized/source.py")).unwrap();
        let nc = s.node_channels();
        assert_eq!(nc.arity, 4);
        assert_eq!(nc.fields, ["msgIterNo", "msgSeqNo", "msgSrcAdr", "msgData"]);
        assert_eq!(s.get("dataFromClients1").unwrap().arity, 4);
        assert_eq!(s.get("dataFromClients2").unwrap().arity, 1);
        assert_eq!(s.get("dataFromClients2").unwrap().fields, ["msg"]);
    }

    #[test]
    fn centralized_messages_are_scalar() {
        let s = shapes(include_str!("../../corpus/centralized/source.py")).unwrap();
        assert_eq!(s.node_channels().arity, 1);
        assert_eq!(s.families.len(), 1);
    }

    #[test]
    fn conflicting_sends_are_rejected() {
        let src = "def f(a, b, c):\n    sendMsg(dest, [a, b])\n    sendMsg(dest, b)\n    terminated = 1\n";
        assert_eq!(
            shapes(src).unwrap_err(),
            FrontendError::ShapeConflict {
                channel: NODE_CHANNELS.into(),
                first: 2,
                second: 1
            }
        );
    }

    #[test]
    fn multi_field_messages_need_field_constants() {
        let src = "def f(a, b, c):\n    sendMsg(dest, [a, b])\n    terminated = 1\n";
        assert_eq!(
            shapes(src).unwrap_err(),
            FrontendError::MissingFieldNames {
                channel: NODE_CHANNELS.into(),
                arity: 2
            }
        );
    }

    #[test]
    fn forwarded_message_propagates_shape_to_list() {
        let src = "def f(a, b, c):\n    fa = 0\n    fb = 1\n    sendMsg(dest, [a, b])\n    m = rcvMsg()\n    q.append(m)\n    x = q.pop(0)\n    sendMsg(x[fb], [x[fa], b])\n    terminated = 1\n";
        let s = shapes(src).unwrap();
        assert_eq!(s.get("q").unwrap().arity, 2);
        assert_eq!(s.get("q").unwrap().fields, ["fa", "fb"]);
    }
}
