//! Translation configuration: model constants, channel capacities, the
//! Python-to-CSP name map and the system name.
//!
//! The textual form has one `key = value` pair per line; `#` starts a
//! comment. Recognized keys:
//!
//! | key | value |
//! |-----|-------|
//! | `NoNodes` | number of nodes (required, positive integer) |
//! | `NoIterations` | iteration count (required, non-negative integer) |
//! | `FlSrvId` | server node id (optional) |
//! | `NodeChannelCapacity` | capacity expression (default `NoNodes-1`) |
//! | `define.NAME` | extra constant, a CSP expression |
//! | `fifo.LIST` | capacity expression of a FIFO list's channel |
//! | `name.pyName` | CSP constant a Python name resolves to |
//! | `System` | name of the system process |

use std::collections::BTreeMap;

use thiserror::Error;

use crate::cspir::{eval_const, parse_expr, BinOp, Expr};
use crate::frontend::NameMap;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("config line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("config is missing required key `{key}`")]
    MissingKey { key: String },
    #[error("config key `{key}`: {reason}")]
    InvalidValue { key: String, reason: String },
    #[error("config line {line}: unknown key `{key}`")]
    UnknownKey { key: String, line: usize },
    #[error("config line {line}: duplicate key `{key}`")]
    DuplicateKey { key: String, line: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TranslationConfig {
    pub no_nodes: i64,
    pub fl_srv_id: Option<i64>,
    pub no_iterations: i64,
    /// `None` means `NoNodes-1`.
    pub node_channel_capacity: Option<Expr>,
    pub fifo_capacities: BTreeMap<String, Expr>,
    /// Extra constants in declaration order.
    pub defines: Vec<(String, Expr)>,
    /// Explicit name-map entries; see [`name_map`](Self::name_map).
    pub names: NameMap,
    pub system_name: Option<String>,
}

impl TranslationConfig {
    pub fn new(no_nodes: i64, no_iterations: i64) -> Self {
        TranslationConfig {
            no_nodes,
            fl_srv_id: None,
            no_iterations,
            node_channel_capacity: None,
            fifo_capacities: BTreeMap::new(),
            defines: Vec::new(),
            names: NameMap::new(),
            system_name: None,
        }
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut raw: BTreeMap<String, (String, usize)> = BTreeMap::new();
        let mut order = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            let content = line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((k, v)) = content.split_once('=') else {
                return Err(ConfigError::Syntax {
                    line: line_no,
                    message: "expected `key = value`".into(),
                });
            };
            let (k, v) = (k.trim().to_string(), v.trim().to_string());
            if k.is_empty() || v.is_empty() {
                return Err(ConfigError::Syntax {
                    line: line_no,
                    message: "expected `key = value`".into(),
                });
            }
            if raw.contains_key(&k) {
                return Err(ConfigError::DuplicateKey { key: k, line: line_no });
            }
            order.push(k.clone());
            raw.insert(k, (v, line_no));
        }

        let int = |key: &str| -> Result<Option<i64>, ConfigError> {
            raw.get(key)
                .map(|(v, _)| {
                    v.parse::<i64>().map_err(|_| ConfigError::InvalidValue {
                        key: key.into(),
                        reason: format!("`{v}` is not an integer"),
                    })
                })
                .transpose()
        };
        let expr = |key: &str, v: &str| -> Result<Expr, ConfigError> {
            parse_expr(v).map_err(|e| ConfigError::InvalidValue {
                key: key.into(),
                reason: e.to_string(),
            })
        };
        let required = |key: &str, v: Option<i64>| {
            v.ok_or_else(|| ConfigError::MissingKey { key: key.into() })
        };

        let mut cfg = TranslationConfig::new(
            required("NoNodes", int("NoNodes")?)?,
            required("NoIterations", int("NoIterations")?)?,
        );
        cfg.fl_srv_id = int("FlSrvId")?;
        for key in &order {
            let (v, line) = &raw[key];
            match key.as_str() {
                "NoNodes" | "NoIterations" | "FlSrvId" => {}
                "NodeChannelCapacity" => cfg.node_channel_capacity = Some(expr(key, v)?),
                "System" => {
                    if !is_ident(v) {
                        return Err(ConfigError::InvalidValue {
                            key: key.clone(),
                            reason: format!("`{v}` is not an identifier"),
                        });
                    }
                    cfg.system_name = Some(v.clone())
                }
                _ => {
                    let (kind, name) = key.split_once('.').unwrap_or(("", ""));
                    if !is_ident(name) {
                        return Err(ConfigError::UnknownKey {
                            key: key.clone(),
                            line: *line,
                        });
                    }
                    match kind {
                        "define" => cfg.defines.push((name.to_string(), expr(key, v)?)),
                        "fifo" => {
                            cfg.fifo_capacities.insert(name.to_string(), expr(key, v)?);
                        }
                        "name" if is_ident(v) => {
                            cfg.names.insert(name.to_string(), v.clone());
                        }
                        "name" => {
                            return Err(ConfigError::InvalidValue {
                                key: key.clone(),
                                reason: format!("`{v}` is not an identifier"),
                            })
                        }
                        _ => {
                            return Err(ConfigError::UnknownKey {
                                key: key.clone(),
                                line: *line,
                            })
                        }
                    }
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Range checks on the numeric settings and capacities.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |key: &str, reason: String| ConfigError::InvalidValue {
            key: key.into(),
            reason,
        };
        if self.no_nodes < 1 {
            return Err(invalid("NoNodes", "must be at least 1".into()));
        }
        if self.no_iterations < 0 {
            return Err(invalid("NoIterations", "must not be negative".into()));
        }
        if let Some(id) = self.fl_srv_id {
            if !(0..self.no_nodes).contains(&id) {
                return Err(invalid("FlSrvId", format!("must lie in 0..{}", self.no_nodes - 1)));
            }
        }
        let env = self.constant_env()?;
        let capacities = std::iter::once(("NodeChannelCapacity".to_string(), self.node_channel_capacity()))
            .chain(self.fifo_capacities.iter().map(|(k, v)| (format!("fifo.{k}"), v.clone())));
        for (key, e) in capacities {
            let v = eval_const(&e, &env).map_err(|err| invalid(&key, err.to_string()))?;
            if v < 1 {
                return Err(invalid(&key, format!("capacity {v} is below 1")));
            }
        }
        Ok(())
    }

    fn constant_env(&self) -> Result<rustc_hash::FxHashMap<String, i64>, ConfigError> {
        let mut env = rustc_hash::FxHashMap::default();
        env.insert("NoNodes".to_string(), self.no_nodes);
        env.insert("NoIterations".to_string(), self.no_iterations);
        if let Some(id) = self.fl_srv_id {
            env.insert("FlSrvId".to_string(), id);
        }
        for (k, e) in &self.defines {
            let v = eval_const(e, &env).map_err(|err| ConfigError::InvalidValue {
                key: format!("define.{k}"),
                reason: err.to_string(),
            })?;
            env.insert(k.clone(), v);
        }
        Ok(env)
    }

    pub fn node_channel_capacity(&self) -> Expr {
        self.node_channel_capacity.clone().unwrap_or_else(|| {
            Expr::bin(BinOp::Sub, Expr::ident("NoNodes"), Expr::int(1))
        })
    }

    /// Every emitted constant `D` resolves from `D` and from `D` with a
    /// lowercase first letter; `flSrvAddress` also resolves to `FlSrvId`.
    /// Explicit `name.*` entries take precedence.
    pub fn name_map(&self) -> NameMap {
        let mut m = NameMap::new();
        let mut add = |d: &str| {
            m.insert(d.to_string(), d.to_string());
            m.insert(lower_first(d), d.to_string());
        };
        add("NoNodes");
        add("NoIterations");
        if self.fl_srv_id.is_some() {
            add("FlSrvId");
        }
        for (d, _) in &self.defines {
            add(d);
        }
        if self.fl_srv_id.is_some() {
            m.insert("flSrvAddress".into(), "FlSrvId".into());
        }
        m.extend(self.names.iter().map(|(k, v)| (k.clone(), v.clone())));
        m
    }
}

fn lower_first(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_lowercase().chain(c).collect(),
        None => String::new(),
    }
}

fn is_ident(s: &str) -> bool {
    let mut c = s.chars();
    matches!(c.next(), Some(f) if f.is_ascii_alphabetic() || f == '_')
        && c.all(|ch| ch.is_ascii_alphanumeric() || ch == '_')
}
