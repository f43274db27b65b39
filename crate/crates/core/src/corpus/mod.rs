//! The two reference FLA programs with their translation configurations,
//! verified CSP# models, and mutants of those models that reintroduce known
//! translation mistakes.

use thiserror::Error;

use crate::checker::Outcome;
use crate::cspir::Assertion;
use crate::translate::{TranslationConfig, TERMINATED};

/// Names accepted by [`load_case`].
pub const CASE_NAMES: [&str; 2] = ["centralized", "decentralized"];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CorpusError {
    #[error("unknown corpus case `{name}` (known: centralized, decentralized)")]
    UnknownCase { name: String },
}

/// One textual replacement; `find` must occur exactly once.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edit {
    pub find: &'static str,
    pub replace: &'static str,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExpectedEffect {
    /// `parse_model` fails at this line of the mutated text.
    ParseError { line: usize },
    /// The model parses and at least one assertion is violated.
    PropertyViolation,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MutantSpec {
    pub name: &'static str,
    pub description: &'static str,
    /// Edits applied in order to the golden model.
    pub transformation: &'static [Edit],
    pub expected_effect: ExpectedEffect,
}

impl MutantSpec {
    /// Applies the transformation to `golden`.
    ///
    /// # Panics
    /// If an edit's `find` text does not occur exactly once.
    pub fn apply(&self, golden: &str) -> String {
        let mut text = golden.to_string();
        for e in self.transformation {
            let n = text.matches(e.find).count();
            assert_eq!(n, 1, "mutant `{}`: `{}` occurs {n} times", self.name, e.find);
            text = text.replacen(e.find, e.replace, 1);
        }
        text
    }

    pub fn is_syntax(&self) -> bool {
        matches!(self.expected_effect, ExpectedEffect::ParseError { .. })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusCase {
    pub name: &'static str,
    pub source: &'static str,
    pub config_text: &'static str,
    pub config: TranslationConfig,
    pub golden: &'static str,
    /// Expected outcome of each of the golden's assertions.
    pub expected_verdicts: Vec<(Assertion, Outcome)>,
    pub mutants: Vec<MutantSpec>,
}

const CENTRALIZED_MUTANTS: &[MutantSpec] = &[
    MutantSpec {
        name: "arrow-for-semicolon-broadcast",
        description: "server broadcast call followed by `->` instead of `;`",
        transformation: &[Edit {
            find: "broadcastMsg(ldata, nodeId);",
            replace: "broadcastMsg(ldata, nodeId) ->",
        }],
        expected_effect: ExpectedEffect::ParseError { line: 59 },
    },
    MutantSpec {
        name: "arrow-for-semicolon-rcvmsgs",
        description: "server rcvMsgs call followed by `->` instead of `;`",
        transformation: &[Edit {
            find: "rcvMsgs(nodeId, NoNodes - 1);",
            replace: "rcvMsgs(nodeId, NoNodes - 1) ->",
        }],
        expected_effect: ExpectedEffect::ParseError { line: 60 },
    },
];

const DECENTRALIZED_MUTANTS: &[MutantSpec] = &[
    MutantSpec {
        name: "arrow-for-semicolon-broadcast",
        description: "phase-1 broadcast call followed by `->` instead of `;`",
        transformation: &[Edit {
            find: "BroadcastMsg(iterNo, PHASE1, nodeId, ldata, nodeId);",
            replace: "BroadcastMsg(iterNo, PHASE1, nodeId, ldata, nodeId) ->",
        }],
        expected_effect: ExpectedEffect::ParseError { line: 44 },
    },
    MutantSpec {
        name: "unbraced-terminated",
        description: "`terminated = True;` written without the `{...}` event braces",
        transformation: &[Edit {
            find: "{terminated = True} ->",
            replace: "terminated = True;",
        }],
        expected_effect: ExpectedEffect::ParseError { line: 52 },
    },
    MutantSpec {
        name: "arrow-for-semicolon-drain",
        description: "DrainBuffer call followed by `->` instead of `;`",
        transformation: &[Edit {
            find: "call(ccount, dataFromClients1[nodeId]));",
            replace: "call(ccount, dataFromClients1[nodeId])) ->",
        }],
        expected_effect: ExpectedEffect::ParseError { line: 49 },
    },
    MutantSpec {
        name: "drain-missing-ldata",
        description: "DrainBuffer defined without its `ldata` parameter",
        transformation: &[Edit {
            find: "DrainBuffer(nodeId, iterNo, ldata, count) =",
            replace: "DrainBuffer(nodeId, iterNo, count) =",
        }],
        expected_effect: ExpectedEffect::ParseError { line: 48 },
    },
    MutantSpec {
        name: "missing-increment",
        description: "DrainBuffer forwards buffered messages without counting them",
        transformation: &[Edit {
            find: "    {noRcvdMsgs[nodeId]++} ->\n",
            replace: "",
        }],
        expected_effect: ExpectedEffect::PropertyViolation,
    },
    MutantSpec {
        name: "drain-in-phase2",
        description: "buffer drained on every phase-2 step instead of once per iteration",
        transformation: &[
            Edit {
                find: "    DrainBuffer(nodeId, iterNo, ldata,\n      call(ccount, dataFromClients1[nodeId]));\n",
                replace: "",
            },
            Edit {
                find: "Fl_decentralized_Phase2(nodeId, ldata, pdata, iterNo) =\n",
                replace: "Fl_decentralized_Phase2(nodeId, ldata, pdata, iterNo) =\n  DrainBuffer(nodeId, iterNo, ldata, call(ccount, dataFromClients1[nodeId]));\n",
            },
        ],
        expected_effect: ExpectedEffect::PropertyViolation,
    },
];

pub fn load_case(name: &str) -> Result<CorpusCase, CorpusError> {
    let (name, source, config_text, golden, system, mutants) = match name {
        "centralized" => (
            "centralized",
            include_str!("../../corpus/centralized/source.py"),
            include_str!("../../corpus/centralized/config.cfg"),
            include_str!("../../corpus/centralized/golden.csp"),
            "SysCentralized",
            CENTRALIZED_MUTANTS,
        ),
        "decentralized" => (
            "decentralized",
            include_str!("../../corpus/decentralized/source.py"),
            include_str!("../../corpus/decentralized/config.cfg"),
            include_str!("../../corpus/decentralized/golden.csp"),
            "SysDecentralized",
            DECENTRALIZED_MUTANTS,
        ),
        other => {
            return Err(CorpusError::UnknownCase {
                name: other.to_string(),
            })
        }
    };
    let config = TranslationConfig::parse(config_text).expect("embedded config is valid");
    let system = system.to_string();
    let expected_verdicts = vec![
        (
            Assertion::DeadlockFree {
                system: system.clone(),
            },
            Outcome::Holds,
        ),
        (
            Assertion::Reaches {
                system: system.clone(),
                predicate: TERMINATED.into(),
            },
            Outcome::Holds,
        ),
        (
            Assertion::AlwaysEventually {
                system,
                predicate: TERMINATED.into(),
            },
            Outcome::Holds,
        ),
    ];
    Ok(CorpusCase {
        name,
        source,
        config_text,
        config,
        golden,
        expected_verdicts,
        mutants: mutants.to_vec(),
    })
}

/// Every case in [`CASE_NAMES`] order.
pub fn all_cases() -> Vec<CorpusCase> {
    CASE_NAMES
        .iter()
        .map(|n| load_case(n).expect("known case"))
        .collect()
}

/// The mutants of `case` as (name, mutated CSP# text).
pub fn load_mutants(case: &CorpusCase) -> Vec<(String, String)> {
    case.mutants
        .iter()
        .map(|m| (m.name.to_string(), m.apply(case.golden)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cspir::parse_model;

    #[test]
    fn cases_load() {
        let c = load_case("centralized").unwrap();
        assert!(c.golden.contains("Fl_centralizedT"));
        assert_eq!(c.config.fl_srv_id, Some(0));
        let d = load_case("decentralized").unwrap();
        assert!(d.golden.contains("DrainBuffer") && d.golden.contains("DropMsgsFromClients2"));
        assert_eq!(
            load_case("bogus").unwrap_err(),
            CorpusError::UnknownCase { name: "bogus".into() }
        );
    }

    #[test]
    fn goldens_parse_and_cover_their_assertions() {
        for c in all_cases() {
            let m = parse_model(c.golden).unwrap();
            let expected: Vec<&Assertion> = c.expected_verdicts.iter().map(|(a, _)| a).collect();
            assert_eq!(m.assertions.iter().collect::<Vec<_>>(), expected, "{}", c.name);
        }
    }

    #[test]
    fn mutant_counts() {
        let count = |name: &str| {
            let c = load_case(name).unwrap();
            let syntax = c.mutants.iter().filter(|m| m.is_syntax()).count();
            (syntax, c.mutants.len() - syntax)
        };
        assert_eq!(count("centralized"), (2, 0));
        assert_eq!(count("decentralized"), (4, 2));
    }

    #[test]
    fn syntax_mutants_fail_at_their_line() {
        for c in all_cases() {
            for (spec, (name, text)) in c.mutants.iter().zip(load_mutants(&c)) {
                let r = parse_model(&text);
                match spec.expected_effect {
                    ExpectedEffect::ParseError { line } => {
                        let e = r.expect_err(&name);
                        assert_eq!(e.line(), Some(line), "{}/{name}: {e}", c.name);
                    }
                    ExpectedEffect::PropertyViolation => {
                        r.unwrap_or_else(|e| panic!("{}/{name}: {e}", c.name));
                    }
                }
            }
        }
    }
}
