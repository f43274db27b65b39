//! Random generator for programs in the accepted Python subset, shared by
//! the acceptance harness and the property tests.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use flcsp_core::translate::TranslationConfig;

/// Configuration every generated program translates under.
pub fn generated_config() -> TranslationConfig {
    TranslationConfig::parse("NoNodes = 3\nFlSrvId = 0\nNoIterations = 2\n").unwrap()
}

struct Gen {
    rng: ChaCha8Rng,
    out: String,
    loops: usize,
}

impl Gen {
    fn line(&mut self, indent: usize, text: &str) {
        for _ in 0..indent {
            self.out.push_str("    ");
        }
        self.out.push_str(text);
        self.out.push('\n');
    }

    fn mpapi(&mut self, indent: usize) {
        let s = match self.rng.gen_range(0..4) {
            0 => "sendMsg(flSrvAddress, localData)",
            1 => "broadcastMsg(addresses, localData, nodeId)",
            2 => "msg = rcvMsg()",
            _ => "msgs = rcvMsgs(noNodes-1)",
        };
        self.line(indent, s);
    }

    fn block(&mut self, indent: usize, depth: usize, counters: &mut Vec<String>) {
        let n = self.rng.gen_range(1..=3);
        for _ in 0..n {
            self.stmt(indent, depth, counters);
        }
    }

    fn stmt(&mut self, indent: usize, depth: usize, counters: &mut Vec<String>) {
        let choice = if depth == 0 { self.rng.gen_range(0..3) } else { self.rng.gen_range(0..6) };
        match choice {
            0 | 1 => self.mpapi(indent),
            2 => self.line(indent, "cnt = cnt + 1"),
            3 => {
                let cond = match (self.rng.gen_bool(0.5), counters.last()) {
                    (true, Some(k)) => format!("{k} == 0"),
                    _ => "nodeId == flSrvId".to_string(),
                };
                self.line(indent, &format!("if {cond}:"));
                self.block(indent + 1, depth - 1, counters);
                if self.rng.gen_bool(0.6) {
                    self.line(indent, "else:");
                    self.block(indent + 1, depth - 1, counters);
                }
            }
            4 => {
                let k = format!("k{}", self.loops);
                self.loops += 1;
                self.line(indent, &format!("for {k} in range(noIterations):"));
                counters.push(k);
                self.block(indent + 1, depth - 1, counters);
                counters.pop();
            }
            _ => {
                self.line(indent, "while cnt < noIterations:");
                self.line(indent + 1, "cnt = cnt + 1");
                self.block(indent + 1, depth - 1, counters);
            }
        }
    }
}

/// A valid subset program derived deterministically from `seed`.
pub fn random_program(seed: u64) -> String {
    let mut g = Gen {
        rng: ChaCha8Rng::seed_from_u64(seed),
        out: String::new(),
        loops: 0,
    };
    g.line(0, &format!("def fl_gen{seed}(nodeId, localData, privateData):"));
    g.line(1, "cnt = 0");
    let mut counters = Vec::new();
    g.block(1, 3, &mut counters);
    g.line(1, "terminated = 1");
    g.out
}
