//! Tokenizer with Python's indentation rules: INDENT/DEDENT tokens at
//! logical line starts, implicit line joining inside brackets, comments
//! and blank lines ignored.

use super::FrontendError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Name(String),
    Int(i64),
    Op(&'static str),
    Newline,
    Indent,
    Dedent,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Name(n) => format!("`{n}`"),
            Tok::Int(v) => format!("`{v}`"),
            Tok::Op(o) => format!("`{o}`"),
            Tok::Newline => "end of line".into(),
            Tok::Indent => "indent".into(),
            Tok::Dedent => "dedent".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    pub line: usize,
}

const OPS: [&str; 28] = [
    "**=", "//=", "==", "!=", "<=", ">=", "+=", "-=", "*=", "/=", "%=", "**", "//", "->", "+", "-",
    "*", "/", "%", "<", ">", "=", "(", ")", "[", "]", ",", ":",
];
const SINGLE_EXTRA: [&str; 4] = [".", "@", "{", "}"];

pub(crate) fn tokenize(src: &str) -> Result<Vec<Token>, FrontendError> {
    let mut out = Vec::new();
    let mut indents = vec![0usize];
    let mut depth = 0usize;
    let mut continued = false;

    for (idx, raw) in src.lines().enumerate() {
        let line = idx + 1;
        let mut chars = raw.char_indices().peekable();
        let at_logical_start = depth == 0 && !continued;
        continued = false;

        // Indentation.
        let mut width = 0;
        let mut body_start = raw.len();
        while let Some(&(i, c)) = chars.peek() {
            match c {
                ' ' => width += 1,
                '\t' => {
                    if at_logical_start {
                        return Err(FrontendError::Syntax {
                            line,
                            expected: "spaces for indentation".into(),
                            found: "tab".into(),
                        });
                    }
                    width += 1;
                }
                _ => {
                    body_start = i;
                    break;
                }
            }
            chars.next();
        }
        let body = &raw[body_start..];
        if body.is_empty() || body.starts_with('#') {
            continue;
        }
        if at_logical_start {
            let cur = *indents.last().expect("indent stack");
            if width > cur {
                indents.push(width);
                out.push(Token {
                    tok: Tok::Indent,
                    line,
                });
            } else {
                while width < *indents.last().expect("indent stack") {
                    indents.pop();
                    out.push(Token {
                        tok: Tok::Dedent,
                        line,
                    });
                }
                if width != *indents.last().expect("indent stack") {
                    return Err(FrontendError::Syntax {
                        line,
                        expected: "indentation matching an enclosing block".into(),
                        found: format!("{width} spaces"),
                    });
                }
            }
        }

        let bytes = body.as_bytes();
        let mut i = 0;
        while i < bytes.len() {
            let c = bytes[i] as char;
            if c == ' ' || c == '\t' {
                i += 1;
                continue;
            }
            if c == '#' {
                break;
            }
            if c == '\\' && i + 1 == bytes.len() {
                continued = true;
                i += 1;
                continue;
            }
            if c == '"' || c == '\'' {
                return Err(FrontendError::RestrictionViolation {
                    construct: "string literal".into(),
                    line,
                });
            }
            if c.is_ascii_digit() {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                if i < bytes.len() && bytes[i] == b'.' {
                    return Err(FrontendError::RestrictionViolation {
                        construct: "float literal".into(),
                        line,
                    });
                }
                let text = body[start..i].replace('_', "");
                let v = text.parse::<i64>().map_err(|_| FrontendError::Syntax {
                    line,
                    expected: "a decimal integer".into(),
                    found: format!("`{}`", &body[start..i]),
                })?;
                out.push(Token {
                    tok: Tok::Int(v),
                    line,
                });
                continue;
            }
            if c.is_ascii_alphabetic() || c == '_' {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                // String prefixes such as f"..." or b'...'.
                if i < bytes.len() && (bytes[i] == b'"' || bytes[i] == b'\'') {
                    return Err(FrontendError::RestrictionViolation {
                        construct: "string literal".into(),
                        line,
                    });
                }
                out.push(Token {
                    tok: Tok::Name(body[start..i].to_string()),
                    line,
                });
                continue;
            }
            if c == '.' {
                if i + 1 < bytes.len() && bytes[i + 1].is_ascii_digit() {
                    return Err(FrontendError::RestrictionViolation {
                        construct: "float literal".into(),
                        line,
                    });
                }
                out.push(Token {
                    tok: Tok::Op("."),
                    line,
                });
                i += 1;
                continue;
            }
            let rest = &body[i..];
            let op = OPS
                .iter()
                .chain(SINGLE_EXTRA.iter())
                .find(|o| rest.starts_with(**o))
                .copied();
            let Some(op) = op else {
                return Err(FrontendError::Syntax {
                    line,
                    expected: "a token".into(),
                    found: format!("`{c}`"),
                });
            };
            match op {
                "(" | "[" | "{" => depth += 1,
                ")" | "]" | "}" => depth = depth.saturating_sub(1),
                _ => {}
            }
            out.push(Token {
                tok: Tok::Op(op),
                line,
            });
            i += op.len();
        }
        if depth == 0 && !continued {
            out.push(Token {
                tok: Tok::Newline,
                line,
            });
        }
    }
    let last = src.lines().count().max(1);
    if depth > 0 {
        return Err(FrontendError::Syntax {
            line: last,
            expected: "closing bracket".into(),
            found: "end of input".into(),
        });
    }
    while indents.len() > 1 {
        indents.pop();
        out.push(Token {
            tok: Tok::Dedent,
            line: last,
        });
    }
    out.push(Token {
        tok: Tok::Eof,
        line: last,
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(src: &str) -> Vec<Tok> {
        tokenize(src).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn indentation_produces_indent_and_dedent() {
        let t = toks("def f(a):\n    x = 1\n    if a:\n        x = 2\ny = 3\n");
        let indents = t.iter().filter(|t| **t == Tok::Indent).count();
        let dedents = t.iter().filter(|t| **t == Tok::Dedent).count();
        assert_eq!((indents, dedents), (2, 2));
    }

    #[test]
    fn brackets_join_lines() {
        let t = toks("f(a,\n      b)\n");
        assert_eq!(t.iter().filter(|t| **t == Tok::Newline).count(), 1);
        assert!(!t.contains(&Tok::Indent));
    }

    #[test]
    fn comments_and_blank_lines_are_skipped() {
        let t = toks("# c\n\nx = 1  # trailing\n   # indented comment\ny = 2\n");
        assert!(!t.contains(&Tok::Indent));
        assert_eq!(t.iter().filter(|t| **t == Tok::Newline).count(), 2);
    }

    #[test]
    fn rejects_tabs_strings_and_floats() {
        assert!(matches!(
            tokenize("def f():\n\tx = 1\n"),
            Err(FrontendError::Syntax { line: 2, .. })
        ));
        assert!(matches!(
            tokenize("x = 'a'\n"),
            Err(FrontendError::RestrictionViolation { .. })
        ));
        assert!(matches!(
            tokenize("x = 1.5\n"),
            Err(FrontendError::RestrictionViolation { .. })
        ));
    }

    #[test]
    fn inconsistent_dedent_is_an_error() {
        assert!(matches!(
            tokenize("if a:\n    x = 1\n  y = 2\n"),
            Err(FrontendError::Syntax { line: 3, .. })
        ));
    }
}
