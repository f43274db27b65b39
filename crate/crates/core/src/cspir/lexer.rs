use super::CspError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    Int(i64),
    /// `#define`, `#assert`, ...
    Directive(String),
    Sym(&'static str),
    Eof,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Int(v) => format!("`{v}`"),
            Tok::Directive(d) => format!("`#{d}`"),
            Tok::Sym(s) => format!("`{s}`"),
            Tok::Eof => "end of input".to_string(),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    pub line: usize,
}

// Longest first so that maximal munch falls out of a linear scan.
const SYMBOLS: &[&str] = &[
    "|||", "->", "++", "--", "==", "!=", "<=", ">=", "&&", "||", "|=", "..", "{", "}", "(", ")",
    "[", "]", ";", ",", ".", "!", "?", "=", "<", ">", "+", "-", "*", ":", "@",
];

pub(crate) fn lex(src: &str) -> Result<Vec<Token>, CspError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    let mut line = 1;
    while i < bytes.len() {
        let c = bytes[i];
        if c == b'\n' {
            line += 1;
            i += 1;
            continue;
        }
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if src[i..].starts_with("//") {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        if src[i..].starts_with("/*") {
            let start_line = line;
            i += 2;
            loop {
                if i >= bytes.len() {
                    return Err(CspError::Syntax {
                        line: start_line,
                        expected: "`*/` closing the block comment".into(),
                        found: "end of input".into(),
                    });
                }
                if src[i..].starts_with("*/") {
                    i += 2;
                    break;
                }
                if bytes[i] == b'\n' {
                    line += 1;
                }
                i += 1;
            }
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let v = src[start..i].parse::<i64>().map_err(|_| CspError::Syntax {
                line,
                expected: "an integer literal that fits in 64 bits".into(),
                found: format!("`{}`", &src[start..i]),
            })?;
            out.push(Token {
                tok: Tok::Int(v),
                line,
            });
            continue;
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push(Token {
                tok: Tok::Ident(src[start..i].to_string()),
                line,
            });
            continue;
        }
        if c == b'#' {
            let start = i + 1;
            i += 1;
            while i < bytes.len() && bytes[i].is_ascii_alphabetic() {
                i += 1;
            }
            out.push(Token {
                tok: Tok::Directive(src[start..i].to_string()),
                line,
            });
            continue;
        }
        match SYMBOLS.iter().find(|s| src[i..].starts_with(**s)) {
            Some(s) => {
                out.push(Token {
                    tok: Tok::Sym(s),
                    line,
                });
                i += s.len();
            }
            None => {
                let ch = src[i..].chars().next().unwrap_or('?');
                return Err(CspError::Syntax {
                    line,
                    expected: "a CSP# token".into(),
                    found: format!("`{ch}`"),
                });
            }
        }
    }
    out.push(Token { tok: Tok::Eof, line });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<Tok> {
        lex(src).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn maximal_munch() {
        assert_eq!(
            kinds("a--b->|||x"),
            vec![
                Tok::Ident("a".into()),
                Tok::Sym("--"),
                Tok::Ident("b".into()),
                Tok::Sym("->"),
                Tok::Sym("|||"),
                Tok::Ident("x".into()),
                Tok::Eof
            ]
        );
    }

    #[test]
    fn comments_keep_line_count() {
        let toks = lex("/* a\n b */ x // y\n z").unwrap();
        assert_eq!(toks[0].line, 2);
        assert_eq!(toks[1].line, 3);
    }

    #[test]
    fn range_is_not_a_float() {
        assert_eq!(
            kinds("0..3"),
            vec![Tok::Int(0), Tok::Sym(".."), Tok::Int(3), Tok::Eof]
        );
    }
}
