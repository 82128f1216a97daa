use num_bigint::BigInt;

use super::{Diagnostic, Pos};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Int(BigInt),
    Ident(String),
    /// `_(` opening a jet suffix.
    JetOpen,
    Punct(char),
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

const PUNCT: &str = "[]()+-*/^=:;,";

/// Tokenizes one physical line. `col0` is the 1-based column of `text[0]`.
pub fn lex_line(text: &str, line: usize, col0: usize) -> Result<Vec<Token>, Diagnostic> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos {
            line,
            column: col0 + i,
        };
        if c == '#' {
            break;
        }
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            out.push(Token {
                tok: Tok::Int(s.parse().expect("digits")),
                pos,
            });
            continue;
        }
        if c == '_' && chars.get(i + 1) == Some(&'(') {
            out.push(Token {
                tok: Tok::JetOpen,
                pos,
            });
            i += 2;
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len()
                && (chars[i].is_ascii_alphanumeric() || chars[i] == '_')
                && !(chars[i] == '_' && chars.get(i + 1) == Some(&'('))
            {
                i += 1;
            }
            out.push(Token {
                tok: Tok::Ident(chars[start..i].iter().collect()),
                pos,
            });
            continue;
        }
        if PUNCT.contains(c) {
            out.push(Token {
                tok: Tok::Punct(c),
                pos,
            });
            i += 1;
            continue;
        }
        return Err(Diagnostic::new(
            "E-SYNTAX",
            pos,
            format!("unexpected character `{c}`"),
        ));
    }
    Ok(out)
}
