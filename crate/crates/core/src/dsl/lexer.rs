//! Tokenizer for the expression grammar: numbers (decimal and scientific),
//! identifiers, the five operators, and parentheses, with byte-accurate
//! source positions for error reporting.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Token {
    Number(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spanned {
    pub token: Token,
    /// Byte offset of the token start in the source string.
    pub offset: usize,
}

/// 1-based (line, column) of a byte offset.
pub fn line_col(src: &str, offset: usize) -> (usize, usize) {
    let mut line = 1;
    let mut col = 1;
    for (i, ch) in src.char_indices() {
        if i >= offset {
            break;
        }
        if ch == '\n' {
            line += 1;
            col = 1;
        } else {
            col += 1;
        }
    }
    (line, col)
}

pub fn syntax_error(src: &str, offset: usize, msg: impl Into<String>) -> Error {
    let (line, col) = line_col(src, offset);
    Error::Parse { line, col, msg: msg.into() }
}

pub fn tokenize(src: &str) -> Result<Vec<Spanned>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0usize;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\r' | '\n' => {
                i += 1;
            }
            '+' => {
                out.push(Spanned { token: Token::Plus, offset: i });
                i += 1;
            }
            '-' => {
                out.push(Spanned { token: Token::Minus, offset: i });
                i += 1;
            }
            '*' => {
                out.push(Spanned { token: Token::Star, offset: i });
                i += 1;
            }
            '/' => {
                out.push(Spanned { token: Token::Slash, offset: i });
                i += 1;
            }
            '^' => {
                out.push(Spanned { token: Token::Caret, offset: i });
                i += 1;
            }
            '(' => {
                out.push(Spanned { token: Token::LParen, offset: i });
                i += 1;
            }
            ')' => {
                out.push(Spanned { token: Token::RParen, offset: i });
                i += 1;
            }
            '0'..='9' | '.' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if i < bytes.len() && bytes[i] == b'.' {
                    i += 1;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mark = i;
                    i += 1;
                    if i < bytes.len() && (bytes[i] == b'+' || bytes[i] == b'-') {
                        i += 1;
                    }
                    if i < bytes.len() && bytes[i].is_ascii_digit() {
                        while i < bytes.len() && bytes[i].is_ascii_digit() {
                            i += 1;
                        }
                    } else {
                        // `1e` followed by a non-digit is not an exponent;
                        // back off and let the `e` lex as an identifier.
                        i = mark;
                    }
                }
                let text = &src[start..i];
                if text == "." {
                    return Err(syntax_error(src, start, "lone '.' is not a number"));
                }
                let value: f64 = text
                    .parse()
                    .map_err(|_| syntax_error(src, start, format!("bad number `{text}`")))?;
                out.push(Spanned { token: Token::Number(value), offset: start });
            }
            'a'..='z' | 'A'..='Z' | '_' => {
                let start = i;
                while i < bytes.len()
                    && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                out.push(Spanned {
                    token: Token::Ident(src[start..i].to_string()),
                    offset: start,
                });
            }
            _ => {
                return Err(syntax_error(src, i, format!("unexpected character `{c}`")));
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_and_scientific_notation() {
        let toks = tokenize("1.5 + 2e-3 * .25").unwrap();
        let nums: Vec<f64> = toks
            .iter()
            .filter_map(|s| match s.token {
                Token::Number(v) => Some(v),
                _ => None,
            })
            .collect();
        assert_eq!(nums, vec![1.5, 2e-3, 0.25]);
    }

    #[test]
    fn positions_are_one_based() {
        let err = tokenize("u1 + $").unwrap_err();
        match err {
            Error::Parse { line, col, .. } => {
                assert_eq!((line, col), (1, 6));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn multiline_positions() {
        let (line, col) = line_col("ab\ncd", 4);
        assert_eq!((line, col), (2, 2));
    }
}
