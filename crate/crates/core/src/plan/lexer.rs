//! Line-oriented lexer for the indentation-delimited plan language.
//!
//! Indentation is spaces-only and consistent per block; tabs are rejected.
//! Blank and comment-only lines are skipped. `#` starts a comment.

use thiserror::Error;

use crate::span::SourceSpan;

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Newline,
    Indent,
    Dedent,
    Def,
    While,
    If,
    Elif,
    Else,
    Return,
    Break,
    Pass,
    And,
    Or,
    Not,
    True,
    False,
    Ident(String),
    Str(String),
    Num(String),
    LParen,
    RParen,
    Comma,
    Colon,
    Dot,
    Assign,
    Cmp(&'static str),
    /// Keyword of a construct outside the supported grammar subset.
    Unsupported(String),
    Eof,
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub line: u32,
    pub col: u32,
    pub end_col: u32,
}

impl Token {
    pub fn span(&self) -> SourceSpan {
        SourceSpan::new(self.line, self.col, self.line, self.end_col.max(self.col))
    }
}

#[derive(Debug, Error)]
pub enum LexError {
    #[error("line {line}, column {col}: {msg}")]
    At { line: u32, col: u32, msg: String },
}

fn err(line: u32, col: u32, msg: impl Into<String>) -> LexError {
    LexError::At {
        line,
        col,
        msg: msg.into(),
    }
}

const UNSUPPORTED_KEYWORDS: &[&str] = &[
    "for", "class", "import", "from", "try", "except", "finally", "with", "raise", "lambda",
    "global", "nonlocal", "del", "yield", "async", "await", "assert", "continue", "match",
];

pub fn lex(text: &str) -> Result<Vec<Token>, LexError> {
    let mut out: Vec<Token> = Vec::new();
    let mut indents: Vec<usize> = vec![0];

    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = (idx + 1) as u32;
        let mut indent = 0usize;
        let bytes = raw_line.as_bytes();
        while indent < bytes.len() {
            match bytes[indent] {
                b' ' => indent += 1,
                b'\t' => {
                    return Err(err(
                        line_no,
                        (indent + 1) as u32,
                        "tabs are not allowed in indentation",
                    ))
                }
                _ => break,
            }
        }
        let rest = &raw_line[indent..];
        if rest.is_empty() || rest.starts_with('#') {
            continue;
        }

        let current = *indents.last().unwrap();
        if indent > current {
            indents.push(indent);
            push_marker(&mut out, Tok::Indent, line_no, (indent + 1) as u32);
        } else if indent < current {
            while *indents.last().unwrap() > indent {
                indents.pop();
                push_marker(&mut out, Tok::Dedent, line_no, (indent + 1) as u32);
            }
            if *indents.last().unwrap() != indent {
                return Err(err(
                    line_no,
                    (indent + 1) as u32,
                    "dedent does not match any outer indentation level",
                ));
            }
        }

        lex_line(rest, line_no, (indent + 1) as u32, &mut out)?;
        let end = (raw_line.trim_end().len() + 1) as u32;
        push_marker(&mut out, Tok::Newline, line_no, end);
    }

    let last_line = (text.lines().count().max(1)) as u32;
    while indents.len() > 1 {
        indents.pop();
        push_marker(&mut out, Tok::Dedent, last_line, 1);
    }
    push_marker(&mut out, Tok::Eof, last_line + 1, 1);
    Ok(out)
}

fn push_marker(out: &mut Vec<Token>, tok: Tok, line: u32, col: u32) {
    out.push(Token {
        tok,
        line,
        col,
        end_col: col,
    });
}

fn lex_line(rest: &str, line: u32, start_col: u32, out: &mut Vec<Token>) -> Result<(), LexError> {
    let bytes = rest.as_bytes();
    let mut i = 0usize;
    let col_of = |i: usize| start_col + i as u32;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' => i += 1,
            '#' => break,
            '(' => {
                push_sym(out, Tok::LParen, line, col_of(i));
                i += 1;
            }
            ')' => {
                push_sym(out, Tok::RParen, line, col_of(i));
                i += 1;
            }
            ',' => {
                push_sym(out, Tok::Comma, line, col_of(i));
                i += 1;
            }
            ':' => {
                push_sym(out, Tok::Colon, line, col_of(i));
                i += 1;
            }
            '.' => {
                push_sym(out, Tok::Dot, line, col_of(i));
                i += 1;
            }
            '=' => {
                if bytes.get(i + 1) == Some(&b'=') {
                    out.push(Token {
                        tok: Tok::Cmp("=="),
                        line,
                        col: col_of(i),
                        end_col: col_of(i + 1),
                    });
                    i += 2;
                } else {
                    push_sym(out, Tok::Assign, line, col_of(i));
                    i += 1;
                }
            }
            '!' => {
                if bytes.get(i + 1) == Some(&b'=') {
                    out.push(Token {
                        tok: Tok::Cmp("!="),
                        line,
                        col: col_of(i),
                        end_col: col_of(i + 1),
                    });
                    i += 2;
                } else {
                    return Err(err(line, col_of(i), "unexpected '!'"));
                }
            }
            '<' | '>' => {
                let (tok, len) = if bytes.get(i + 1) == Some(&b'=') {
                    (if c == '<' { Tok::Cmp("<=") } else { Tok::Cmp(">=") }, 2)
                } else {
                    (if c == '<' { Tok::Cmp("<") } else { Tok::Cmp(">") }, 1)
                };
                out.push(Token {
                    tok,
                    line,
                    col: col_of(i),
                    end_col: col_of(i + len - 1),
                });
                i += len;
            }
            '"' | '\'' => {
                let quote = c;
                let start = i;
                i += 1;
                let mut value = String::new();
                loop {
                    if i >= bytes.len() {
                        return Err(err(line, col_of(start), "unterminated string literal"));
                    }
                    let ch = bytes[i] as char;
                    if ch == quote {
                        i += 1;
                        break;
                    }
                    if ch == '\\' {
                        let esc = bytes.get(i + 1).map(|&b| b as char).ok_or_else(|| {
                            err(line, col_of(i), "dangling escape in string literal")
                        })?;
                        value.push(match esc {
                            'n' => '\n',
                            't' => '\t',
                            '\\' => '\\',
                            '"' => '"',
                            '\'' => '\'',
                            other => {
                                return Err(err(
                                    line,
                                    col_of(i),
                                    format!("unsupported escape '\\{other}'"),
                                ))
                            }
                        });
                        i += 2;
                    } else {
                        value.push(ch);
                        i += 1;
                    }
                }
                out.push(Token {
                    tok: Tok::Str(value),
                    line,
                    col: col_of(start),
                    end_col: col_of(i - 1),
                });
            }
            c if c.is_ascii_digit()
                || (c == '-' && bytes.get(i + 1).is_some_and(|b| b.is_ascii_digit())) =>
            {
                let start = i;
                i += 1;
                while i < bytes.len()
                    && ((bytes[i] as char).is_ascii_digit() || bytes[i] == b'.')
                {
                    i += 1;
                }
                out.push(Token {
                    tok: Tok::Num(rest[start..i].to_string()),
                    line,
                    col: col_of(start),
                    end_col: col_of(i - 1),
                });
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < bytes.len()
                    && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                let word = &rest[start..i];
                let tok = match word {
                    "def" => Tok::Def,
                    "while" => Tok::While,
                    "if" => Tok::If,
                    "elif" => Tok::Elif,
                    "else" => Tok::Else,
                    "return" => Tok::Return,
                    "break" => Tok::Break,
                    "pass" => Tok::Pass,
                    "and" => Tok::And,
                    "or" => Tok::Or,
                    "not" => Tok::Not,
                    "True" => Tok::True,
                    "False" => Tok::False,
                    w if UNSUPPORTED_KEYWORDS.contains(&w) => Tok::Unsupported(w.to_string()),
                    _ => Tok::Ident(word.to_string()),
                };
                out.push(Token {
                    tok,
                    line,
                    col: col_of(start),
                    end_col: col_of(i - 1),
                });
            }
            other => return Err(err(line, col_of(i), format!("unexpected character {other:?}"))),
        }
    }
    Ok(())
}

fn push_sym(out: &mut Vec<Token>, tok: Tok, line: u32, col: u32) {
    out.push(Token {
        tok,
        line,
        col,
        end_col: col,
    });
}
