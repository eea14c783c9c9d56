//! Safety specifications: an LTL safety fragment with `G` (globally), `X`
//! (next), and boolean connectives over proposition atoms.
//!
//! Grammar: `G`, `X`, `!`, `&`, `|`, `->`, parentheses; atoms are bare
//! identifiers or double-quoted strings (spaces allowed). A specification's
//! top level is a conjunction of `G`-clauses (or a single one), and `G` may
//! only occur positively; liveness operators (`F`, `U`, `GF`, `R`) are
//! rejected.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::guard::write_atom;
use crate::props::Prop;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SafetyFormula {
    True,
    False,
    Atom(Prop),
    Not(Box<SafetyFormula>),
    And(Vec<SafetyFormula>),
    Or(Vec<SafetyFormula>),
    Implies(Box<SafetyFormula>, Box<SafetyFormula>),
    Next(Box<SafetyFormula>),
    Globally(Box<SafetyFormula>),
}

impl SafetyFormula {
    pub fn atom(name: impl AsRef<str>) -> Self {
        SafetyFormula::Atom(Prop::new(name))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: SafetyFormula) -> Self {
        SafetyFormula::Not(Box::new(f))
    }

    pub fn next(f: SafetyFormula) -> Self {
        SafetyFormula::Next(Box::new(f))
    }

    pub fn globally(f: SafetyFormula) -> Self {
        SafetyFormula::Globally(Box::new(f))
    }

    pub fn implies(a: SafetyFormula, b: SafetyFormula) -> Self {
        SafetyFormula::Implies(Box::new(a), Box::new(b))
    }

    /// All proposition atoms occurring in the formula.
    pub fn atoms(&self) -> BTreeSet<Prop> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms(&self, out: &mut BTreeSet<Prop>) {
        match self {
            SafetyFormula::True | SafetyFormula::False => {}
            SafetyFormula::Atom(p) => {
                out.insert(p.clone());
            }
            SafetyFormula::Not(f) | SafetyFormula::Next(f) | SafetyFormula::Globally(f) => {
                f.collect_atoms(out)
            }
            SafetyFormula::And(fs) | SafetyFormula::Or(fs) => {
                for f in fs {
                    f.collect_atoms(out);
                }
            }
            SafetyFormula::Implies(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
        }
    }

    /// Maximum nesting depth of `X`.
    pub fn x_depth(&self) -> usize {
        match self {
            SafetyFormula::True | SafetyFormula::False | SafetyFormula::Atom(_) => 0,
            SafetyFormula::Not(f) | SafetyFormula::Globally(f) => f.x_depth(),
            SafetyFormula::Next(f) => 1 + f.x_depth(),
            SafetyFormula::And(fs) | SafetyFormula::Or(fs) => {
                fs.iter().map(|f| f.x_depth()).max().unwrap_or(0)
            }
            SafetyFormula::Implies(a, b) => a.x_depth().max(b.x_depth()),
        }
    }

    /// Splits a top-level conjunction into its `G`-clauses. A single clause
    /// yields itself. Verification runs one monitor per clause.
    pub fn clauses(&self) -> Vec<SafetyFormula> {
        match self {
            SafetyFormula::And(fs) => fs.clone(),
            other => vec![other.clone()],
        }
    }

    /// `G` must only occur under an even number of negations (counting
    /// implication antecedents); otherwise the formula carries a liveness
    /// obligation and leaves the safety fragment.
    fn globally_positive(&self, positive: bool) -> bool {
        match self {
            SafetyFormula::True | SafetyFormula::False | SafetyFormula::Atom(_) => true,
            SafetyFormula::Globally(f) => positive && f.globally_positive(positive),
            SafetyFormula::Next(f) => f.globally_positive(positive),
            SafetyFormula::Not(f) => f.globally_positive(!positive),
            SafetyFormula::And(fs) | SafetyFormula::Or(fs) => {
                fs.iter().all(|f| f.globally_positive(positive))
            }
            SafetyFormula::Implies(a, b) => {
                a.globally_positive(!positive) && b.globally_positive(positive)
            }
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, parent: u8) -> fmt::Result {
        let prec = match self {
            SafetyFormula::Implies(..) => 1,
            SafetyFormula::Or(_) => 2,
            SafetyFormula::And(_) => 3,
            _ => 4,
        };
        let paren = prec < parent;
        if paren {
            f.write_str("(")?;
        }
        match self {
            SafetyFormula::True => f.write_str("true")?,
            SafetyFormula::False => f.write_str("false")?,
            SafetyFormula::Atom(p) => write_atom(f, p)?,
            SafetyFormula::Not(g) => {
                f.write_str("!")?;
                g.fmt_prec(f, 4)?;
            }
            SafetyFormula::Next(g) => {
                f.write_str("X ")?;
                g.fmt_prec(f, 4)?;
            }
            SafetyFormula::Globally(g) => {
                f.write_str("G ")?;
                g.fmt_prec(f, 4)?;
            }
            SafetyFormula::And(gs) => {
                for (i, g) in gs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" & ")?;
                    }
                    g.fmt_prec(f, 3)?;
                }
            }
            SafetyFormula::Or(gs) => {
                for (i, g) in gs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" | ")?;
                    }
                    g.fmt_prec(f, 2)?;
                }
            }
            SafetyFormula::Implies(a, b) => {
                a.fmt_prec(f, 2)?;
                f.write_str(" -> ")?;
                b.fmt_prec(f, 1)?;
            }
        }
        if paren {
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl fmt::Display for SafetyFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

#[derive(Debug, Error)]
pub enum FormulaError {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("not in the safety fragment: {0}")]
    NotSafetyFragment(String),
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Globally,
    Next,
    Not,
    And,
    Or,
    Implies,
    LParen,
    RParen,
    True,
    False,
    Atom(String),
    /// Liveness operator names, rejected with a dedicated error.
    Reserved(String),
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, FormulaError> {
    let bytes = text.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\r' | '\n' => i += 1,
            '#' => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            }
            '(' => {
                toks.push((i, Tok::LParen));
                i += 1;
            }
            ')' => {
                toks.push((i, Tok::RParen));
                i += 1;
            }
            '!' => {
                toks.push((i, Tok::Not));
                i += 1;
            }
            '&' => {
                toks.push((i, Tok::And));
                i += 1;
            }
            '|' => {
                toks.push((i, Tok::Or));
                i += 1;
            }
            '-' => {
                if bytes.get(i + 1) == Some(&b'>') {
                    toks.push((i, Tok::Implies));
                    i += 2;
                } else {
                    return Err(FormulaError::Syntax {
                        pos: i,
                        msg: "expected '->'".into(),
                    });
                }
            }
            '"' => {
                let start = i + 1;
                let mut j = start;
                while j < bytes.len() && bytes[j] != b'"' {
                    j += 1;
                }
                if j >= bytes.len() {
                    return Err(FormulaError::Syntax {
                        pos: i,
                        msg: "unterminated quoted atom".into(),
                    });
                }
                toks.push((i, Tok::Atom(text[start..j].to_string())));
                i = j + 1;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                let mut j = i;
                while j < bytes.len()
                    && ((bytes[j] as char).is_ascii_alphanumeric() || bytes[j] == b'_')
                {
                    j += 1;
                }
                let word = &text[start..j];
                let tok = match word {
                    "G" => Tok::Globally,
                    "X" => Tok::Next,
                    "true" => Tok::True,
                    "false" => Tok::False,
                    "F" | "U" | "GF" | "R" | "W" => Tok::Reserved(word.to_string()),
                    _ => Tok::Atom(word.to_string()),
                };
                toks.push((start, tok));
                i = j;
            }
            other => {
                return Err(FormulaError::Syntax {
                    pos: i,
                    msg: format!("unexpected character {other:?}"),
                })
            }
        }
    }
    Ok(toks)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map(|(p, _)| *p).unwrap_or(usize::MAX)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(_, t)| t.clone());
        self.pos += 1;
        t
    }

    fn err(&self, msg: impl Into<String>) -> FormulaError {
        FormulaError::Syntax {
            pos: self.here(),
            msg: msg.into(),
        }
    }

    fn implies(&mut self) -> Result<SafetyFormula, FormulaError> {
        let lhs = self.or()?;
        if self.peek() == Some(&Tok::Implies) {
            self.bump();
            let rhs = self.implies()?;
            return Ok(SafetyFormula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<SafetyFormula, FormulaError> {
        let mut items = vec![self.and()?];
        while self.peek() == Some(&Tok::Or) {
            self.bump();
            items.push(self.and()?);
        }
        Ok(if items.len() == 1 {
            items.pop().unwrap()
        } else {
            SafetyFormula::Or(items)
        })
    }

    fn and(&mut self) -> Result<SafetyFormula, FormulaError> {
        let mut items = vec![self.unary()?];
        while self.peek() == Some(&Tok::And) {
            self.bump();
            items.push(self.unary()?);
        }
        Ok(if items.len() == 1 {
            items.pop().unwrap()
        } else {
            SafetyFormula::And(items)
        })
    }

    fn unary(&mut self) -> Result<SafetyFormula, FormulaError> {
        match self.peek() {
            Some(Tok::Not) => {
                self.bump();
                Ok(SafetyFormula::not(self.unary()?))
            }
            Some(Tok::Globally) => {
                self.bump();
                Ok(SafetyFormula::globally(self.unary()?))
            }
            Some(Tok::Next) => {
                self.bump();
                Ok(SafetyFormula::next(self.unary()?))
            }
            Some(Tok::Reserved(op)) => {
                let op = op.clone();
                Err(FormulaError::NotSafetyFragment(format!(
                    "operator {op} is not supported (safety fragment has only G and X)"
                )))
            }
            _ => self.primary(),
        }
    }

    fn primary(&mut self) -> Result<SafetyFormula, FormulaError> {
        match self.bump() {
            Some(Tok::LParen) => {
                let inner = self.implies()?;
                match self.bump() {
                    Some(Tok::RParen) => Ok(inner),
                    _ => Err(self.err("expected ')'")),
                }
            }
            Some(Tok::True) => Ok(SafetyFormula::True),
            Some(Tok::False) => Ok(SafetyFormula::False),
            Some(Tok::Atom(name)) => Ok(SafetyFormula::atom(name)),
            Some(Tok::Reserved(op)) => Err(FormulaError::NotSafetyFragment(format!(
                "operator {op} is not supported (safety fragment has only G and X)"
            ))),
            other => Err(self.err(format!("expected a formula, found {other:?}"))),
        }
    }
}

/// Parses a specification and checks the safety-fragment invariants:
/// the top level is a conjunction of `G`-clauses and `G` occurs only
/// positively.
pub fn parse_spec(text: &str) -> Result<SafetyFormula, FormulaError> {
    let f = parse_fragment(text)?;
    for clause in f.clauses() {
        if !matches!(clause, SafetyFormula::Globally(_)) {
            return Err(FormulaError::NotSafetyFragment(format!(
                "top level must be a conjunction of G-clauses, found {clause}"
            )));
        }
    }
    Ok(f)
}

/// Parses any formula of the fragment (no top-level shape requirement).
/// Used for sub-formulas in tests and the monitor machinery.
pub fn parse_fragment(text: &str) -> Result<SafetyFormula, FormulaError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0 };
    let f = p.implies()?;
    if p.pos != p.toks.len() {
        return Err(p.err("trailing input after formula"));
    }
    if !f.globally_positive(true) {
        return Err(FormulaError::NotSafetyFragment(
            "G occurs under a negation, which yields a liveness obligation".into(),
        ));
    }
    Ok(f)
}
