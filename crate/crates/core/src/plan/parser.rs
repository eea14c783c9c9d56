//! Recursive-descent parser for the plan grammar.
//!
//! The grammar is a frozen subset: one top-level `def`, `while`,
//! `if`/`elif`/`else`, calls, assignments, `return`, `break`, `pass`,
//! boolean operators and comparisons. Anything else is an unsupported
//! construct and rejected with its location.

use thiserror::Error;

use super::ast::{CallExpr, CmpOp, Expr, Plan, Stmt, StmtKind};
use super::lexer::{lex, LexError, Tok, Token};
use crate::span::SourceSpan;

#[derive(Debug, Error)]
pub enum PlanError {
    #[error("syntax error at line {line}, column {col}: {msg}")]
    Syntax { line: u32, col: u32, msg: String },
    #[error("unsupported construct at {span}: {msg}")]
    UnsupportedConstruct { span: SourceSpan, msg: String },
    #[error(transparent)]
    Lex(#[from] LexError),
}

pub fn parse_plan(text: &str) -> Result<Plan, PlanError> {
    let toks = lex(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        loop_depth: 0,
    };
    p.plan()
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    loop_depth: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos.min(self.toks.len() - 1)]
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos.min(self.toks.len() - 1)].clone();
        if self.pos < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn syntax(&self, tok: &Token, msg: impl Into<String>) -> PlanError {
        PlanError::Syntax {
            line: tok.line,
            col: tok.col,
            msg: msg.into(),
        }
    }

    fn unsupported(&self, span: SourceSpan, msg: impl Into<String>) -> PlanError {
        PlanError::UnsupportedConstruct {
            span,
            msg: msg.into(),
        }
    }

    fn expect(&mut self, want: &Tok, what: &str) -> Result<Token, PlanError> {
        let t = self.bump();
        if std::mem::discriminant(&t.tok) == std::mem::discriminant(want) {
            Ok(t)
        } else {
            Err(self.syntax(&t, format!("expected {what}, found {:?}", t.tok)))
        }
    }

    fn plan(&mut self) -> Result<Plan, PlanError> {
        let def = self.bump();
        if def.tok != Tok::Def {
            if let Tok::Unsupported(kw) = &def.tok {
                return Err(self.unsupported(def.span(), format!("'{kw}' statement")));
            }
            return Err(self.syntax(&def, "expected a function definition"));
        }
        let name_tok = self.bump();
        let name = match &name_tok.tok {
            Tok::Ident(n) => n.clone(),
            _ => return Err(self.syntax(&name_tok, "expected a function name")),
        };
        self.expect(&Tok::LParen, "'('")?;
        let mut params = Vec::new();
        if self.peek().tok != Tok::RParen {
            loop {
                let t = self.bump();
                match &t.tok {
                    Tok::Ident(p) => params.push(p.clone()),
                    _ => return Err(self.syntax(&t, "expected a parameter name")),
                }
                if self.peek().tok == Tok::Comma {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect(&Tok::RParen, "')'")?;
        self.expect(&Tok::Colon, "':'")?;
        self.expect(&Tok::Newline, "end of line")?;
        let body = self.block()?;
        let eof = self.peek().clone();
        if eof.tok != Tok::Eof {
            if eof.tok == Tok::Def {
                return Err(self.unsupported(
                    eof.span(),
                    "multiple function definitions; a plan is a single def",
                ));
            }
            return Err(self.syntax(&eof, "trailing input after the plan body"));
        }
        let span = SourceSpan::new(def.line, def.col, def.line, def.col).cover(
            body.last()
                .map(|s| s.span)
                .unwrap_or_else(|| SourceSpan::point(def.line, def.col)),
        );
        Ok(Plan {
            name,
            params,
            body,
            span,
        })
    }

    fn block(&mut self) -> Result<Vec<Stmt>, PlanError> {
        self.expect(&Tok::Indent, "an indented block")?;
        let mut stmts = Vec::new();
        loop {
            match self.peek().tok {
                Tok::Dedent => {
                    self.bump();
                    break;
                }
                Tok::Eof => break,
                _ => stmts.push(self.stmt()?),
            }
        }
        if stmts.is_empty() {
            let t = self.peek().clone();
            return Err(self.syntax(&t, "empty block"));
        }
        Ok(stmts)
    }

    fn stmt(&mut self) -> Result<Stmt, PlanError> {
        let t = self.peek().clone();
        match &t.tok {
            Tok::While => {
                self.bump();
                let cond = self.expr()?;
                self.expect(&Tok::Colon, "':'")?;
                self.expect(&Tok::Newline, "end of line")?;
                self.loop_depth += 1;
                let body = self.block()?;
                self.loop_depth -= 1;
                let span = t.span().cover(body.last().map(|s| s.span).unwrap_or(t.span()));
                Ok(Stmt {
                    kind: StmtKind::While { cond, body },
                    span,
                })
            }
            Tok::If => {
                self.bump();
                let mut arms = Vec::new();
                let cond = self.expr()?;
                self.expect(&Tok::Colon, "':'")?;
                self.expect(&Tok::Newline, "end of line")?;
                let body = self.block()?;
                let mut last_span = body.last().map(|s| s.span).unwrap_or(t.span());
                arms.push((cond, body));
                let mut else_body = None;
                loop {
                    match self.peek().tok {
                        Tok::Elif => {
                            self.bump();
                            let cond = self.expr()?;
                            self.expect(&Tok::Colon, "':'")?;
                            self.expect(&Tok::Newline, "end of line")?;
                            let body = self.block()?;
                            last_span = body.last().map(|s| s.span).unwrap_or(last_span);
                            arms.push((cond, body));
                        }
                        Tok::Else => {
                            self.bump();
                            self.expect(&Tok::Colon, "':'")?;
                            self.expect(&Tok::Newline, "end of line")?;
                            let body = self.block()?;
                            last_span = body.last().map(|s| s.span).unwrap_or(last_span);
                            else_body = Some(body);
                            break;
                        }
                        _ => break,
                    }
                }
                Ok(Stmt {
                    kind: StmtKind::IfChain { arms, else_body },
                    span: t.span().cover(last_span),
                })
            }
            Tok::Return => {
                self.bump();
                let value = if self.peek().tok == Tok::Newline {
                    None
                } else {
                    Some(self.expr()?)
                };
                self.expect(&Tok::Newline, "end of line")?;
                Ok(Stmt {
                    kind: StmtKind::Return(value),
                    span: t.span(),
                })
            }
            Tok::Break => {
                self.bump();
                if self.loop_depth == 0 {
                    return Err(self.syntax(&t, "break outside of a loop"));
                }
                self.expect(&Tok::Newline, "end of line")?;
                Ok(Stmt {
                    kind: StmtKind::Break,
                    span: t.span(),
                })
            }
            Tok::Pass => {
                self.bump();
                self.expect(&Tok::Newline, "end of line")?;
                Ok(Stmt {
                    kind: StmtKind::NoOp,
                    span: t.span(),
                })
            }
            Tok::Def => Err(self.unsupported(t.span(), "nested function definition")),
            Tok::Unsupported(kw) => {
                Err(self.unsupported(t.span(), format!("'{kw}' statement")))
            }
            _ => {
                // Assignment or expression statement.
                let expr = self.expr()?;
                if self.peek().tok == Tok::Assign {
                    let target = match &expr {
                        Expr::Ident(name) => name.clone(),
                        _ => {
                            let at = self.peek().clone();
                            return Err(self.syntax(&at, "assignment target must be a name"));
                        }
                    };
                    self.bump();
                    let value = self.expr()?;
                    let end = self.expect(&Tok::Newline, "end of line")?;
                    let span = SourceSpan::new(t.line, t.col, end.line, end.col);
                    return Ok(Stmt {
                        kind: StmtKind::Assign { target, value },
                        span,
                    });
                }
                let end = self.expect(&Tok::Newline, "end of line")?;
                let span = SourceSpan::new(t.line, t.col, end.line, end.col.max(t.col));
                // Dotted calls such as time.sleep(...) have no automaton
                // meaning; they parse straight to NoOp.
                let kind = match &expr {
                    Expr::Call(c) if c.callee.contains('.') => StmtKind::NoOp,
                    _ => StmtKind::ExprStmt(expr),
                };
                Ok(Stmt { kind, span })
            }
        }
    }

    fn expr(&mut self) -> Result<Expr, PlanError> {
        self.or_expr()
    }

    fn or_expr(&mut self) -> Result<Expr, PlanError> {
        let mut items = vec![self.and_expr()?];
        while self.peek().tok == Tok::Or {
            self.bump();
            items.push(self.and_expr()?);
        }
        Ok(if items.len() == 1 {
            items.pop().unwrap()
        } else {
            Expr::Or(items)
        })
    }

    fn and_expr(&mut self) -> Result<Expr, PlanError> {
        let mut items = vec![self.not_expr()?];
        while self.peek().tok == Tok::And {
            self.bump();
            items.push(self.not_expr()?);
        }
        Ok(if items.len() == 1 {
            items.pop().unwrap()
        } else {
            Expr::And(items)
        })
    }

    fn not_expr(&mut self) -> Result<Expr, PlanError> {
        if self.peek().tok == Tok::Not {
            self.bump();
            return Ok(Expr::Not(Box::new(self.not_expr()?)));
        }
        self.comparison()
    }

    fn comparison(&mut self) -> Result<Expr, PlanError> {
        let lhs = self.atom()?;
        if let Tok::Cmp(op) = self.peek().tok {
            self.bump();
            let rhs = self.atom()?;
            let op = match op {
                "==" => CmpOp::Eq,
                "!=" => CmpOp::Ne,
                "<" => CmpOp::Lt,
                "<=" => CmpOp::Le,
                ">" => CmpOp::Gt,
                _ => CmpOp::Ge,
            };
            return Ok(Expr::Compare {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
            });
        }
        Ok(lhs)
    }

    fn atom(&mut self) -> Result<Expr, PlanError> {
        let t = self.bump();
        match &t.tok {
            Tok::LParen => {
                let inner = self.expr()?;
                self.expect(&Tok::RParen, "')'")?;
                Ok(inner)
            }
            Tok::Str(s) => Ok(Expr::Str(s.clone())),
            Tok::Num(n) => Ok(Expr::Num(n.clone())),
            Tok::True => Ok(Expr::Bool(true)),
            Tok::False => Ok(Expr::Bool(false)),
            Tok::Ident(first) => {
                let mut name = first.clone();
                let mut end = t.clone();
                while self.peek().tok == Tok::Dot {
                    self.bump();
                    let part = self.bump();
                    match &part.tok {
                        Tok::Ident(p) => {
                            name.push('.');
                            name.push_str(p);
                            end = part;
                        }
                        _ => return Err(self.syntax(&part, "expected a name after '.'")),
                    }
                }
                if self.peek().tok == Tok::LParen {
                    self.bump();
                    let mut args = Vec::new();
                    if self.peek().tok != Tok::RParen {
                        loop {
                            args.push(self.expr()?);
                            if self.peek().tok == Tok::Comma {
                                self.bump();
                            } else {
                                break;
                            }
                        }
                    }
                    let close = self.expect(&Tok::RParen, "')'")?;
                    let span = SourceSpan::new(t.line, t.col, close.line, close.end_col);
                    return Ok(Expr::Call(CallExpr {
                        callee: name,
                        args,
                        span,
                    }));
                }
                let _ = end;
                Ok(Expr::Ident(name))
            }
            Tok::Unsupported(kw) => {
                Err(self.unsupported(t.span(), format!("'{kw}' expression")))
            }
            other => Err(self.syntax(&t, format!("expected an expression, found {other:?}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_plan_is_a_noop_body() {
        let plan = parse_plan("def f():\n    pass\n").unwrap();
        assert_eq!(plan.name, "f");
        assert_eq!(plan.body.len(), 1);
        assert!(matches!(plan.body[0].kind, StmtKind::NoOp));
    }

    #[test]
    fn while_true_with_if_else() {
        let text = "def turn_right_90_degrees_2():\n    while True:\n        if pedestrian_observed():\n            stop()\n        else:\n            velocity_publisher(linear, angular)\n";
        let plan = parse_plan(text).unwrap();
        let StmtKind::While { cond, body } = &plan.body[0].kind else {
            panic!("expected while");
        };
        assert_eq!(cond, &Expr::Bool(true));
        let StmtKind::IfChain { arms, else_body } = &body[0].kind else {
            panic!("expected if");
        };
        assert_eq!(arms.len(), 1);
        assert!(else_body.is_some());
    }

    #[test]
    fn comparison_parses() {
        let text = "def f():\n    if response == \"Yes\":\n        break\n";
        // break outside loop rejected; wrap in while.
        assert!(parse_plan(text).is_err());
        let text = "def f():\n    while True:\n        if response == \"Yes\":\n            break\n";
        let plan = parse_plan(text).unwrap();
        let StmtKind::While { body, .. } = &plan.body[0].kind else {
            panic!()
        };
        let StmtKind::IfChain { arms, .. } = &body[0].kind else {
            panic!()
        };
        assert!(matches!(arms[0].0, Expr::Compare { op: CmpOp::Eq, .. }));
    }

    #[test]
    fn time_sleep_parses_to_noop() {
        let plan = parse_plan("def f():\n    time.sleep(1)\n").unwrap();
        assert!(matches!(plan.body[0].kind, StmtKind::NoOp));
    }

    #[test]
    fn nested_def_is_unsupported() {
        let e = parse_plan("def f():\n    def g():\n        pass\n").unwrap_err();
        assert!(matches!(e, PlanError::UnsupportedConstruct { .. }));
    }

    #[test]
    fn for_loop_is_unsupported() {
        let e = parse_plan("def f():\n    for x in y:\n        pass\n").unwrap_err();
        assert!(matches!(e, PlanError::UnsupportedConstruct { .. }));
    }

    #[test]
    fn syntax_error_carries_position() {
        let e = parse_plan("def f():\n    if :\n        pass\n").unwrap_err();
        match e {
            PlanError::Syntax { line, col, .. } => {
                assert_eq!(line, 2);
                assert!(col >= 8);
            }
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn elif_normalizes_into_arms() {
        let text = "def f():\n    if a():\n        x()\n    elif b():\n        y()\n    else:\n        z()\n";
        let plan = parse_plan(text).unwrap();
        let StmtKind::IfChain { arms, else_body } = &plan.body[0].kind else {
            panic!()
        };
        assert_eq!(arms.len(), 2);
        assert!(else_body.is_some());
    }
}
