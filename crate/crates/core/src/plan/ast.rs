//! Syntax tree of an executable plan.

use crate::span::SourceSpan;

/// A parsed plan: exactly one top-level function definition.
#[derive(Debug, Clone, PartialEq)]
pub struct Plan {
    pub name: String,
    pub params: Vec<String>,
    pub body: Vec<Stmt>,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stmt {
    pub kind: StmtKind,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StmtKind {
    While {
        cond: Expr,
        body: Vec<Stmt>,
    },
    /// `if`/`elif` arms plus optional `else`; `elif` chains normalize into
    /// additional arms.
    IfChain {
        arms: Vec<(Expr, Vec<Stmt>)>,
        else_body: Option<Vec<Stmt>>,
    },
    /// Expression statement; relevant when the expression is a call.
    ExprStmt(Expr),
    Assign {
        target: String,
        value: Expr,
    },
    Return(Option<Expr>),
    Break,
    /// `pass`, `time.sleep(...)` and other statements with no automaton
    /// meaning.
    NoOp,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CallExpr {
    /// Possibly dotted callee name (`time.sleep`).
    pub callee: String,
    pub args: Vec<Expr>,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Call(CallExpr),
    Str(String),
    /// Numeric literal kept as written.
    Num(String),
    Bool(bool),
    Ident(String),
    Not(Box<Expr>),
    And(Vec<Expr>),
    Or(Vec<Expr>),
    Compare {
        op: CmpOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn as_str(self) -> &'static str {
        match self {
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }
}

impl Plan {
    /// Copy with all spans zeroed; spans are locations, not structure, so
    /// round-trip comparisons go through this.
    pub fn strip_spans(&self) -> Plan {
        let zero = SourceSpan::point(1, 1);
        Plan {
            name: self.name.clone(),
            params: self.params.clone(),
            body: self.body.iter().map(|s| strip_stmt(s, zero)).collect(),
            span: zero,
        }
    }
}

fn strip_stmt(s: &Stmt, zero: SourceSpan) -> Stmt {
    let kind = match &s.kind {
        StmtKind::While { cond, body } => StmtKind::While {
            cond: strip_expr(cond, zero),
            body: body.iter().map(|s| strip_stmt(s, zero)).collect(),
        },
        StmtKind::IfChain { arms, else_body } => StmtKind::IfChain {
            arms: arms
                .iter()
                .map(|(c, b)| {
                    (
                        strip_expr(c, zero),
                        b.iter().map(|s| strip_stmt(s, zero)).collect(),
                    )
                })
                .collect(),
            else_body: else_body
                .as_ref()
                .map(|b| b.iter().map(|s| strip_stmt(s, zero)).collect()),
        },
        StmtKind::ExprStmt(e) => StmtKind::ExprStmt(strip_expr(e, zero)),
        StmtKind::Assign { target, value } => StmtKind::Assign {
            target: target.clone(),
            value: strip_expr(value, zero),
        },
        StmtKind::Return(e) => StmtKind::Return(e.as_ref().map(|e| strip_expr(e, zero))),
        StmtKind::Break => StmtKind::Break,
        StmtKind::NoOp => StmtKind::NoOp,
    };
    Stmt { kind, span: zero }
}

fn strip_expr(e: &Expr, zero: SourceSpan) -> Expr {
    match e {
        Expr::Call(c) => Expr::Call(CallExpr {
            callee: c.callee.clone(),
            args: c.args.iter().map(|a| strip_expr(a, zero)).collect(),
            span: zero,
        }),
        Expr::Not(inner) => Expr::Not(Box::new(strip_expr(inner, zero))),
        Expr::And(items) => Expr::And(items.iter().map(|a| strip_expr(a, zero)).collect()),
        Expr::Or(items) => Expr::Or(items.iter().map(|a| strip_expr(a, zero)).collect()),
        Expr::Compare { op, lhs, rhs } => Expr::Compare {
            op: *op,
            lhs: Box::new(strip_expr(lhs, zero)),
            rhs: Box::new(strip_expr(rhs, zero)),
        },
        other => other.clone(),
    }
}
