//! Plan-language frontend: lexer, parser, printer and condition resolution.
//!
//! The language is an indentation-delimited imperative subset: one top-level
//! `def`, `while`, `if`/`elif`/`else`, calls, assignments, `return`,
//! `break`, `pass`, boolean operators and comparisons. The grammar is
//! documented with an EBNF in `docs/plan-language.md`.

pub mod ast;
mod lexer;
pub mod parser;
pub mod printer;
pub mod resolve;

pub use ast::{CallExpr, CmpOp, Expr, Plan, Stmt, StmtKind};
pub use parser::{parse_plan, PlanError};
pub use printer::print_plan;
pub use resolve::{resolve_plan, CondExpr, RStmt, ResolveWarning, ResolvedPlan};
