//! Resolves a parsed plan against a system: condition calls become sensor
//! propositions, statement calls become execution propositions, everything
//! unresolvable becomes an unknown (compiled later as a nondeterministic
//! branch) or a no-op. Resolution never fails; unknowns are represented,
//! not rejected.

use log::warn;

use super::ast::{CallExpr, Expr, Plan, Stmt, StmtKind};
use crate::props::{Prop, PropKind};
use crate::span::SourceSpan;
use crate::system::{CallArg, MapOutcome, SystemSpec};

/// Condition tree over resolved sensor propositions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CondExpr {
    ConstTrue,
    ConstFalse,
    /// A condition call resolved to a sensor proposition.
    MappedCall(Prop),
    /// Comparison, variable, unmapped call: the verifier considers both
    /// outcomes.
    UnknownAtom,
    Not(Box<CondExpr>),
    And(Vec<CondExpr>),
    Or(Vec<CondExpr>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedPlan {
    pub name: String,
    pub body: Vec<RStmt>,
    pub warnings: Vec<ResolveWarning>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RStmt {
    /// Mapped execution call; becomes a labeled automaton state.
    Exec { prop: Prop, span: SourceSpan },
    /// Statement with no automaton meaning.
    Noop { span: SourceSpan },
    While {
        cond: CondExpr,
        body: Vec<RStmt>,
        span: SourceSpan,
    },
    If {
        arms: Vec<(CondExpr, Vec<RStmt>)>,
        else_body: Option<Vec<RStmt>>,
        span: SourceSpan,
    },
    Return { span: SourceSpan },
    Break { span: SourceSpan },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResolveWarning {
    pub span: SourceSpan,
    pub message: String,
}

/// Rewrites conditions to `CondExpr` and classifies statement calls.
pub fn resolve_plan(plan: &Plan, system: &SystemSpec) -> ResolvedPlan {
    let mut warnings = Vec::new();
    let body = resolve_block(&plan.body, system, &mut warnings);
    ResolvedPlan {
        name: plan.name.clone(),
        body,
        warnings,
    }
}

fn resolve_block(
    stmts: &[Stmt],
    system: &SystemSpec,
    warnings: &mut Vec<ResolveWarning>,
) -> Vec<RStmt> {
    stmts
        .iter()
        .map(|s| resolve_stmt(s, system, warnings))
        .collect()
}

fn resolve_stmt(stmt: &Stmt, system: &SystemSpec, warnings: &mut Vec<ResolveWarning>) -> RStmt {
    let span = stmt.span;
    match &stmt.kind {
        StmtKind::While { cond, body } => RStmt::While {
            cond: resolve_cond(cond, system, warnings),
            body: resolve_block(body, system, warnings),
            span,
        },
        StmtKind::IfChain { arms, else_body } => RStmt::If {
            arms: arms
                .iter()
                .map(|(c, b)| {
                    (
                        resolve_cond(c, system, warnings),
                        resolve_block(b, system, warnings),
                    )
                })
                .collect(),
            else_body: else_body
                .as_ref()
                .map(|b| resolve_block(b, system, warnings)),
            span,
        },
        StmtKind::ExprStmt(Expr::Call(call)) => resolve_stmt_call(call, system, warnings),
        StmtKind::ExprStmt(_) => RStmt::Noop { span },
        // An assignment whose right-hand side is a mapped execution call
        // still performs the action (`response = ask(...)`).
        StmtKind::Assign {
            value: Expr::Call(call),
            ..
        } => resolve_stmt_call(call, system, warnings),
        StmtKind::Assign { .. } => RStmt::Noop { span },
        StmtKind::Return(_) => RStmt::Return { span },
        StmtKind::Break => RStmt::Break { span },
        StmtKind::NoOp => RStmt::Noop { span },
    }
}

fn resolve_stmt_call(
    call: &CallExpr,
    system: &SystemSpec,
    warnings: &mut Vec<ResolveWarning>,
) -> RStmt {
    let span = call.span;
    match lookup(call, system) {
        Some(prop) => match system.prop_kind(&prop) {
            Some(PropKind::Exec) => RStmt::Exec { prop, span },
            // A bare sensor read has no effect.
            _ => RStmt::Noop { span },
        },
        None => {
            if system.function(&call.callee).is_none() && !call.callee.contains('.') {
                let w = ResolveWarning {
                    span,
                    message: format!(
                        "call to {}() does not map to any proposition; treated as a no-op",
                        call.callee
                    ),
                };
                warn!("{} at {}", w.message, w.span);
                warnings.push(w);
            }
            RStmt::Noop { span }
        }
    }
}

fn resolve_cond(
    expr: &Expr,
    system: &SystemSpec,
    warnings: &mut Vec<ResolveWarning>,
) -> CondExpr {
    match expr {
        Expr::Bool(true) => CondExpr::ConstTrue,
        Expr::Bool(false) => CondExpr::ConstFalse,
        Expr::Not(inner) => CondExpr::Not(Box::new(resolve_cond(inner, system, warnings))),
        Expr::And(items) => CondExpr::And(
            items
                .iter()
                .map(|e| resolve_cond(e, system, warnings))
                .collect(),
        ),
        Expr::Or(items) => CondExpr::Or(
            items
                .iter()
                .map(|e| resolve_cond(e, system, warnings))
                .collect(),
        ),
        Expr::Call(call) => match lookup(call, system) {
            Some(prop) if system.prop_kind(&prop) == Some(PropKind::Sensor) => {
                CondExpr::MappedCall(prop)
            }
            Some(prop) => {
                let w = ResolveWarning {
                    span: call.span,
                    message: format!(
                        "execution proposition {:?} used in a condition; treated as unknown",
                        prop.as_str()
                    ),
                };
                warn!("{} at {}", w.message, w.span);
                warnings.push(w);
                CondExpr::UnknownAtom
            }
            None => CondExpr::UnknownAtom,
        },
        // Comparisons and plain values cannot be sensed.
        Expr::Compare { .. } | Expr::Str(_) | Expr::Num(_) | Expr::Ident(_) => {
            CondExpr::UnknownAtom
        }
    }
}

/// Maps a call site, converting arguments to literal-or-unknown. Ambiguity
/// (possible only when unknown arguments defeat the config's pattern
/// validation) degrades to unknown rather than guessing.
fn lookup(call: &CallExpr, system: &SystemSpec) -> Option<Prop> {
    let args: Vec<CallArg> = call
        .args
        .iter()
        .map(|a| match a {
            Expr::Str(s) => CallArg::Literal(s.clone()),
            Expr::Num(n) => CallArg::Literal(n.clone()),
            Expr::Bool(b) => CallArg::Literal(if *b { "True" } else { "False" }.to_string()),
            _ => CallArg::Unknown,
        })
        .collect();
    match system.map_call(&call.callee, &args) {
        Ok(MapOutcome::Mapped(p)) => Some(p),
        Ok(MapOutcome::NotMapped) => None,
        Err(e) => {
            warn!("{e}; treating call as unknown");
            None
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plan::parser::parse_plan;
    use crate::system::SystemSpec;

    fn codebotler() -> SystemSpec {
        SystemSpec::from_json(
            r#"{
              "functions": [
                {"name": "is_in_room", "kind": "subscribing", "doc": ""},
                {"name": "get_current_location", "kind": "subscribing", "doc": ""},
                {"name": "ask", "kind": "execution", "doc": ""},
                {"name": "go_to", "kind": "execution", "doc": ""}
              ],
              "propositions": [
                {"name": "person", "kind": "sensor"},
                {"name": "backpack", "kind": "sensor"},
                {"name": "ask", "kind": "exec"},
                {"name": "go", "kind": "exec"}
              ],
              "mappings": [
                {"function": "is_in_room", "args": ["person"], "prop": "person"},
                {"function": "is_in_room", "args": ["backpack"], "prop": "backpack"},
                {"function": "ask", "args": ["*"], "prop": "ask"},
                {"function": "go_to", "args": ["*"], "prop": "go"}
              ],
              "specs": []
            }"#,
        )
        .unwrap()
    }

    #[test]
    fn conjunction_of_sensor_calls() {
        let plan = parse_plan(
            "def f():\n    if is_in_room(\"backpack\") and is_in_room(\"person\"):\n        ask(\"x\")\n",
        )
        .unwrap();
        let resolved = resolve_plan(&plan, &codebotler());
        let RStmt::If { arms, .. } = &resolved.body[0] else {
            panic!()
        };
        assert_eq!(
            arms[0].0,
            CondExpr::And(vec![
                CondExpr::MappedCall(Prop::new("backpack")),
                CondExpr::MappedCall(Prop::new("person")),
            ])
        );
    }

    #[test]
    fn constants_resolve_directly() {
        let plan = parse_plan("def f():\n    while True:\n        ask(\"x\")\n").unwrap();
        let resolved = resolve_plan(&plan, &codebotler());
        let RStmt::While { cond, .. } = &resolved.body[0] else {
            panic!()
        };
        assert_eq!(cond, &CondExpr::ConstTrue);
    }

    #[test]
    fn comparison_becomes_unknown() {
        let plan = parse_plan(
            "def f():\n    while True:\n        if response == \"Yes\":\n            break\n",
        )
        .unwrap();
        let resolved = resolve_plan(&plan, &codebotler());
        let RStmt::While { body, .. } = &resolved.body[0] else {
            panic!()
        };
        let RStmt::If { arms, .. } = &body[0] else {
            panic!()
        };
        assert_eq!(arms[0].0, CondExpr::UnknownAtom);
    }

    #[test]
    fn assignment_of_exec_call_executes() {
        let plan = parse_plan("def f():\n    response = ask(\"Could you?\")\n").unwrap();
        let resolved = resolve_plan(&plan, &codebotler());
        assert!(matches!(
            &resolved.body[0],
            RStmt::Exec { prop, .. } if prop.as_str() == "ask"
        ));
    }

    #[test]
    fn unmapped_assignment_is_noop() {
        let plan = parse_plan("def f():\n    start_loc = get_current_location()\n").unwrap();
        let resolved = resolve_plan(&plan, &codebotler());
        assert!(matches!(&resolved.body[0], RStmt::Noop { .. }));
    }

    #[test]
    fn unknown_statement_call_warns() {
        let plan = parse_plan("def f():\n    helper()\n").unwrap();
        let resolved = resolve_plan(&plan, &codebotler());
        assert!(matches!(&resolved.body[0], RStmt::Noop { .. }));
        assert_eq!(resolved.warnings.len(), 1);
    }
}
