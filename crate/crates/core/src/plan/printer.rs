//! Pretty-printer; `parse(print(ast))` equals `ast` up to spans.

use super::ast::{CallExpr, Expr, Plan, Stmt, StmtKind};

pub fn print_plan(plan: &Plan) -> String {
    let mut out = String::new();
    out.push_str(&format!("def {}({}):\n", plan.name, plan.params.join(", ")));
    print_block(&plan.body, 1, &mut out);
    out
}

fn indent(depth: usize, out: &mut String) {
    for _ in 0..depth {
        out.push_str("    ");
    }
}

fn print_block(stmts: &[Stmt], depth: usize, out: &mut String) {
    for stmt in stmts {
        print_stmt(stmt, depth, out);
    }
}

fn print_stmt(stmt: &Stmt, depth: usize, out: &mut String) {
    match &stmt.kind {
        StmtKind::While { cond, body } => {
            indent(depth, out);
            out.push_str(&format!("while {}:\n", print_expr(cond, 0)));
            print_block(body, depth + 1, out);
        }
        StmtKind::IfChain { arms, else_body } => {
            for (i, (cond, body)) in arms.iter().enumerate() {
                indent(depth, out);
                let kw = if i == 0 { "if" } else { "elif" };
                out.push_str(&format!("{kw} {}:\n", print_expr(cond, 0)));
                print_block(body, depth + 1, out);
            }
            if let Some(body) = else_body {
                indent(depth, out);
                out.push_str("else:\n");
                print_block(body, depth + 1, out);
            }
        }
        StmtKind::ExprStmt(e) => {
            indent(depth, out);
            out.push_str(&print_expr(e, 0));
            out.push('\n');
        }
        StmtKind::Assign { target, value } => {
            indent(depth, out);
            out.push_str(&format!("{target} = {}\n", print_expr(value, 0)));
        }
        StmtKind::Return(value) => {
            indent(depth, out);
            match value {
                Some(e) => out.push_str(&format!("return {}\n", print_expr(e, 0))),
                None => out.push_str("return\n"),
            }
        }
        StmtKind::Break => {
            indent(depth, out);
            out.push_str("break\n");
        }
        StmtKind::NoOp => {
            indent(depth, out);
            out.push_str("pass\n");
        }
    }
}

// Precedence: or=1, and=2, not=3, comparison=4, atom=5.
fn print_expr(e: &Expr, parent: u8) -> String {
    let (text, prec) = match e {
        Expr::Or(items) => (
            items
                .iter()
                .map(|i| print_expr(i, 2))
                .collect::<Vec<_>>()
                .join(" or "),
            1,
        ),
        Expr::And(items) => (
            items
                .iter()
                .map(|i| print_expr(i, 3))
                .collect::<Vec<_>>()
                .join(" and "),
            2,
        ),
        Expr::Not(inner) => (format!("not {}", print_expr(inner, 3)), 3),
        Expr::Compare { op, lhs, rhs } => (
            format!(
                "{} {} {}",
                print_expr(lhs, 5),
                op.as_str(),
                print_expr(rhs, 5)
            ),
            4,
        ),
        Expr::Call(CallExpr { callee, args, .. }) => (
            format!(
                "{callee}({})",
                args.iter()
                    .map(|a| print_expr(a, 0))
                    .collect::<Vec<_>>()
                    .join(", ")
            ),
            5,
        ),
        Expr::Str(s) => (
            format!(
                "\"{}\"",
                s.replace('\\', "\\\\").replace('"', "\\\"").replace('\n', "\\n")
            ),
            5,
        ),
        Expr::Num(n) => (n.clone(), 5),
        Expr::Bool(b) => ((if *b { "True" } else { "False" }).to_string(), 5),
        Expr::Ident(name) => (name.clone(), 5),
    };
    if prec < parent {
        format!("({text})")
    } else {
        text
    }
}
