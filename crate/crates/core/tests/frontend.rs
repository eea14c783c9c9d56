//! Plan-frontend integration: the fixture corpus parses in full, spans stay
//! inside the source, and printing then reparsing is the identity on the
//! tree.

mod common;

use common::{fixture, system};
use plancheck::plan::ast::{Expr, Plan, Stmt, StmtKind};
use plancheck::plan::{parse_plan, print_plan, resolve_plan, CondExpr, RStmt};
use proptest::prelude::*;

const CORPUS: &[&str] = &[
    "turn_right_90_degrees_1.plan",
    "turn_right_90_degrees_2.plan",
    "bring_backpack_1.plan",
    "bring_backpack_2.plan",
    "bring_backpack_1_core.plan",
    "bring_backpack_2_core.plan",
    "drive_straight.plan",
    "turn_left.plan",
    "turn_right.plan",
    "u_turn.plan",
    "robot_dog_patrol.plan",
    "robot_dog_search.plan",
    "robot_dog_unsafe_navigate.plan",
    "robot_dog_unsafe_signal.plan",
];

#[test]
fn corpus_parses_in_full() {
    for name in CORPUS {
        let text = fixture(&format!("plans/{name}"));
        parse_plan(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
    }
}

#[test]
fn corpus_roundtrips_through_printer() {
    for name in CORPUS {
        let text = fixture(&format!("plans/{name}"));
        let plan = parse_plan(&text).unwrap();
        let back = parse_plan(&print_plan(&plan)).unwrap();
        assert_eq!(back.strip_spans(), plan.strip_spans(), "{name}");
    }
}

fn check_spans(plan: &Plan, text: &str) {
    let lines: Vec<&str> = text.lines().collect();
    fn walk(stmts: &[Stmt], lines: &[&str]) {
        for stmt in stmts {
            let span = stmt.span;
            assert!(span.start_line >= 1 && span.end_line as usize <= lines.len());
            assert!((span.start_line, span.start_col) <= (span.end_line, span.end_col));
            let line = lines[(span.start_line - 1) as usize];
            assert!(
                (span.start_col as usize) <= line.len() + 1,
                "span {span} starts past the end of {line:?}"
            );
            match &stmt.kind {
                StmtKind::While { body, .. } => walk(body, lines),
                StmtKind::IfChain { arms, else_body } => {
                    for (_, b) in arms {
                        walk(b, lines);
                    }
                    if let Some(b) = else_body {
                        walk(b, lines);
                    }
                }
                _ => {}
            }
        }
    }
    walk(&plan.body, &lines);
}

#[test]
fn corpus_spans_stay_in_bounds() {
    for name in CORPUS {
        let text = fixture(&format!("plans/{name}"));
        let plan = parse_plan(&text).unwrap();
        check_spans(&plan, &text);
    }
}

#[test]
fn turn_right_2_has_the_expected_shape() {
    let plan = parse_plan(&fixture("plans/turn_right_90_degrees_2.plan")).unwrap();
    // Assignments, then a while-true around a pedestrian if/else.
    let StmtKind::While { cond, body } = &plan.body.last().unwrap().kind else {
        panic!("expected trailing while");
    };
    assert_eq!(cond, &Expr::Bool(true));
    let StmtKind::IfChain { arms, else_body } = &body[0].kind else {
        panic!("expected if");
    };
    assert!(matches!(&arms[0].0, Expr::Call(c) if c.callee == "pedestrian_observed"));
    assert!(else_body.is_some());
}

#[test]
fn bring_backpack_1_comparison_resolves_to_unknown() {
    let plan = parse_plan(&fixture("plans/bring_backpack_1.plan")).unwrap();
    let resolved = resolve_plan(&plan, &system("codebotler"));
    // Find the innermost if over the comparison.
    fn find_unknown_if(stmts: &[RStmt]) -> bool {
        stmts.iter().any(|s| match s {
            RStmt::If { arms, .. } => {
                arms.iter().any(|(c, body)| {
                    *c == CondExpr::UnknownAtom || find_unknown_if(body)
                })
            }
            RStmt::While { body, .. } => find_unknown_if(body),
            _ => false,
        })
    }
    assert!(find_unknown_if(&resolved.body));
}

#[test]
fn backpack_and_person_condition_resolves_to_conjunction() {
    let plan = parse_plan(&fixture("plans/bring_backpack_2_core.plan")).unwrap();
    let resolved = resolve_plan(&plan, &system("codebotler"));
    let RStmt::If { arms, .. } = &resolved.body[0] else {
        panic!("expected if");
    };
    assert_eq!(
        arms[0].0,
        CondExpr::And(vec![
            CondExpr::MappedCall(plancheck::Prop::new("backpack")),
            CondExpr::MappedCall(plancheck::Prop::new("person")),
        ])
    );
}

// Random-plan round-trip: parse(print(ast)) == ast up to spans.

fn arb_ident() -> impl Strategy<Value = String> {
    prop::sample::select(vec![
        "go", "stop", "sense", "ask", "value", "flag", "x", "helper",
    ])
    .prop_map(str::to_string)
}

fn arb_leaf_expr() -> impl Strategy<Value = Expr> {
    prop_oneof![
        arb_ident().prop_map(Expr::Ident),
        prop::sample::select(vec!["0", "1", "0.5", "-1.2"])
            .prop_map(|n| Expr::Num(n.to_string())),
        prop::sample::select(vec!["yes", "a b", ""]).prop_map(|s| Expr::Str(s.to_string())),
        Just(Expr::Bool(true)),
        Just(Expr::Bool(false)),
        (arb_ident(), prop::collection::vec(arb_ident().prop_map(Expr::Ident), 0..3)).prop_map(
            |(callee, args)| Expr::Call(plancheck::plan::CallExpr {
                callee,
                args,
                span: plancheck::SourceSpan::point(1, 1),
            })
        ),
    ]
}

fn arb_expr() -> impl Strategy<Value = Expr> {
    arb_leaf_expr().prop_recursive(3, 16, 3, |inner| {
        prop_oneof![
            inner.clone().prop_map(|e| Expr::Not(Box::new(e))),
            prop::collection::vec(inner.clone(), 2..4).prop_map(Expr::And),
            prop::collection::vec(inner.clone(), 2..4).prop_map(Expr::Or),
            (inner.clone(), inner).prop_map(|(a, b)| Expr::Compare {
                op: plancheck::plan::CmpOp::Eq,
                lhs: Box::new(a),
                rhs: Box::new(b),
            }),
        ]
    })
}

fn arb_stmt(depth: u32) -> BoxedStrategy<Stmt> {
    let span = plancheck::SourceSpan::point(1, 1);
    let leaf = prop_oneof![
        arb_expr().prop_map(move |e| Stmt {
            kind: match &e {
                Expr::Call(c) if c.callee.contains('.') => StmtKind::NoOp,
                _ => StmtKind::ExprStmt(e),
            },
            span,
        }),
        (arb_ident(), arb_expr()).prop_map(move |(target, value)| Stmt {
            kind: StmtKind::Assign { target, value },
            span,
        }),
        Just(Stmt {
            kind: StmtKind::NoOp,
            span,
        }),
        Just(Stmt {
            kind: StmtKind::Return(None),
            span,
        }),
    ];
    if depth == 0 {
        return leaf.boxed();
    }
    let body = prop::collection::vec(arb_stmt(depth - 1), 1..3);
    prop_oneof![
        leaf,
        (arb_expr(), prop::collection::vec(arb_stmt(depth - 1), 1..3)).prop_map(
            move |(cond, body)| Stmt {
                kind: StmtKind::While { cond, body },
                span,
            }
        ),
        (
            arb_expr(),
            body.clone(),
            prop::option::of(prop::collection::vec(arb_stmt(depth - 1), 1..3))
        )
            .prop_map(move |(c, b, else_body)| Stmt {
                kind: StmtKind::IfChain {
                    arms: vec![(c, b)],
                    else_body,
                },
                span,
            }),
    ]
    .boxed()
}

/// `break` only occurs inside loops, so the generator never emits it at the
/// top level; returns are allowed anywhere.
fn arb_plan() -> impl Strategy<Value = Plan> {
    prop::collection::vec(arb_stmt(2), 1..4).prop_map(|body| Plan {
        name: "generated".to_string(),
        params: vec![],
        body,
        span: plancheck::SourceSpan::point(1, 1),
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]
    #[test]
    fn printed_plans_reparse_to_the_same_tree(plan in arb_plan()) {
        let printed = print_plan(&plan);
        let back = parse_plan(&printed)
            .unwrap_or_else(|e| panic!("printed plan failed to parse: {e}\n{printed}"));
        prop_assert_eq!(back.strip_spans(), plan.strip_spans());
    }
}
