//! Compiles a resolved plan into a finite-state automaton.
//!
//! Each mapped execution call becomes a fresh state labeled with its
//! proposition; control statements attach guarded edges. The wiring rules:
//!
//! - A block threads a set of pending `(state, guard)` sources; a call
//!   state is entered from every pending source under its guard.
//! - An `if` tests at the current state when it is the last statement of
//!   its block and the single pending source is an unlabeled state reached
//!   under `true`; otherwise it gets a fresh decision state. Without an
//!   `else`, the negated condition falls through to the successor.
//! - A `while` reuses the current state as loop head under the same
//!   single-unlabeled-source condition (no last-statement requirement).
//!   A body that is a plain chain of calls re-tests the condition directly
//!   from the last call state; a compound body returns to the loop head.
//! - The top level seals the automaton: remaining pending sources and
//!   `return` exits loop back to the initial state (restart semantics),
//!   so every complete pass restarts the plan and traces are infinite.
//!
//! Conditions containing unknowns compile to nondeterministic branches:
//! each arm's guard is the condition with unknowns eliminated
//! existentially, so both arms stay reachable wherever the unknown could
//! decide.

use std::fmt;

use thiserror::Error;

use crate::fsa::{Fsa, StateId};
use crate::guard::Guard;
use crate::plan::resolve::{CondExpr, RStmt, ResolvedPlan};
use crate::props::Valuation;
use crate::span::SourceSpan;

#[derive(Debug, Clone, PartialEq)]
pub enum CompileWarning {
    /// `while True` whose body performs no execution call: the plan can
    /// spin forever without a visible action.
    UnguardedInfiniteLoop { span: SourceSpan },
}

impl fmt::Display for CompileWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CompileWarning::UnguardedInfiniteLoop { span } => {
                write!(f, "unguarded infinite loop without execution calls at {span}")
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct CompileOutput {
    pub fsa: Fsa,
    pub warnings: Vec<CompileWarning>,
}

/// Guard of a condition with unknown atoms eliminated existentially:
/// the result is satisfied wherever some unknown outcome satisfies the
/// condition. Exact for pure sensor conditions.
pub fn cond_guard(cond: &CondExpr, positive: bool) -> Guard {
    match cond {
        CondExpr::ConstTrue => {
            if positive {
                Guard::True
            } else {
                Guard::False
            }
        }
        CondExpr::ConstFalse => {
            if positive {
                Guard::False
            } else {
                Guard::True
            }
        }
        CondExpr::MappedCall(p) => {
            let g = Guard::Prop(p.clone());
            if positive {
                g
            } else {
                Guard::not(g)
            }
        }
        CondExpr::UnknownAtom => Guard::True,
        CondExpr::Not(inner) => cond_guard(inner, !positive),
        CondExpr::And(items) => {
            let parts: Vec<Guard> = items.iter().map(|c| cond_guard(c, positive)).collect();
            if positive {
                Guard::and(parts)
            } else {
                Guard::or(parts)
            }
        }
        CondExpr::Or(items) => {
            let parts: Vec<Guard> = items.iter().map(|c| cond_guard(c, positive)).collect();
            if positive {
                Guard::or(parts)
            } else {
                Guard::and(parts)
            }
        }
    }
}

fn cond_has_unknown(cond: &CondExpr) -> bool {
    match cond {
        CondExpr::UnknownAtom => true,
        CondExpr::Not(inner) => cond_has_unknown(inner),
        CondExpr::And(items) | CondExpr::Or(items) => items.iter().any(cond_has_unknown),
        _ => false,
    }
}

type Pending = Vec<(StateId, Guard)>;

struct Builder {
    fsa: Fsa,
    warnings: Vec<CompileWarning>,
    returns: Pending,
}

impl Builder {
    fn wire(&mut self, pending: &Pending, to: StateId) {
        for (s, g) in pending {
            if *g != Guard::False {
                self.fsa.add_transition(*s, g.clone(), to);
            }
        }
    }

    fn unlabeled(&self, s: StateId) -> bool {
        self.fsa.label(s).is_empty()
    }

    /// Picks (or creates) the state a condition is tested at.
    fn decision_state(&mut self, pending: Pending, may_reuse: bool) -> StateId {
        if may_reuse
            && pending.len() == 1
            && pending[0].1 == Guard::True
            && self.unlabeled(pending[0].0)
        {
            return pending[0].0;
        }
        let j = self.fsa.add_state(Valuation::new(), None);
        self.wire(&pending, j);
        j
    }

    fn compile_block(
        &mut self,
        stmts: &[RStmt],
        mut pending: Pending,
        top_level: bool,
        breaks: &mut Vec<Pending>,
    ) -> Pending {
        for (i, stmt) in stmts.iter().enumerate() {
            pending.retain(|(_, g)| *g != Guard::False);
            if pending.is_empty() {
                // Unreachable continuation (after return/break or a loop
                // without exits).
                break;
            }
            let is_last = i + 1 == stmts.len();
            pending = self.compile_stmt(stmt, pending, is_last, top_level, breaks);
        }
        pending
    }

    fn compile_stmt(
        &mut self,
        stmt: &RStmt,
        pending: Pending,
        is_last: bool,
        top_level: bool,
        breaks: &mut Vec<Pending>,
    ) -> Pending {
        match stmt {
            RStmt::Noop { .. } => pending,
            RStmt::Exec { prop, span } => {
                let s = self
                    .fsa
                    .add_state([prop.clone()].into_iter().collect(), Some(*span));
                self.wire(&pending, s);
                vec![(s, Guard::True)]
            }
            RStmt::Return { .. } => {
                self.returns.extend(pending);
                Vec::new()
            }
            RStmt::Break { .. } => {
                breaks
                    .last_mut()
                    .expect("break outside loop rejected by the parser")
                    .extend(pending);
                Vec::new()
            }
            RStmt::If {
                arms, else_body, ..
            } => {
                let d = self.decision_state(pending, is_last);
                let mut exits: Pending = Vec::new();
                let mut taken_neg = Guard::True;
                for (cond, body) in arms {
                    let arm_guard = Guard::and(vec![taken_neg.clone(), cond_guard(cond, true)]);
                    taken_neg = Guard::and(vec![taken_neg, cond_guard(cond, false)]);
                    if arm_guard == Guard::False {
                        continue;
                    }
                    let arm_exits =
                        self.compile_block(body, vec![(d, arm_guard)], false, breaks);
                    exits.extend(arm_exits);
                }
                match else_body {
                    Some(body) => {
                        if taken_neg != Guard::False {
                            let else_exits =
                                self.compile_block(body, vec![(d, taken_neg)], false, breaks);
                            exits.extend(else_exits);
                        }
                    }
                    None => {
                        if taken_neg != Guard::False {
                            exits.push((d, taken_neg));
                        }
                    }
                }
                exits
            }
            RStmt::While { cond, body, span } => {
                let head = self.decision_state(pending, true);
                let enter = cond_guard(cond, true);
                let exit = cond_guard(cond, false);

                if enter == Guard::False {
                    // Loop body can never run.
                    return vec![(head, exit)];
                }

                // The keyword-rule form re-tests the condition directly from
                // the last call state. That edge tests the environment of
                // the call step itself, which the entry guard already pins,
                // so it is only behavior-faithful when exiting the loop and
                // restarting the plan coincide: the loop is the entire
                // top-level body. Everywhere else the body returns to the
                // loop head, which re-decides at an unconstrained instant.
                let template_position = top_level && is_last && head == self.fsa.initial;
                if template_position && !cond_has_unknown(cond) {
                    if let Some(calls) = plain_call_chain(body) {
                        let mut states = Vec::with_capacity(calls.len());
                        for (prop, span) in &calls {
                            let s = self
                                .fsa
                                .add_state([prop.clone()].into_iter().collect(), Some(*span));
                            states.push(s);
                        }
                        self.fsa.add_transition(head, enter.clone(), states[0]);
                        for w in states.windows(2) {
                            self.fsa.add_transition(w[0], Guard::True, w[1]);
                        }
                        let last = *states.last().unwrap();
                        self.fsa.add_transition(last, enter, states[0]);
                        let mut exits = Vec::new();
                        if exit != Guard::False {
                            exits.push((head, exit.clone()));
                            exits.push((last, exit));
                        }
                        return exits;
                    }
                }

                let states_before = self.fsa.state_count();
                let returns_before = self.returns.len();
                breaks.push(Vec::new());
                let body_exits = self.compile_block(body, vec![(head, enter)], false, breaks);
                let break_exits = breaks.pop().unwrap();
                for (s, g) in &body_exits {
                    if *g != Guard::False {
                        self.fsa.add_transition(*s, g.clone(), head);
                    }
                }

                let body_has_exec = (states_before..self.fsa.state_count())
                    .any(|s| !self.fsa.label(StateId(s)).is_empty());
                let body_has_return = self.returns.len() > returns_before;
                if exit == Guard::False
                    && break_exits.is_empty()
                    && !body_has_return
                    && !body_has_exec
                {
                    self.warnings
                        .push(CompileWarning::UnguardedInfiniteLoop { span: *span });
                }

                let mut exits = break_exits;
                if exit != Guard::False {
                    exits.push((head, exit));
                }
                exits
            }
        }
    }
}

/// Execution calls of a body consisting solely of calls and no-ops;
/// `None` when the body has control flow or no call at all.
fn plain_call_chain(body: &[RStmt]) -> Option<Vec<(crate::props::Prop, SourceSpan)>> {
    let mut calls = Vec::new();
    for stmt in body {
        match stmt {
            RStmt::Exec { prop, span } => calls.push((prop.clone(), *span)),
            RStmt::Noop { .. } => {}
            _ => return None,
        }
    }
    if calls.is_empty() {
        None
    } else {
        Some(calls)
    }
}

/// Compiles a resolved plan into an automaton. Deterministic: identical
/// input yields identical state numbering.
pub fn tree2fsa(plan: &ResolvedPlan) -> CompileOutput {
    let mut b = Builder {
        fsa: Fsa::new(),
        warnings: Vec::new(),
        returns: Vec::new(),
    };
    let initial = b.fsa.initial;
    let mut breaks = Vec::new();
    let final_pending =
        b.compile_block(&plan.body, vec![(initial, Guard::True)], true, &mut breaks);
    debug_assert!(breaks.is_empty());

    let mut seal: Pending = final_pending;
    let returns = std::mem::take(&mut b.returns);
    seal.extend(returns);
    let mut exits: Vec<StateId> = Vec::new();
    for (s, g) in &seal {
        if *g != Guard::False {
            b.fsa.add_transition(*s, g.clone(), initial);
            exits.push(*s);
        }
    }
    exits.sort_unstable();
    exits.dedup();
    b.fsa.restart_exits = exits;

    CompileOutput {
        fsa: b.fsa,
        warnings: b.warnings,
    }
}

/// Full frontend pipeline: parse, resolve against the system, compile.
pub fn exe2fsa(
    system: &crate::system::SystemSpec,
    plan_text: &str,
) -> Result<CompileOutput, crate::plan::PlanError> {
    let plan = crate::plan::parse_plan(plan_text)?;
    let resolved = crate::plan::resolve_plan(&plan, system);
    Ok(tree2fsa(&resolved))
}

#[derive(Debug, Error)]
pub enum KeywordError {
    #[error("node shape outside the keyword rule table: {0}")]
    UnsupportedNode(String),
}

/// Automaton fragment with wiring ports, as produced for a single keyword
/// shape: the sealed mini-automaton plus its entry and exit sets.
#[derive(Debug, Clone)]
pub struct FsaFragment {
    pub fsa: Fsa,
    pub entry: StateId,
    pub normal_exits: Vec<(StateId, Guard)>,
    pub break_exits: Vec<(StateId, Guard)>,
    pub return_exits: Vec<(StateId, Guard)>,
}

/// Builds the automaton fragment for one keyword-rule shape: a `while`
/// with a call-chain body, an `if`/`if-else` chain with call-chain arms,
/// or a plain call sequence. Compound nesting is outside the rule table
/// and handled by the recursive traversal instead.
pub fn keyword_processor(block: &[RStmt]) -> Result<FsaFragment, KeywordError> {
    let shape_ok = match block {
        [RStmt::While { cond, body, .. }] => {
            plain_call_chain(body).is_some() && !cond_has_unknown(cond)
        }
        [RStmt::If {
            arms, else_body, ..
        }] => {
            arms.iter().all(|(c, b)| !cond_has_unknown(c) && plain_call_chain(b).is_some())
                && else_body
                    .as_ref()
                    .map(|b| plain_call_chain(b).is_some())
                    .unwrap_or(true)
        }
        stmts if plain_call_chain(stmts).is_some() => true,
        _ => false,
    };
    if !shape_ok {
        return Err(KeywordError::UnsupportedNode(
            "expected a while/if over plain call chains, or a call sequence".into(),
        ));
    }

    let plan = ResolvedPlan {
        name: "fragment".into(),
        body: block.to_vec(),
        warnings: Vec::new(),
    };
    let out = tree2fsa(&plan);
    let entry = out.fsa.initial;
    let normal_exits = out
        .fsa
        .transitions
        .iter()
        .filter(|(_, _, to)| *to == entry)
        .map(|(from, g, _)| (*from, g.clone()))
        .collect();
    Ok(FsaFragment {
        entry,
        normal_exits,
        break_exits: Vec::new(),
        return_exits: Vec::new(),
        fsa: out.fsa,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::guard::Guard;
    use crate::props::{valuation, Prop};

    fn exec(prop: &str) -> RStmt {
        RStmt::Exec {
            prop: Prop::new(prop),
            span: SourceSpan::point(1, 1),
        }
    }

    fn plan(body: Vec<RStmt>) -> ResolvedPlan {
        ResolvedPlan {
            name: "t".into(),
            body,
            warnings: Vec::new(),
        }
    }

    fn edges(fsa: &Fsa) -> Vec<(usize, String, usize)> {
        let mut out: Vec<_> = fsa
            .transitions
            .iter()
            .map(|(f, g, t)| (f.0, g.to_string(), t.0))
            .collect();
        out.sort();
        out
    }

    #[test]
    fn while_with_single_call_matches_keyword_rule() {
        // while sigma: f_e()  =>  2 states, entry tests sigma both ways,
        // the call state re-tests sigma directly.
        let body = vec![RStmt::While {
            cond: CondExpr::MappedCall(Prop::new("sigma")),
            body: vec![exec("omega")],
            span: SourceSpan::point(1, 1),
        }];
        let out = tree2fsa(&plan(body));
        assert_eq!(out.fsa.state_count(), 2);
        assert_eq!(
            edges(&out.fsa),
            vec![
                (0, "!sigma".to_string(), 0),
                (0, "sigma".to_string(), 1),
                (1, "!sigma".to_string(), 0),
                (1, "sigma".to_string(), 1),
            ]
        );
    }

    #[test]
    fn if_without_else_matches_keyword_rule() {
        let body = vec![RStmt::If {
            arms: vec![(CondExpr::MappedCall(Prop::new("sigma")), vec![exec("omega")])],
            else_body: None,
            span: SourceSpan::point(1, 1),
        }];
        let out = tree2fsa(&plan(body));
        assert_eq!(out.fsa.state_count(), 2);
        assert_eq!(
            edges(&out.fsa),
            vec![
                (0, "!sigma".to_string(), 0),
                (0, "sigma".to_string(), 1),
                (1, "true".to_string(), 0),
            ]
        );
    }

    #[test]
    fn if_else_matches_keyword_rule() {
        let body = vec![RStmt::If {
            arms: vec![(CondExpr::MappedCall(Prop::new("sigma")), vec![exec("omega1")])],
            else_body: Some(vec![exec("omega2")]),
            span: SourceSpan::point(1, 1),
        }];
        let out = tree2fsa(&plan(body));
        assert_eq!(out.fsa.state_count(), 3);
        assert_eq!(
            edges(&out.fsa),
            vec![
                (0, "!sigma".to_string(), 2),
                (0, "sigma".to_string(), 1),
                (1, "true".to_string(), 0),
                (2, "true".to_string(), 0),
            ]
        );
    }

    #[test]
    fn call_sequence_matches_keyword_rule() {
        let body = vec![exec("omega1"), exec("omega2"), exec("omega3")];
        let out = tree2fsa(&plan(body));
        assert_eq!(out.fsa.state_count(), 4);
        assert_eq!(
            edges(&out.fsa),
            vec![
                (0, "true".to_string(), 1),
                (1, "true".to_string(), 2),
                (2, "true".to_string(), 3),
                (3, "true".to_string(), 0),
            ]
        );
    }

    #[test]
    fn empty_plan_is_single_self_loop() {
        let body = vec![RStmt::Noop {
            span: SourceSpan::point(1, 1),
        }];
        let out = tree2fsa(&plan(body));
        assert_eq!(out.fsa.state_count(), 1);
        assert_eq!(edges(&out.fsa), vec![(0, "true".to_string(), 0)]);
        assert_eq!(out.fsa.restart_exits, vec![StateId(0)]);
    }

    #[test]
    fn if_with_successor_falls_through() {
        // if sigma: stop()   then velocity: the decision state is separate
        // from the initial state and !sigma goes to the successor call.
        let body = vec![
            RStmt::If {
                arms: vec![(CondExpr::MappedCall(Prop::new("sigma")), vec![exec("stop")])],
                else_body: None,
                span: SourceSpan::point(1, 1),
            },
            exec("pv"),
        ];
        let out = tree2fsa(&plan(body));
        assert_eq!(out.fsa.state_count(), 4);
        assert_eq!(
            edges(&out.fsa),
            vec![
                (0, "true".to_string(), 1),
                (1, "!sigma".to_string(), 3),
                (1, "sigma".to_string(), 2),
                (2, "true".to_string(), 3),
                (3, "true".to_string(), 0),
            ]
        );
    }

    #[test]
    fn unknown_condition_branches_nondeterministically() {
        let body = vec![RStmt::If {
            arms: vec![(CondExpr::UnknownAtom, vec![exec("a")])],
            else_body: Some(vec![exec("b")]),
            span: SourceSpan::point(1, 1),
        }];
        let out = tree2fsa(&plan(body));
        // Both arms reachable under true.
        assert_eq!(
            edges(&out.fsa),
            vec![
                (0, "true".to_string(), 1),
                (0, "true".to_string(), 2),
                (1, "true".to_string(), 0),
                (2, "true".to_string(), 0),
            ]
        );
    }

    #[test]
    fn compound_sensor_condition_becomes_guard_formula() {
        let cond = CondExpr::And(vec![
            CondExpr::MappedCall(Prop::new("backpack")),
            CondExpr::MappedCall(Prop::new("person")),
        ]);
        assert_eq!(
            cond_guard(&cond, true),
            Guard::and(vec![Guard::prop("backpack"), Guard::prop("person")])
        );
        assert_eq!(
            cond_guard(&cond, false),
            Guard::or(vec![
                Guard::not(Guard::prop("backpack")),
                Guard::not(Guard::prop("person"))
            ])
        );
    }

    #[test]
    fn exists_elimination_on_mixed_condition() {
        // backpack and unknown: positively backpack, negatively true.
        let cond = CondExpr::And(vec![
            CondExpr::MappedCall(Prop::new("backpack")),
            CondExpr::UnknownAtom,
        ]);
        assert_eq!(cond_guard(&cond, true), Guard::prop("backpack"));
        assert_eq!(cond_guard(&cond, false), Guard::True);
    }

    #[test]
    fn while_true_without_calls_warns() {
        let body = vec![RStmt::While {
            cond: CondExpr::ConstTrue,
            body: vec![RStmt::Noop {
                span: SourceSpan::point(2, 5),
            }],
            span: SourceSpan::point(1, 1),
        }];
        let out = tree2fsa(&plan(body));
        assert_eq!(out.warnings.len(), 1);
        // The loop still self-loops at the head.
        assert_eq!(edges(&out.fsa), vec![(0, "true".to_string(), 0)]);
    }

    #[test]
    fn break_exits_the_loop() {
        // while True: a(); if u: break  -- break leads past the loop to seal.
        let body = vec![RStmt::While {
            cond: CondExpr::ConstTrue,
            body: vec![
                exec("a"),
                RStmt::If {
                    arms: vec![(
                        CondExpr::UnknownAtom,
                        vec![RStmt::Break {
                            span: SourceSpan::point(3, 9),
                        }],
                    )],
                    else_body: None,
                    span: SourceSpan::point(3, 9),
                },
            ],
            span: SourceSpan::point(1, 1),
        }];
        let out = tree2fsa(&plan(body));
        // States: 0 = head, 1 = a, 2 = break decision. The decision state
        // both loops back to the head and exits to the seal.
        assert_eq!(out.fsa.state_count(), 3);
        let e = edges(&out.fsa);
        assert!(e.contains(&(0, "true".to_string(), 1)));
        assert!(e.contains(&(1, "true".to_string(), 2)));
        assert!(e.contains(&(2, "true".to_string(), 0)));
        assert!(out.fsa.restart_exits.contains(&StateId(2)));
        assert!(out.warnings.is_empty());
    }

    #[test]
    fn return_routes_to_seal() {
        let body = vec![
            RStmt::If {
                arms: vec![(CondExpr::UnknownAtom, vec![RStmt::Return {
                    span: SourceSpan::point(2, 5),
                }])],
                else_body: None,
                span: SourceSpan::point(2, 5),
            },
            exec("a"),
        ];
        let out = tree2fsa(&plan(body));
        // Decision state returns straight to initial and also reaches a.
        let e = edges(&out.fsa);
        assert!(e.contains(&(1, "true".to_string(), 0)));
        assert!(e.contains(&(1, "true".to_string(), 2)));
    }

    #[test]
    fn deterministic_numbering() {
        let body = vec![
            RStmt::If {
                arms: vec![(CondExpr::MappedCall(Prop::new("s")), vec![exec("a")])],
                else_body: None,
                span: SourceSpan::point(1, 1),
            },
            exec("b"),
        ];
        let a = tree2fsa(&plan(body.clone()));
        let b = tree2fsa(&plan(body));
        assert_eq!(edges(&a.fsa), edges(&b.fsa));
        assert_eq!(a.fsa.state_count(), b.fsa.state_count());
    }

    #[test]
    fn labels_are_single_exec_props() {
        let body = vec![exec("a"), exec("b")];
        let out = tree2fsa(&plan(body));
        for s in &out.fsa.states {
            assert!(s.label.len() <= 1);
        }
    }

    #[test]
    fn keyword_processor_accepts_table_shapes() {
        let frag = keyword_processor(&[RStmt::While {
            cond: CondExpr::MappedCall(Prop::new("s")),
            body: vec![exec("w")],
            span: SourceSpan::point(1, 1),
        }])
        .unwrap();
        assert_eq!(frag.fsa.state_count(), 2);
        assert_eq!(frag.entry, StateId(0));
        assert_eq!(frag.normal_exits.len(), 2);

        let seq = keyword_processor(&[exec("a"), exec("b")]).unwrap();
        assert_eq!(seq.fsa.state_count(), 3);
        assert_eq!(seq.normal_exits.len(), 1);
    }

    #[test]
    fn keyword_processor_rejects_compound_bodies() {
        let nested = RStmt::While {
            cond: CondExpr::ConstTrue,
            body: vec![RStmt::If {
                arms: vec![(CondExpr::MappedCall(Prop::new("s")), vec![exec("w")])],
                else_body: None,
                span: SourceSpan::point(1, 1),
            }],
            span: SourceSpan::point(1, 1),
        };
        assert!(matches!(
            keyword_processor(&[nested]),
            Err(KeywordError::UnsupportedNode(_))
        ));
    }

    #[test]
    fn valuation_helper() {
        // Guard against accidental multi-prop labels in tests.
        assert_eq!(valuation(["x"]).len(), 1);
    }
}
