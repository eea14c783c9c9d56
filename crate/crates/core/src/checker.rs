//! Verifies a plan automaton against safety specifications by synchronous
//! breadth-first reachability over the product and the monitor, yielding a
//! shortest counterexample on failure; includes a brute-force oracle that
//! takes the tableau route instead of the monitor.

use std::collections::HashMap;
use std::time::{Duration, Instant};

use log::warn;
use thiserror::Error;

use crate::formula::SafetyFormula;
use crate::fsa::{Fsa, StateId};
use crate::monitor::{build_monitor_budgeted, Monitor, MonitorError};
use crate::product::{product, ProductAutomaton, ProductError, ProductStateId};
use crate::props::{fmt_valuation, Prop, Valuation};
use crate::semantics::PrefixChecker;
use crate::span::SourceSpan;
use crate::system::{TransitionSystem, TsStateId};

pub const DEFAULT_STATE_BUDGET: usize = 1_000_000;

#[derive(Debug, Error)]
pub enum CheckError {
    #[error(transparent)]
    Product(#[from] ProductError),
    #[error(transparent)]
    Monitor(#[from] MonitorError),
    #[error("search exceeded the state budget of {0}")]
    StateBudgetExceeded(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerdictResult {
    Pass,
    Fail,
}

#[derive(Debug, Clone)]
pub struct Verdict {
    pub result: VerdictResult,
    pub counterexample: Option<Counterexample>,
    pub stats: VerifyStats,
    /// Notes surfaced during verification (e.g. atoms absent from the
    /// system, treated as constantly false).
    pub warnings: Vec<String>,
}

impl Verdict {
    pub fn passed(&self) -> bool {
        self.result == VerdictResult::Pass
    }
}

#[derive(Debug, Clone, Default)]
pub struct VerifyStats {
    /// (product state, monitor state) pairs explored.
    pub explored: usize,
    pub elapsed: Duration,
}

#[derive(Debug, Clone)]
pub struct CexStep {
    pub product_state: ProductStateId,
    pub fsa_state: StateId,
    pub ts_state: TsStateId,
    pub monitor_state: usize,
    pub valuation: Valuation,
    pub span: Option<SourceSpan>,
}

#[derive(Debug, Clone)]
pub struct Counterexample {
    /// Labels of the path; stepping the monitor along it reaches error
    /// exactly at the last step.
    pub prefix: Vec<Valuation>,
    pub path: Vec<CexStep>,
    /// The specific G-clause the prefix violates.
    pub clause: SafetyFormula,
    pub clause_index: usize,
}

/// Verifies one plan automaton against one specification.
pub fn verify(fsa: &Fsa, ts: &TransitionSystem, f: &SafetyFormula) -> Result<Verdict, CheckError> {
    verify_budgeted(fsa, ts, f, DEFAULT_STATE_BUDGET)
}

pub fn verify_budgeted(
    fsa: &Fsa,
    ts: &TransitionSystem,
    f: &SafetyFormula,
    budget: usize,
) -> Result<Verdict, CheckError> {
    let p = product(fsa, ts)?;
    verify_product_budgeted(&p, f, budget)
}

/// Element-wise verification against a specification set.
pub fn verify_all(
    fsa: &Fsa,
    ts: &TransitionSystem,
    specs: &[SafetyFormula],
) -> Result<Vec<Verdict>, CheckError> {
    let p = product(fsa, ts)?;
    specs
        .iter()
        .map(|f| verify_product_budgeted(&p, f, DEFAULT_STATE_BUDGET))
        .collect()
}

pub fn verify_product(p: &ProductAutomaton, f: &SafetyFormula) -> Result<Verdict, CheckError> {
    verify_product_budgeted(p, f, DEFAULT_STATE_BUDGET)
}

/// Runs one monitor per G-clause and keeps the shortest counterexample.
pub fn verify_product_budgeted(
    p: &ProductAutomaton,
    f: &SafetyFormula,
    budget: usize,
) -> Result<Verdict, CheckError> {
    let start = Instant::now();
    let warnings = unknown_atom_warnings(p, f);
    for w in &warnings {
        warn!("{w}");
    }
    let mut explored = 0usize;
    let mut best: Option<Counterexample> = None;
    for (clause_index, clause) in f.clauses().into_iter().enumerate() {
        let monitor = build_monitor_budgeted(&clause, budget)?;
        let found = bfs_clause(p, &monitor, budget, &mut explored)?;
        if let Some(path) = found {
            let cex = build_counterexample(p, &monitor, path, clause.clone(), clause_index);
            let shorter = best
                .as_ref()
                .map(|b| cex.prefix.len() < b.prefix.len())
                .unwrap_or(true);
            if shorter {
                best = Some(cex);
            }
        }
    }
    let stats = VerifyStats {
        explored,
        elapsed: start.elapsed(),
    };
    Ok(Verdict {
        result: if best.is_some() {
            VerdictResult::Fail
        } else {
            VerdictResult::Pass
        },
        counterexample: best,
        stats,
        warnings,
    })
}

fn unknown_atom_warnings(p: &ProductAutomaton, f: &SafetyFormula) -> Vec<String> {
    let mut out = Vec::new();
    for atom in f.atoms() {
        if !p.sensor_props.contains(&atom) && !p.exec_props.contains(&atom) {
            out.push(format!(
                "specification atom {:?} is not a proposition of this system; it is treated as constantly false",
                atom.as_str()
            ));
        }
    }
    out
}

/// Shortest path to a monitor-error pair, as product-state indices.
fn bfs_clause(
    p: &ProductAutomaton,
    monitor: &Monitor,
    budget: usize,
    explored: &mut usize,
) -> Result<Option<Vec<ProductStateId>>, CheckError> {
    let succs = p.successors();
    let mut visited: HashMap<(ProductStateId, usize), Option<(ProductStateId, usize)>> =
        HashMap::new();
    let mut queue: std::collections::VecDeque<(ProductStateId, usize)> =
        std::collections::VecDeque::new();

    // The monitor consumes the label of every visited product state,
    // including the initial one: traces begin at the initial state's label.
    let mut initials: Vec<ProductStateId> = p.initials.clone();
    initials.sort_unstable();
    for &s in &initials {
        let m = monitor.step(monitor.initial(), &p.labels[s]);
        let key = (s, m);
        if visited.contains_key(&key) {
            continue;
        }
        visited.insert(key, None);
        if monitor.is_error(m) {
            return Ok(Some(vec![s]));
        }
        queue.push_back(key);
    }

    while let Some((s, m)) = queue.pop_front() {
        *explored += 1;
        if visited.len() > budget {
            return Err(CheckError::StateBudgetExceeded(budget));
        }
        for &t in &succs[s] {
            let m2 = monitor.step(m, &p.labels[t]);
            let key = (t, m2);
            if visited.contains_key(&key) {
                continue;
            }
            visited.insert(key, Some((s, m)));
            if monitor.is_error(m2) {
                // Reconstruct the product path.
                let mut rev = vec![t];
                let mut cur = (s, m);
                loop {
                    rev.push(cur.0);
                    match visited[&cur] {
                        Some(prev) => cur = prev,
                        None => break,
                    }
                }
                rev.reverse();
                return Ok(Some(rev));
            }
            queue.push_back(key);
        }
    }
    Ok(None)
}

fn build_counterexample(
    p: &ProductAutomaton,
    monitor: &Monitor,
    path: Vec<ProductStateId>,
    clause: SafetyFormula,
    clause_index: usize,
) -> Counterexample {
    let mut steps = Vec::with_capacity(path.len());
    let mut m = monitor.initial();
    let mut prefix = Vec::with_capacity(path.len());
    for &s in &path {
        m = monitor.step(m, &p.labels[s]);
        let (fsa_state, ts_state) = p.states[s];
        steps.push(CexStep {
            product_state: s,
            fsa_state,
            ts_state,
            monitor_state: m,
            valuation: p.labels[s].clone(),
            span: p.provenance[s],
        });
        prefix.push(p.labels[s].clone());
    }
    debug_assert!(monitor.is_error(m));
    Counterexample {
        prefix,
        path: steps,
        clause,
        clause_index,
    }
}

/// Brute-force oracle: bounded search over (product state, tableau
/// configuration) pairs up to prefix length `k`, flagging any reachable
/// bad prefix. Never touches the monitor.
pub fn brute_force_check(
    p: &ProductAutomaton,
    f: &SafetyFormula,
    k: usize,
) -> Result<Verdict, CheckError> {
    brute_force_check_budgeted(p, f, k, DEFAULT_STATE_BUDGET)
}

pub fn brute_force_check_budgeted(
    p: &ProductAutomaton,
    f: &SafetyFormula,
    k: usize,
    budget: usize,
) -> Result<Verdict, CheckError> {
    type Key = (ProductStateId, crate::semantics::Config);
    let start = Instant::now();
    let warnings = unknown_atom_warnings(p, f);
    let checker = PrefixChecker::new(f);
    let succs = p.successors();

    let mut explored = 0usize;
    let mut level: Vec<Key> = Vec::new();
    let mut parents: HashMap<Key, Option<Key>> = HashMap::new();
    let mut dead: Option<Key> = None;
    for &s in &p.initials {
        let c = checker.step(&checker.initial_config(), &p.labels[s]);
        let key = (s, c);
        if parents.contains_key(&key) {
            continue;
        }
        parents.insert(key.clone(), None);
        if checker.is_dead(&key.1) {
            dead = Some(key);
            break;
        }
        level.push(key);
    }
    let mut depth = 1;
    while dead.is_none() && depth < k && !level.is_empty() {
        let mut next = Vec::new();
        'level: for key in &level {
            explored += 1;
            if parents.len() > budget {
                return Err(CheckError::StateBudgetExceeded(budget));
            }
            for &t in &succs[key.0] {
                let c2 = checker.step(&key.1, &p.labels[t]);
                let nkey = (t, c2);
                if parents.contains_key(&nkey) {
                    continue;
                }
                parents.insert(nkey.clone(), Some(key.clone()));
                if checker.is_dead(&nkey.1) {
                    dead = Some(nkey);
                    break 'level;
                }
                next.push(nkey);
            }
        }
        level = next;
        depth += 1;
    }

    let stats = VerifyStats {
        explored,
        elapsed: start.elapsed(),
    };
    let counterexample = dead.map(|end| {
        let mut path = vec![end.0];
        let mut cur = end;
        while let Some(Some(prev)) = parents.get(&cur) {
            path.push(prev.0);
            cur = prev.clone();
        }
        path.reverse();
        oracle_counterexample(p, f, path)
    });
    Ok(Verdict {
        result: if counterexample.is_some() {
            VerdictResult::Fail
        } else {
            VerdictResult::Pass
        },
        counterexample,
        stats,
        warnings,
    })
}

/// Builds the counterexample record for an oracle-found bad path. The
/// verdict was decided by the tableau; the violated clause is attributed by
/// re-testing clauses, and monitor states are filled in for annotation only.
fn oracle_counterexample(
    p: &ProductAutomaton,
    f: &SafetyFormula,
    path: Vec<ProductStateId>,
) -> Counterexample {
    let prefix: Vec<Valuation> = path.iter().map(|&s| p.labels[s].clone()).collect();
    let clauses = f.clauses();
    let (clause_index, clause) = clauses
        .iter()
        .enumerate()
        .find(|(_, c)| crate::semantics::is_bad_prefix(c, &prefix))
        .map(|(i, c)| (i, c.clone()))
        // Jointly-unsatisfiable conjunctions may have no single bad clause.
        .unwrap_or((0, f.clone()));
    let monitor = build_monitor_budgeted(&clause, DEFAULT_STATE_BUDGET).ok();
    let mut m = monitor.as_ref().map(|mon| mon.initial());
    let steps = path
        .iter()
        .map(|&s| {
            if let (Some(mon), Some(state)) = (&monitor, m) {
                m = Some(mon.step(state, &p.labels[s]));
            }
            let (fsa_state, ts_state) = p.states[s];
            CexStep {
                product_state: s,
                fsa_state,
                ts_state,
                monitor_state: m.unwrap_or_default(),
                valuation: p.labels[s].clone(),
                span: p.provenance[s],
            }
        })
        .collect();
    Counterexample {
        prefix,
        path: steps,
        clause,
        clause_index,
    }
}

#[derive(Debug, Error)]
pub enum ExplainError {
    #[error("the verdict is a pass; there is nothing to explain")]
    NotAFailure,
}

/// Renders a failure report: step-by-step valuations, the violated clause,
/// and plan source lines via state provenance. Stable formatting.
pub fn explain(
    verdict: &Verdict,
    spec_text: &str,
    plan_source: Option<&str>,
) -> Result<String, ExplainError> {
    let cex = verdict.counterexample.as_ref().ok_or(ExplainError::NotAFailure)?;
    let source_lines: Vec<&str> = plan_source.map(|s| s.lines().collect()).unwrap_or_default();
    let mut out = String::new();
    out.push_str("verification: FAIL\n");
    out.push_str(&format!("specification: {spec_text}\n"));
    out.push_str(&format!("violated clause: {}\n", cex.clause));
    out.push_str(&format!("counterexample ({} steps):\n", cex.prefix.len()));
    for (i, step) in cex.path.iter().enumerate() {
        let mut line = format!("  step {}: {}", i + 1, fmt_valuation(&step.valuation));
        if let Some(span) = step.span {
            line.push_str(&format!("    <- plan line {}", span.start_line));
            if let Some(text) = source_lines.get((span.start_line - 1) as usize) {
                line.push_str(&format!(": {}", text.trim()));
            }
        }
        out.push_str(&line);
        out.push('\n');
    }
    out.push_str(
        "the last step's valuation completes a bad prefix: no continuation can satisfy the clause\n",
    );
    Ok(out)
}

/// Convenience used by tests and the composition module: monitor states
/// reachable at each product state, consuming labels from the initials.
pub fn reachable_monitor_states(
    p: &ProductAutomaton,
    monitor: &Monitor,
) -> Vec<std::collections::BTreeSet<usize>> {
    let succs = p.successors();
    let mut reach: Vec<std::collections::BTreeSet<usize>> =
        vec![std::collections::BTreeSet::new(); p.state_count()];
    let mut queue: std::collections::VecDeque<(ProductStateId, usize)> =
        std::collections::VecDeque::new();
    for &s in &p.initials {
        let m = monitor.step(monitor.initial(), &p.labels[s]);
        if reach[s].insert(m) {
            queue.push_back((s, m));
        }
    }
    while let Some((s, m)) = queue.pop_front() {
        for &t in &succs[s] {
            let m2 = monitor.step(m, &p.labels[t]);
            if reach[t].insert(m2) {
                queue.push_back((t, m2));
            }
        }
    }
    reach
}

/// Total prop universe of a product, for sizing oracle bounds.
pub fn product_props(p: &ProductAutomaton) -> Vec<Prop> {
    let mut out: Vec<Prop> = p.sensor_props.iter().cloned().collect();
    out.extend(p.exec_props.iter().cloned());
    out
}
