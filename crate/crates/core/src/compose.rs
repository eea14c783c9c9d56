//! Compositional safety: certifying a sequential composition of verified
//! plans without model-checking the whole joint automaton.
//!
//! For each connection `(q, q')` from an exit of one part to an initial
//! state of the next, every non-error monitor state reachable at `q`
//! (after consuming the trace up to and including `q`'s label) must step on
//! `q'`'s label to a non-error state. Together with per-part verification
//! this certifies the joint automaton; the check quantifies over prefixes
//! realizable in the first part, which is what the safety argument uses.

use serde::Deserialize;
use thiserror::Error;

use crate::checker::{
    reachable_monitor_states, verify_product_budgeted, CheckError, Verdict, VerdictResult,
    DEFAULT_STATE_BUDGET,
};
use crate::formula::SafetyFormula;
use crate::monitor::{build_monitor_budgeted, Monitor};
use crate::product::{default_connections, join, ProductAutomaton, ProductError, ProductStateId};

#[derive(Debug, Error)]
pub enum ComposeError {
    #[error("part {part} does not pass specification {spec:?}; composition requires verified parts")]
    PreconditionViolated { part: usize, spec: String },
    #[error(transparent)]
    Check(#[from] CheckError),
    #[error(transparent)]
    Product(#[from] ProductError),
    #[error("composition needs at least one part")]
    Empty,
}

/// Witness of a failed connection check: monitor state `monitor_state` is
/// reachable at `from`, and the label of `to` drives it to error.
#[derive(Debug, Clone)]
pub struct ConnectionWitness {
    pub from: ProductStateId,
    pub to: ProductStateId,
    pub monitor_state: usize,
}

#[derive(Debug, Clone)]
pub enum ConnectionCheck {
    Pass,
    Fail(ConnectionWitness),
}

impl ConnectionCheck {
    pub fn passed(&self) -> bool {
        matches!(self, ConnectionCheck::Pass)
    }
}

/// Checks one connection set between two individually verified parts
/// against one monitor clause.
pub fn check_connection(
    p1: &ProductAutomaton,
    p2: &ProductAutomaton,
    connect: &[(ProductStateId, ProductStateId)],
    monitor: &Monitor,
) -> Result<ConnectionCheck, ComposeError> {
    for (idx, p) in [p1, p2].into_iter().enumerate() {
        let v = verify_product_budgeted(p, &monitor.formula, DEFAULT_STATE_BUDGET)?;
        if v.result != VerdictResult::Pass {
            return Err(ComposeError::PreconditionViolated {
                part: idx,
                spec: monitor.formula.to_string(),
            });
        }
    }
    let reach = reachable_monitor_states(p1, monitor);
    for &(from, to) in connect {
        for &m in &reach[from] {
            if monitor.is_error(m) {
                continue;
            }
            let next = monitor.step(m, &p2.labels[to]);
            if monitor.is_error(next) {
                return Ok(ConnectionCheck::Fail(ConnectionWitness {
                    from,
                    to,
                    monitor_state: m,
                }));
            }
        }
    }
    Ok(ConnectionCheck::Pass)
}

/// Sequential composition: ordered parts and, per adjacent pair, the
/// connection set (None = every exit of part i to every initial of i+1).
#[derive(Debug, Clone)]
pub struct CompositionPlan {
    pub parts: Vec<ProductAutomaton>,
    pub connections: Vec<Option<Vec<(ProductStateId, ProductStateId)>>>,
}

impl CompositionPlan {
    pub fn sequential(parts: Vec<ProductAutomaton>) -> CompositionPlan {
        let n = parts.len().saturating_sub(1);
        CompositionPlan {
            parts,
            connections: vec![None; n],
        }
    }
}

#[derive(Debug, Clone)]
pub struct Certification {
    /// Overall verdict: certified pass, or the failing pair.
    pub result: VerdictResult,
    /// Per-spec, per-boundary outcomes, in (spec, boundary) order.
    pub failures: Vec<(usize, usize, ConnectionWitness)>,
    /// The joint automaton, for optional direct verification.
    pub joint: ProductAutomaton,
}

/// Certifies a composed plan from per-part verdicts plus the connection
/// condition, folding the joint automaton left to right. The certificate
/// never runs the checker on the joint automaton; callers can do so
/// independently to cross-validate.
pub fn compose_and_certify(
    plan: &CompositionPlan,
    specs: &[SafetyFormula],
) -> Result<Certification, ComposeError> {
    if plan.parts.is_empty() {
        return Err(ComposeError::Empty);
    }
    // Every part must pass every spec before composition is attempted.
    for (pi, part) in plan.parts.iter().enumerate() {
        for spec in specs {
            let v = verify_product_budgeted(part, spec, DEFAULT_STATE_BUDGET)?;
            if v.result != VerdictResult::Pass {
                return Err(ComposeError::PreconditionViolated {
                    part: pi,
                    spec: spec.to_string(),
                });
            }
        }
    }

    let mut failures = Vec::new();
    for (si, spec) in specs.iter().enumerate() {
        for clause in spec.clauses() {
            let monitor = build_monitor_budgeted(&clause, DEFAULT_STATE_BUDGET)
                .map_err(CheckError::from)?;
            for b in 0..plan.parts.len().saturating_sub(1) {
                let p1 = &plan.parts[b];
                let p2 = &plan.parts[b + 1];
                let conn = match &plan.connections[b] {
                    Some(c) => c.clone(),
                    None => default_connections(p1, p2),
                };
                if let ConnectionCheck::Fail(w) = check_connection(p1, p2, &conn, &monitor)? {
                    failures.push((si, b, w));
                }
            }
        }
    }

    // Build the joint automaton regardless of the verdict so failures can
    // be inspected directly.
    let mut joint = plan.parts[0].clone();
    for b in 1..plan.parts.len() {
        let conn = match &plan.connections[b - 1] {
            Some(c) => c.clone(),
            None => default_connections(&joint, &plan.parts[b]),
        };
        joint = join(&joint, &plan.parts[b], &conn)?;
    }

    Ok(Certification {
        result: if failures.is_empty() {
            VerdictResult::Pass
        } else {
            VerdictResult::Fail
        },
        failures,
        joint,
    })
}

/// Direct verification of a (joint) product against every spec; used to
/// cross-validate certificates.
pub fn direct_verify(
    p: &ProductAutomaton,
    specs: &[SafetyFormula],
) -> Result<Vec<Verdict>, CheckError> {
    specs
        .iter()
        .map(|f| verify_product_budgeted(p, f, DEFAULT_STATE_BUDGET))
        .collect()
}

/// On-disk manifest for the compose subcommand.
#[derive(Debug, Clone, Deserialize)]
pub struct ComposeManifest {
    pub system: String,
    pub parts: Vec<String>,
    /// Optional explicit connections, one entry per adjacent pair, each a
    /// list of `[from_state, to_state]` product-state pairs.
    #[serde(default)]
    pub connections: Option<Vec<Vec<(usize, usize)>>>,
}

impl ComposeManifest {
    pub fn from_json(text: &str) -> Result<ComposeManifest, serde_json::Error> {
        serde_json::from_str(text)
    }
}
