//! Product of a plan automaton with the environment transition system, plus
//! bounded trace enumeration and sequential (joint) composition.
//!
//! A product transition exists when some FSA transition `(p, g, p')` has its
//! guard satisfied by the environment valuation on both ends of the step:
//! the label of the source TS state and of the target TS state. Requiring
//! the guard at the landing state as well models the action executing while
//! the sensed condition still holds; with plain source-side evaluation an
//! action state would pair with arbitrary environments and same-instant
//! specifications (no `X`) could never be satisfied.

use std::collections::{BTreeSet, HashMap, VecDeque};

use thiserror::Error;

use crate::fsa::{Fsa, StateId};
use crate::props::{fmt_valuation, Prop, Valuation};
use crate::span::SourceSpan;
use crate::system::{TransitionSystem, TsStateId};

/// Index into `ProductAutomaton::states`.
pub type ProductStateId = usize;

#[derive(Debug, Error)]
pub enum ProductError {
    #[error("guard references proposition {0:?} absent from the transition system")]
    UnknownProp(String),
    #[error("operands range over different proposition sets")]
    PropSetMismatch,
    #[error("invalid connection: {0}")]
    InvalidConnection(String),
    #[error("trace enumeration exceeded the budget of {0}")]
    BudgetExceeded(usize),
}

#[derive(Debug, Clone)]
pub struct ProductAutomaton {
    /// Underlying (FSA state, TS state) pairs.
    pub states: Vec<(StateId, TsStateId)>,
    pub labels: Vec<Valuation>,
    pub initials: Vec<ProductStateId>,
    pub transitions: Vec<(ProductStateId, ProductStateId)>,
    /// Product states of the plan's restart exits (where one pass of the
    /// plan completes); targets for sequential composition.
    pub exits: Vec<ProductStateId>,
    /// Plan source location per state, from the FSA side.
    pub provenance: Vec<Option<SourceSpan>>,
    /// Whether unreachable states were pruned away.
    pub pruned: bool,
    pub sensor_props: BTreeSet<Prop>,
    pub exec_props: BTreeSet<Prop>,
}

impl ProductAutomaton {
    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn successors(&self) -> Vec<Vec<ProductStateId>> {
        let mut out = vec![Vec::new(); self.states.len()];
        for &(from, to) in &self.transitions {
            out[from].push(to);
        }
        for list in &mut out {
            list.sort_unstable();
            list.dedup();
        }
        out
    }

    /// Deterministic Graphviz rendering with `s{i}@{label}` node names.
    pub fn to_dot(&self, name: &str) -> String {
        let mut out = String::new();
        out.push_str(&format!("digraph \"{name}\" {{\n"));
        out.push_str("  rankdir=LR;\n");
        out.push_str("  __init [shape=point, label=\"\"];\n");
        for (i, label) in self.labels.iter().enumerate() {
            out.push_str(&format!(
                "  s{i} [shape=circle, label=\"s{i}@{}\"];\n",
                fmt_valuation(label)
            ));
        }
        let mut initials = self.initials.clone();
        initials.sort_unstable();
        for i in initials {
            out.push_str(&format!("  __init -> s{i};\n"));
        }
        let mut edges = self.transitions.clone();
        edges.sort_unstable();
        edges.dedup();
        for (f, t) in edges {
            out.push_str(&format!("  s{f} -> s{t};\n"));
        }
        out.push_str("}\n");
        out
    }

    /// Builds a product automaton from raw parts, for composition fixtures
    /// and adversarial tests.
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        states: Vec<(StateId, TsStateId)>,
        labels: Vec<Valuation>,
        initials: Vec<ProductStateId>,
        transitions: Vec<(ProductStateId, ProductStateId)>,
        exits: Vec<ProductStateId>,
        sensor_props: BTreeSet<Prop>,
        exec_props: BTreeSet<Prop>,
    ) -> ProductAutomaton {
        let n = states.len();
        ProductAutomaton {
            states,
            labels,
            initials,
            transitions,
            exits,
            provenance: vec![None; n],
            pruned: false,
            sensor_props,
            exec_props,
        }
    }
}

/// Builds the product, pruned to the reachable fragment.
pub fn product(fsa: &Fsa, ts: &TransitionSystem) -> Result<ProductAutomaton, ProductError> {
    product_with(fsa, ts, true)
}

/// Builds the product keeping every (FSA state, TS state) pair.
pub fn product_unpruned(
    fsa: &Fsa,
    ts: &TransitionSystem,
) -> Result<ProductAutomaton, ProductError> {
    product_with(fsa, ts, false)
}

fn product_with(
    fsa: &Fsa,
    ts: &TransitionSystem,
    prune: bool,
) -> Result<ProductAutomaton, ProductError> {
    let ts_props: BTreeSet<Prop> = ts.sensor_props().iter().cloned().collect();
    for p in fsa.guard_props() {
        if !ts_props.contains(&p) {
            return Err(ProductError::UnknownProp(p.as_str().to_string()));
        }
    }

    let nq = ts.state_count();
    let id = |p: StateId, q: TsStateId| p.0 * nq + q.0;

    let mut states = Vec::with_capacity(fsa.state_count() * nq);
    let mut labels = Vec::with_capacity(fsa.state_count() * nq);
    let mut provenance = Vec::with_capacity(fsa.state_count() * nq);
    for p in 0..fsa.state_count() {
        for q in ts.states() {
            states.push((StateId(p), q));
            let mut label = fsa.label(StateId(p)).clone();
            label.extend(ts.label(q).iter().cloned());
            labels.push(label);
            provenance.push(fsa.states[p].provenance);
        }
    }

    let initials: Vec<ProductStateId> = ts.states().map(|q| id(fsa.initial, q)).collect();

    let mut transitions = Vec::new();
    for (p, guard, p2) in &fsa.transitions {
        for q in ts.states() {
            if !guard.eval(ts.label(q)) {
                continue;
            }
            for q2 in ts.states() {
                if guard.eval(ts.label(q2)) {
                    transitions.push((id(*p, q), id(*p2, q2)));
                }
            }
        }
    }
    transitions.sort_unstable();
    transitions.dedup();

    let exits: Vec<ProductStateId> = fsa
        .restart_exits
        .iter()
        .flat_map(|&e| ts.states().map(move |q| id(e, q)))
        .collect();

    let mut out = ProductAutomaton {
        states,
        labels,
        initials,
        transitions,
        exits,
        provenance,
        pruned: false,
        sensor_props: ts_props,
        exec_props: fsa.label_props(),
    };
    if prune {
        out = prune_unreachable(out);
    }
    Ok(out)
}

fn prune_unreachable(p: ProductAutomaton) -> ProductAutomaton {
    let succs = p.successors();
    let mut keep = vec![false; p.states.len()];
    let mut queue: VecDeque<usize> = p.initials.iter().copied().collect();
    for &i in &p.initials {
        keep[i] = true;
    }
    while let Some(s) = queue.pop_front() {
        for &t in &succs[s] {
            if !keep[t] {
                keep[t] = true;
                queue.push_back(t);
            }
        }
    }
    let mut remap: HashMap<usize, usize> = HashMap::new();
    let mut states = Vec::new();
    let mut labels = Vec::new();
    let mut provenance = Vec::new();
    for (i, k) in keep.iter().enumerate() {
        if *k {
            remap.insert(i, states.len());
            states.push(p.states[i]);
            labels.push(p.labels[i].clone());
            provenance.push(p.provenance[i]);
        }
    }
    ProductAutomaton {
        states,
        labels,
        initials: p.initials.iter().map(|i| remap[i]).collect(),
        transitions: p
            .transitions
            .iter()
            .filter(|(f, t)| keep[*f] && keep[*t])
            .map(|(f, t)| (remap[f], remap[t]))
            .collect(),
        exits: p
            .exits
            .iter()
            .filter(|e| keep[**e])
            .map(|e| remap[e])
            .collect(),
        provenance,
        pruned: true,
        sensor_props: p.sensor_props,
        exec_props: p.exec_props,
    }
}

/// Restricts the initial states to those whose environment valuation
/// satisfies `allowed`, then re-prunes. The definition makes every
/// environment state initial; this narrowing is opt-in and off by default.
pub fn restrict_initials(
    p: &ProductAutomaton,
    allowed: &crate::guard::Guard,
) -> ProductAutomaton {
    let mut out = p.clone();
    out.initials.retain(|&s| {
        let sensor_part: Valuation = p.labels[s]
            .iter()
            .filter(|prop| p.sensor_props.contains(*prop))
            .cloned()
            .collect();
        allowed.eval(&sensor_part)
    });
    prune_unreachable(out)
}

/// A finite sequence of labels along a path from an initial state.
pub type TracePrefix = Vec<Valuation>;

pub const DEFAULT_TRACE_BUDGET: usize = 200_000;

/// Exactly the set of length-`k` label prefixes of paths from initial
/// states. Paths that dead-end earlier contribute nothing at length `k`.
pub fn bounded_traces(
    p: &ProductAutomaton,
    k: usize,
) -> Result<BTreeSet<TracePrefix>, ProductError> {
    bounded_traces_budgeted(p, k, DEFAULT_TRACE_BUDGET)
}

pub fn bounded_traces_budgeted(
    p: &ProductAutomaton,
    k: usize,
    budget: usize,
) -> Result<BTreeSet<TracePrefix>, ProductError> {
    assert!(k >= 1, "prefix length must be at least 1");
    let succs = p.successors();
    // Deduplicate by (prefix, end state) per level; distinct states can
    // continue a shared prefix differently.
    let mut level: BTreeSet<(TracePrefix, ProductStateId)> = p
        .initials
        .iter()
        .map(|&s| (vec![p.labels[s].clone()], s))
        .collect();
    for _ in 1..k {
        let mut next = BTreeSet::new();
        for (prefix, end) in &level {
            for &t in &succs[*end] {
                let mut ext = prefix.clone();
                ext.push(p.labels[t].clone());
                next.insert((ext, t));
                if next.len() > budget {
                    log::warn!("bounded trace enumeration exceeded {budget} prefixes");
                    return Err(ProductError::BudgetExceeded(budget));
                }
            }
        }
        level = next;
    }
    Ok(level.into_iter().map(|(prefix, _)| prefix).collect())
}

/// Joint automaton: disjoint union of two products plus connection
/// transitions from states of the first to initial states of the second.
/// Initial states are the first operand's.
pub fn join(
    p1: &ProductAutomaton,
    p2: &ProductAutomaton,
    connect: &[(ProductStateId, ProductStateId)],
) -> Result<ProductAutomaton, ProductError> {
    if p1.sensor_props != p2.sensor_props {
        return Err(ProductError::PropSetMismatch);
    }
    let offset = p1.states.len();
    let p2_initials: BTreeSet<ProductStateId> = p2.initials.iter().copied().collect();
    for &(from, to) in connect {
        if from >= p1.states.len() {
            return Err(ProductError::InvalidConnection(format!(
                "source state {from} does not exist in the first operand"
            )));
        }
        if to >= p2.states.len() {
            return Err(ProductError::InvalidConnection(format!(
                "target state {to} does not exist in the second operand"
            )));
        }
        if !p2_initials.contains(&to) {
            return Err(ProductError::InvalidConnection(format!(
                "target state {to} is not an initial state of the second operand"
            )));
        }
    }

    let mut states = p1.states.clone();
    states.extend(p2.states.iter().copied());
    let mut labels = p1.labels.clone();
    labels.extend(p2.labels.iter().cloned());
    let mut transitions = p1.transitions.clone();
    transitions.extend(p2.transitions.iter().map(|&(f, t)| (f + offset, t + offset)));
    transitions.extend(connect.iter().map(|&(f, t)| (f, t + offset)));
    transitions.sort_unstable();
    transitions.dedup();
    let mut provenance = p1.provenance.clone();
    provenance.extend(p2.provenance.iter().copied());

    let mut exec_props = p1.exec_props.clone();
    exec_props.extend(p2.exec_props.iter().cloned());

    Ok(ProductAutomaton {
        states,
        labels,
        initials: p1.initials.clone(),
        transitions,
        // The joint automaton completes where its last part completes.
        exits: p2.exits.iter().map(|&e| e + offset).collect(),
        provenance,
        pruned: false,
        sensor_props: p1.sensor_props.clone(),
        exec_props,
    })
}

/// The default connection set for sequential composition: every exit of the
/// first part to every initial state of the second.
pub fn default_connections(
    p1: &ProductAutomaton,
    p2: &ProductAutomaton,
) -> Vec<(ProductStateId, ProductStateId)> {
    let mut out = Vec::new();
    for &e in &p1.exits {
        for &i in &p2.initials {
            out.push((e, i));
        }
    }
    out
}
