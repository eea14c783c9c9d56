//! Finite-state automata compiled from plans: states labeled with execution
//! propositions, transitions guarded by sensor-proposition formulas.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::guard::Guard;
use crate::props::{fmt_valuation, Prop, Valuation};
use crate::span::SourceSpan;

/// Identifier of an FSA state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StateId(pub usize);

impl fmt::Display for StateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "s{}", self.0)
    }
}

#[derive(Debug, Clone)]
pub struct FsaState {
    /// Execution props active in this state; at most one for compiled plans.
    pub label: Valuation,
    /// Plan source location of the call that created the state, if any.
    pub provenance: Option<SourceSpan>,
}

#[derive(Debug, Clone)]
pub struct Fsa {
    pub states: Vec<FsaState>,
    pub initial: StateId,
    pub transitions: Vec<(StateId, Guard, StateId)>,
    /// States whose restart edge loops back to the initial state; these are
    /// where one pass of the plan completes, and where sequential
    /// composition connects the next plan.
    pub restart_exits: Vec<StateId>,
}

impl Fsa {
    pub fn new() -> Fsa {
        Fsa {
            states: vec![FsaState {
                label: Valuation::new(),
                provenance: None,
            }],
            initial: StateId(0),
            transitions: Vec::new(),
            restart_exits: Vec::new(),
        }
    }

    pub fn add_state(&mut self, label: Valuation, provenance: Option<SourceSpan>) -> StateId {
        let id = StateId(self.states.len());
        self.states.push(FsaState { label, provenance });
        id
    }

    pub fn add_transition(&mut self, from: StateId, guard: Guard, to: StateId) {
        debug_assert!(from.0 < self.states.len() && to.0 < self.states.len());
        self.transitions.push((from, guard, to));
    }

    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn label(&self, s: StateId) -> &Valuation {
        &self.states[s.0].label
    }

    /// All props mentioned in guards (the sensor surface).
    pub fn guard_props(&self) -> BTreeSet<Prop> {
        let mut out = BTreeSet::new();
        for (_, g, _) in &self.transitions {
            out.extend(g.props());
        }
        out
    }

    /// All props used in state labels (the execution surface).
    pub fn label_props(&self) -> BTreeSet<Prop> {
        let mut out = BTreeSet::new();
        for s in &self.states {
            out.extend(s.label.iter().cloned());
        }
        out
    }

    /// Deterministic Graphviz rendering: states by id, transitions sorted.
    pub fn to_dot(&self, name: &str) -> String {
        let mut out = String::new();
        out.push_str(&format!("digraph \"{name}\" {{\n"));
        out.push_str("  rankdir=LR;\n");
        out.push_str("  __init [shape=point, label=\"\"];\n");
        for (i, st) in self.states.iter().enumerate() {
            out.push_str(&format!(
                "  s{i} [shape=circle, label=\"s{i}\\n{}\"];\n",
                fmt_valuation(&st.label)
            ));
        }
        out.push_str(&format!("  __init -> s{};\n", self.initial.0));
        let mut edges: Vec<(usize, String, usize)> = self
            .transitions
            .iter()
            .map(|(f, g, t)| (f.0, g.to_string(), t.0))
            .collect();
        edges.sort();
        edges.dedup();
        for (f, g, t) in edges {
            out.push_str(&format!(
                "  s{f} -> s{t} [label=\"{}\"];\n",
                g.replace('"', "\\\"")
            ));
        }
        out.push_str("}\n");
        out
    }

    /// Graph isomorphism respecting initial states, state labels and guard
    /// formulas, by exhaustive permutation search; intended for small
    /// automata (a dozen states or fewer).
    pub fn isomorphic(&self, other: &Fsa) -> bool {
        if self.state_count() != other.state_count()
            || self.transitions.len() != other.transitions.len()
        {
            return false;
        }
        let n = self.state_count();
        let mut edges_a: BTreeSet<(usize, Guard, usize)> = BTreeSet::new();
        for (f, g, t) in &self.transitions {
            edges_a.insert((f.0, g.clone(), t.0));
        }
        let edges_b: BTreeSet<(usize, Guard, usize)> = other
            .transitions
            .iter()
            .map(|(f, g, t)| (f.0, g.clone(), t.0))
            .collect();

        // mapping[i] = image of state i in other.
        let mut mapping = vec![usize::MAX; n];
        let mut used = vec![false; n];
        mapping[self.initial.0] = other.initial.0;
        used[other.initial.0] = true;
        if self.label(self.initial) != other.label(other.initial) {
            return false;
        }
        fn assign(
            i: usize,
            a: &Fsa,
            b: &Fsa,
            mapping: &mut Vec<usize>,
            used: &mut Vec<bool>,
            edges_a: &BTreeSet<(usize, Guard, usize)>,
            edges_b: &BTreeSet<(usize, Guard, usize)>,
        ) -> bool {
            let n = a.state_count();
            if i == n {
                return edges_a
                    .iter()
                    .all(|(f, g, t)| edges_b.contains(&(mapping[*f], g.clone(), mapping[*t])));
            }
            if mapping[i] != usize::MAX {
                return assign(i + 1, a, b, mapping, used, edges_a, edges_b);
            }
            for cand in 0..n {
                if used[cand] || a.label(StateId(i)) != b.label(StateId(cand)) {
                    continue;
                }
                mapping[i] = cand;
                used[cand] = true;
                if assign(i + 1, a, b, mapping, used, edges_a, edges_b) {
                    return true;
                }
                mapping[i] = usize::MAX;
                used[cand] = false;
            }
            false
        }
        assign(0, self, other, &mut mapping, &mut used, &edges_a, &edges_b)
    }

    /// Canonical JSON shape of the automaton.
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct JsonState<'a> {
            id: usize,
            label: Vec<&'a str>,
            initial: bool,
            #[serde(skip_serializing_if = "Option::is_none")]
            span: Option<SourceSpan>,
        }
        #[derive(Serialize)]
        struct JsonTransition {
            from: usize,
            guard: String,
            to: usize,
        }
        #[derive(Serialize)]
        struct JsonFsa<'a> {
            states: Vec<JsonState<'a>>,
            transitions: Vec<JsonTransition>,
            restart_exits: Vec<usize>,
        }
        let mut transitions: Vec<JsonTransition> = self
            .transitions
            .iter()
            .map(|(f, g, t)| JsonTransition {
                from: f.0,
                guard: g.to_string(),
                to: t.0,
            })
            .collect();
        transitions.sort_by(|a, b| (a.from, &a.guard, a.to).cmp(&(b.from, &b.guard, b.to)));
        let doc = JsonFsa {
            states: self
                .states
                .iter()
                .enumerate()
                .map(|(id, st)| JsonState {
                    id,
                    label: st.label.iter().map(|p| p.as_str()).collect(),
                    initial: id == self.initial.0,
                    span: st.provenance,
                })
                .collect(),
            transitions,
            restart_exits: self.restart_exits.iter().map(|s| s.0).collect(),
        };
        let mut text = serde_json::to_string_pretty(&doc).expect("fsa serialization");
        text.push('\n');
        text
    }
}

impl Default for Fsa {
    fn default() -> Self {
        Fsa::new()
    }
}
