//! Deterministic bad-prefix monitors built by formula progression.
//!
//! A monitor state is the canonical residual formula after consuming a word
//! prefix. Progression evaluates atoms against the current valuation, strips
//! one `X`, and unfolds `G g` into `progress(g) ∧ G g`. States are kept in a
//! canonical monotone-DNF form over residual obligations, which makes state
//! equality semantic enough for the closure to terminate.
//!
//! A finite word reaches the absorbing error state exactly when it is a bad
//! prefix under open-future semantics: no infinite extension satisfies the
//! formula. Residual states that are unsatisfiable over infinite words are
//! folded into the error state by a greatest-fixpoint pass after closure.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::formula::SafetyFormula;
use crate::props::{Prop, Valuation};

/// Default bound on monitor states; progression closures for the safety
/// fragment are tiny, so hitting this indicates a canonicalization bug or an
/// adversarial formula.
pub const DEFAULT_MONITOR_STATE_BUDGET: usize = 4096;

#[derive(Debug, Error)]
pub enum MonitorError {
    #[error("monitor closure exceeded the state budget of {0}")]
    StateBudgetExceeded(usize),
}

/// Negation-normal form: `Not` only over atoms, no `Implies`, operand lists
/// flattened, sorted and deduplicated. Requires the `G`-positive fragment.
pub(crate) fn nnf(f: &SafetyFormula) -> SafetyFormula {
    nnf_signed(f, true)
}

fn nnf_signed(f: &SafetyFormula, positive: bool) -> SafetyFormula {
    match f {
        SafetyFormula::True => {
            if positive {
                SafetyFormula::True
            } else {
                SafetyFormula::False
            }
        }
        SafetyFormula::False => {
            if positive {
                SafetyFormula::False
            } else {
                SafetyFormula::True
            }
        }
        SafetyFormula::Atom(p) => {
            let atom = SafetyFormula::Atom(p.clone());
            if positive {
                atom
            } else {
                SafetyFormula::not(atom)
            }
        }
        SafetyFormula::Not(g) => nnf_signed(g, !positive),
        SafetyFormula::And(gs) => {
            let items: Vec<_> = gs.iter().map(|g| nnf_signed(g, positive)).collect();
            if positive {
                mk_and(items)
            } else {
                mk_or(items)
            }
        }
        SafetyFormula::Or(gs) => {
            let items: Vec<_> = gs.iter().map(|g| nnf_signed(g, positive)).collect();
            if positive {
                mk_or(items)
            } else {
                mk_and(items)
            }
        }
        SafetyFormula::Implies(a, b) => {
            let left = nnf_signed(a, !positive);
            let right = nnf_signed(b, positive);
            if positive {
                mk_or(vec![left, right])
            } else {
                mk_and(vec![left, right])
            }
        }
        SafetyFormula::Next(g) => SafetyFormula::next(nnf_signed(g, positive)),
        SafetyFormula::Globally(g) => {
            debug_assert!(positive, "G under negation escaped fragment validation");
            SafetyFormula::globally(nnf_signed(g, true))
        }
    }
}

fn mk_and(items: Vec<SafetyFormula>) -> SafetyFormula {
    let mut flat = Vec::new();
    for f in items {
        match f {
            SafetyFormula::True => {}
            SafetyFormula::False => return SafetyFormula::False,
            SafetyFormula::And(inner) => flat.extend(inner),
            other => flat.push(other),
        }
    }
    flat.sort();
    flat.dedup();
    match flat.len() {
        0 => SafetyFormula::True,
        1 => flat.pop().unwrap(),
        _ => SafetyFormula::And(flat),
    }
}

fn mk_or(items: Vec<SafetyFormula>) -> SafetyFormula {
    let mut flat = Vec::new();
    for f in items {
        match f {
            SafetyFormula::False => {}
            SafetyFormula::True => return SafetyFormula::True,
            SafetyFormula::Or(inner) => flat.extend(inner),
            other => flat.push(other),
        }
    }
    flat.sort();
    flat.dedup();
    match flat.len() {
        0 => SafetyFormula::False,
        1 => flat.pop().unwrap(),
        _ => SafetyFormula::Or(flat),
    }
}

/// One conjunction of residual obligations (NNF formulas that must hold from
/// the next instant on).
pub(crate) type Clause = BTreeSet<SafetyFormula>;

/// Canonical residual: a monotone DNF over obligations. No clauses = false;
/// a single empty clause = true.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub(crate) struct Residual {
    clauses: BTreeSet<Clause>,
}

impl Residual {
    pub(crate) fn bottom() -> Self {
        Residual {
            clauses: BTreeSet::new(),
        }
    }

    pub(crate) fn top() -> Self {
        let mut clauses = BTreeSet::new();
        clauses.insert(Clause::new());
        Residual { clauses }
    }

    fn unit(f: SafetyFormula) -> Self {
        match f {
            SafetyFormula::True => Residual::top(),
            SafetyFormula::False => Residual::bottom(),
            other => {
                let mut clause = Clause::new();
                clause.insert(other);
                let mut clauses = BTreeSet::new();
                clauses.insert(clause);
                Residual { clauses }
            }
        }
    }

    pub(crate) fn is_false(&self) -> bool {
        self.clauses.is_empty()
    }

    fn or(mut self, other: Residual) -> Residual {
        self.clauses.extend(other.clauses);
        self
    }

    fn and(self, other: Residual) -> Residual {
        let mut out = BTreeSet::new();
        for a in &self.clauses {
            for b in &other.clauses {
                let mut c = a.clone();
                c.extend(b.iter().cloned());
                out.insert(c);
            }
        }
        Residual { clauses: out }
    }

    /// Drops clauses with complementary atom literals and non-minimal
    /// supersets. Deeper unsatisfiability is handled by the fixpoint pass.
    fn normalize(self) -> Residual {
        let mut kept: Vec<Clause> = Vec::new();
        'next: for clause in self.clauses {
            for lit in &clause {
                if let SafetyFormula::Not(inner) = lit {
                    if clause.contains(inner) {
                        continue 'next;
                    }
                }
            }
            kept.push(clause);
        }
        let mut minimal: BTreeSet<Clause> = BTreeSet::new();
        'outer: for c in &kept {
            for d in &kept {
                if d != c && d.is_subset(c) {
                    continue 'outer;
                }
            }
            minimal.insert(c.clone());
        }
        Residual { clauses: minimal }
    }

    /// Steps every clause by one letter: a clause survives as the
    /// conjunction of its obligations' progressions.
    pub(crate) fn progress(&self, v: &Valuation) -> Residual {
        let mut out = Residual::bottom();
        for clause in &self.clauses {
            let mut acc = Residual::top();
            for ob in clause {
                acc = acc.and(progress_nnf(ob, v));
                if acc.is_false() {
                    break;
                }
            }
            out = out.or(acc);
        }
        out.normalize()
    }

    fn render(&self) -> String {
        if self.is_false() {
            return "false".to_string();
        }
        let clause_strs: Vec<String> = self
            .clauses
            .iter()
            .map(|c| {
                if c.is_empty() {
                    "true".to_string()
                } else {
                    c.iter()
                        .map(|f| match f {
                            SafetyFormula::And(_) | SafetyFormula::Or(_) | SafetyFormula::Implies(..) => {
                                format!("({f})")
                            }
                            other => other.to_string(),
                        })
                        .collect::<Vec<_>>()
                        .join(" & ")
                }
            })
            .collect();
        clause_strs.join(" | ")
    }
}

/// Progression of a single NNF formula under one valuation.
fn progress_nnf(f: &SafetyFormula, v: &Valuation) -> Residual {
    match f {
        SafetyFormula::True => Residual::top(),
        SafetyFormula::False => Residual::bottom(),
        SafetyFormula::Atom(p) => {
            if v.contains(p) {
                Residual::top()
            } else {
                Residual::bottom()
            }
        }
        SafetyFormula::Not(inner) => match inner.as_ref() {
            SafetyFormula::Atom(p) => {
                if v.contains(p) {
                    Residual::bottom()
                } else {
                    Residual::top()
                }
            }
            other => panic!("non-literal negation in NNF: !{other}"),
        },
        SafetyFormula::And(fs) => {
            let mut acc = Residual::top();
            for g in fs {
                acc = acc.and(progress_nnf(g, v));
                if acc.is_false() {
                    break;
                }
            }
            acc
        }
        SafetyFormula::Or(fs) => {
            let mut acc = Residual::bottom();
            for g in fs {
                acc = acc.or(progress_nnf(g, v));
            }
            acc
        }
        SafetyFormula::Implies(..) => panic!("implication survived NNF"),
        SafetyFormula::Next(g) => Residual::unit(g.as_ref().clone()),
        SafetyFormula::Globally(g) => progress_nnf(g, v)
            .and(Residual::unit(SafetyFormula::globally(g.as_ref().clone())))
            .normalize(),
    }
}

/// Progression on raw formulas, canonicalized. The result is `false`
/// exactly when every extension of the consumed word violates the
/// property, so residuals no infinite word can discharge fold to `false`.
pub fn progress(f: &SafetyFormula, v: &Valuation) -> SafetyFormula {
    let res = Residual::unit(nnf(f)).progress(v);
    let formula = residual_to_formula(&res);
    if formula != SafetyFormula::False && crate::semantics::is_bad_prefix(&formula, &[]) {
        return SafetyFormula::False;
    }
    formula
}

fn residual_to_formula(r: &Residual) -> SafetyFormula {
    if r.is_false() {
        return SafetyFormula::False;
    }
    let clauses: Vec<SafetyFormula> = r
        .clauses
        .iter()
        .map(|c| mk_and(c.iter().cloned().collect()))
        .collect();
    mk_or(clauses)
}

/// Identifier of a monitor state.
pub type MonitorStateId = usize;

/// Deterministic bad-prefix recognizer. Total over valuations of the
/// formula's own atoms; other props are ignored in the step key.
#[derive(Debug, Clone)]
pub struct Monitor {
    /// Source formula the monitor was built from.
    pub formula: SafetyFormula,
    /// Props the step table is keyed on, sorted.
    relevant: Vec<Prop>,
    /// Human-readable residual per state; index 0 is the initial state.
    state_names: Vec<String>,
    /// `step[s][key]` where key is the projected valuation bitmask.
    step: Vec<Vec<MonitorStateId>>,
    error: MonitorStateId,
    initial: MonitorStateId,
}

impl Monitor {
    pub fn initial(&self) -> MonitorStateId {
        self.initial
    }

    pub fn error(&self) -> MonitorStateId {
        self.error
    }

    pub fn is_error(&self, s: MonitorStateId) -> bool {
        s == self.error
    }

    pub fn state_count(&self) -> usize {
        self.state_names.len()
    }

    pub fn state_name(&self, s: MonitorStateId) -> &str {
        &self.state_names[s]
    }

    fn key(&self, v: &Valuation) -> usize {
        let mut k = 0usize;
        for (i, p) in self.relevant.iter().enumerate() {
            if v.contains(p) {
                k |= 1 << i;
            }
        }
        k
    }

    pub fn step(&self, s: MonitorStateId, v: &Valuation) -> MonitorStateId {
        self.step[s][self.key(v)]
    }

    /// Runs a word from the initial state; true when it is a bad prefix.
    pub fn word_is_bad(&self, word: &[Valuation]) -> bool {
        let mut s = self.initial;
        for v in word {
            s = self.step(s, v);
            if self.is_error(s) {
                return true;
            }
        }
        self.is_error(s)
    }
}

pub fn build_monitor(f: &SafetyFormula) -> Result<Monitor, MonitorError> {
    build_monitor_budgeted(f, DEFAULT_MONITOR_STATE_BUDGET)
}

pub fn build_monitor_budgeted(
    f: &SafetyFormula,
    budget: usize,
) -> Result<Monitor, MonitorError> {
    let relevant: Vec<Prop> = f.atoms().into_iter().collect();
    let letters: Vec<Valuation> = (0..(1usize << relevant.len()))
        .map(|bits| {
            relevant
                .iter()
                .enumerate()
                .filter(|(i, _)| bits & (1 << i) != 0)
                .map(|(_, p)| p.clone())
                .collect()
        })
        .collect();

    let mut index: HashMap<Residual, MonitorStateId> = HashMap::new();
    let mut states: Vec<Residual> = Vec::new();
    fn intern(
        r: Residual,
        index: &mut HashMap<Residual, MonitorStateId>,
        states: &mut Vec<Residual>,
    ) -> MonitorStateId {
        if let Some(&id) = index.get(&r) {
            return id;
        }
        let id = states.len();
        states.push(r.clone());
        index.insert(r, id);
        id
    }

    let initial = intern(Residual::unit(nnf(f)), &mut index, &mut states);
    // states only ever grow at the tail, so processing in index order
    // closes the table.
    let mut step: Vec<Vec<MonitorStateId>> = Vec::new();
    while step.len() < states.len() {
        let sid = step.len();
        let mut row = Vec::with_capacity(letters.len());
        for letter in &letters {
            let next = states[sid].progress(letter);
            let nid = intern(next, &mut index, &mut states);
            if states.len() > budget {
                return Err(MonitorError::StateBudgetExceeded(budget));
            }
            row.push(nid);
        }
        step.push(row);
    }

    // Ensure an explicit error state exists.
    let error = intern(Residual::bottom(), &mut index, &mut states);
    while step.len() < states.len() {
        let sid = step.len();
        let mut row = Vec::with_capacity(letters.len());
        for letter in &letters {
            let next = states[sid].progress(letter);
            let nid = intern(next, &mut index, &mut states);
            row.push(nid);
        }
        step.push(row);
    }

    // Greatest fixpoint: a state is alive when some letter leads to a live
    // state. States with no live successor cannot head any infinite word and
    // are folded into error (open-future semantics).
    let n = states.len();
    let mut alive: Vec<bool> = (0..n).map(|i| !states[i].is_false()).collect();
    loop {
        let mut changed = false;
        for s in 0..n {
            if alive[s] && !step[s].iter().any(|&t| alive[t]) {
                alive[s] = false;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let remap: Vec<MonitorStateId> = (0..n).map(|s| if alive[s] { s } else { error }).collect();

    // Compact to reachable states, error last unless initial is dead.
    let initial = remap[initial];
    let mut order: Vec<MonitorStateId> = Vec::new();
    let mut seen: BTreeMap<MonitorStateId, MonitorStateId> = BTreeMap::new();
    let mut bfs = VecDeque::new();
    bfs.push_back(initial);
    while let Some(s) = bfs.pop_front() {
        if seen.contains_key(&s) {
            continue;
        }
        seen.insert(s, order.len());
        order.push(s);
        for &t in &step[s] {
            let t = remap[t];
            if !seen.contains_key(&t) {
                bfs.push_back(t);
            }
        }
    }
    if let std::collections::btree_map::Entry::Vacant(slot) = seen.entry(error) {
        slot.insert(order.len());
        order.push(error);
    }

    let mut new_step = Vec::with_capacity(order.len());
    let mut state_names = Vec::with_capacity(order.len());
    for &old in &order {
        state_names.push(if old == error && states[old].is_false() {
            "false".to_string()
        } else {
            states[old].render()
        });
        new_step.push(step[old].iter().map(|&t| seen[&remap[t]]).collect());
    }
    // Error row maps to itself even if error was unreachable.
    let error_new = seen[&error];
    new_step[error_new] = vec![error_new; letters.len()];

    Ok(Monitor {
        formula: f.clone(),
        relevant,
        state_names,
        step: new_step,
        error: error_new,
        initial: seen[&initial],
    })
}

impl fmt::Display for Monitor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "monitor for {}", self.formula)?;
        for (i, name) in self.state_names.iter().enumerate() {
            let tag = if i == self.initial {
                " (initial)"
            } else if i == self.error {
                " (error)"
            } else {
                ""
            };
            writeln!(f, "  m{i}{tag}: {name}")?;
        }
        Ok(())
    }
}
