//! Brute-force bad-prefix semantics, independent of the monitor machinery.
//!
//! A finite word is a bad prefix of a safety formula when no infinite
//! extension satisfies it. This module decides that by a tableau expansion:
//! a configuration is the set of alternative obligation sets that must hold
//! from the current instant on. Consuming a letter rewrites each obligation
//! (`G g` re-arms itself, `X g` defers `g`, booleans branch), and a word is
//! bad exactly when no remaining obligation set can head an infinite word —
//! a greatest-fixpoint computation over the finite obligation-set graph.
//!
//! This path shares no code with formula progression or residual
//! canonicalization and serves as the oracle the monitor is checked against.

use std::collections::{BTreeSet, HashMap, VecDeque};

use crate::formula::SafetyFormula;
use crate::props::{Prop, Valuation};

/// Obligations that must all hold from the current instant on.
pub type ObSet = BTreeSet<SafetyFormula>;
/// Alternative obligation sets; empty means the word is already dead.
pub type Config = BTreeSet<ObSet>;

/// Alternatives for "what must hold from the next instant" so that `f`
/// (in NNF) holds now under `v`. Empty vector = impossible now.
fn alternatives(f: &SafetyFormula, v: &Valuation) -> Vec<ObSet> {
    match f {
        SafetyFormula::True => vec![ObSet::new()],
        SafetyFormula::False => vec![],
        SafetyFormula::Atom(p) => {
            if v.contains(p) {
                vec![ObSet::new()]
            } else {
                vec![]
            }
        }
        SafetyFormula::Not(inner) => match inner.as_ref() {
            SafetyFormula::Atom(p) => {
                if v.contains(p) {
                    vec![]
                } else {
                    vec![ObSet::new()]
                }
            }
            other => panic!("non-literal negation reached the tableau: !{other}"),
        },
        SafetyFormula::And(fs) => {
            let mut acc: Vec<ObSet> = vec![ObSet::new()];
            for g in fs {
                let alts = alternatives(g, v);
                let mut next = Vec::new();
                for a in &acc {
                    for b in &alts {
                        let mut merged = a.clone();
                        merged.extend(b.iter().cloned());
                        next.push(merged);
                    }
                }
                acc = next;
                if acc.is_empty() {
                    break;
                }
            }
            acc
        }
        SafetyFormula::Or(fs) => fs.iter().flat_map(|g| alternatives(g, v)).collect(),
        SafetyFormula::Implies(..) => panic!("implication reached the tableau"),
        SafetyFormula::Next(g) => {
            let mut s = ObSet::new();
            s.insert(g.as_ref().clone());
            vec![s]
        }
        SafetyFormula::Globally(g) => alternatives(g, v)
            .into_iter()
            .map(|mut s| {
                s.insert(SafetyFormula::globally(g.as_ref().clone()));
                s
            })
            .collect(),
    }
}

fn step_obset(s: &ObSet, v: &Valuation) -> Vec<ObSet> {
    let mut acc: Vec<ObSet> = vec![ObSet::new()];
    for ob in s {
        let alts = alternatives(ob, v);
        let mut next = Vec::new();
        for a in &acc {
            for b in &alts {
                let mut merged = a.clone();
                merged.extend(b.iter().cloned());
                next.push(merged);
            }
        }
        acc = next;
        if acc.is_empty() {
            break;
        }
    }
    acc
}

/// Word-by-word bad-prefix decision procedure for one formula.
pub struct PrefixChecker {
    relevant: Vec<Prop>,
    initial: Config,
    /// Survivability of every obligation set reachable from the initial
    /// configuration: whether some infinite word discharges it forever.
    alive: HashMap<ObSet, bool>,
}

impl PrefixChecker {
    pub fn new(f: &SafetyFormula) -> PrefixChecker {
        let nnf = crate::monitor::nnf(f);
        let relevant: Vec<Prop> = f.atoms().into_iter().collect();
        let letters = letters_over(&relevant);

        let mut seed = ObSet::new();
        seed.insert(nnf);
        let mut initial = Config::new();
        initial.insert(seed);

        // Everything ever reachable by stepping descends from the initial
        // configuration, so the obligation-set graph is closed once here.
        let mut universe: Vec<ObSet> = Vec::new();
        let mut idx: HashMap<ObSet, usize> = HashMap::new();
        let mut queue: VecDeque<usize> = VecDeque::new();
        for s in &initial {
            idx.insert(s.clone(), universe.len());
            queue.push_back(universe.len());
            universe.push(s.clone());
        }
        let mut succs: Vec<BTreeSet<usize>> = Vec::new();
        while let Some(sid) = queue.pop_front() {
            while succs.len() <= sid {
                succs.push(BTreeSet::new());
            }
            let s = universe[sid].clone();
            for v in &letters {
                for t in step_obset(&s, v) {
                    let tid = *idx.entry(t.clone()).or_insert_with(|| {
                        let i = universe.len();
                        universe.push(t.clone());
                        queue.push_back(i);
                        i
                    });
                    succs[sid].insert(tid);
                }
            }
        }
        while succs.len() < universe.len() {
            succs.push(BTreeSet::new());
        }

        let mut alive_bits = vec![true; universe.len()];
        loop {
            let mut changed = false;
            for i in 0..universe.len() {
                if alive_bits[i] && !succs[i].iter().any(|&j| alive_bits[j]) {
                    alive_bits[i] = false;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        let alive = universe.into_iter().zip(alive_bits).collect();

        PrefixChecker {
            relevant,
            initial,
            alive,
        }
    }

    pub fn initial_config(&self) -> Config {
        self.initial.clone()
    }

    /// Steps a configuration by one letter (projected to relevant props).
    pub fn step(&self, config: &Config, v: &Valuation) -> Config {
        let projected: Valuation = v
            .iter()
            .filter(|p| self.relevant.contains(p))
            .cloned()
            .collect();
        let mut out = Config::new();
        for s in config {
            for t in step_obset(s, &projected) {
                out.insert(t);
            }
        }
        out
    }

    /// True when the consumed word is a bad prefix: no alternative can be
    /// extended to an infinite satisfying word.
    pub fn is_dead(&self, config: &Config) -> bool {
        !config.iter().any(|s| *self.alive.get(s).unwrap_or(&false))
    }
}

fn letters_over(props: &[Prop]) -> Vec<Valuation> {
    (0..(1usize << props.len()))
        .map(|bits| {
            props
                .iter()
                .enumerate()
                .filter(|(i, _)| bits & (1 << i) != 0)
                .map(|(_, p)| p.clone())
                .collect()
        })
        .collect()
}

/// Decides bad-prefix membership of `word` for `f` under open-future
/// semantics.
pub fn is_bad_prefix(f: &SafetyFormula, word: &[Valuation]) -> bool {
    let checker = PrefixChecker::new(f);
    let mut config = checker.initial_config();
    for v in word {
        config = checker.step(&config, v);
        if config.is_empty() {
            return true;
        }
    }
    checker.is_dead(&config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{parse_fragment, parse_spec};
    use crate::props::valuation;

    #[test]
    fn phi1_bad_and_good_words() {
        let f = parse_spec(r#"G( "pedestrian" -> X !"publish velocity" )"#).unwrap();
        assert!(is_bad_prefix(
            &f,
            &[valuation(["pedestrian"]), valuation(["publish velocity"])]
        ));
        assert!(!is_bad_prefix(
            &f,
            &[valuation(["pedestrian"]), valuation(["stop"])]
        ));
        assert!(!is_bad_prefix(&f, &[valuation(["publish velocity"])]));
    }

    #[test]
    fn unextendable_word_is_bad_before_the_conflict_lands() {
        let f = parse_fragment(r#"G(X "a" & X !"a")"#).unwrap();
        assert!(is_bad_prefix(&f, &[Valuation::new()]));
    }

    #[test]
    fn stateless_clause_decides_per_letter() {
        let f = parse_spec(r#"G( !("person" & "backpack") -> !"ask" )"#).unwrap();
        assert!(is_bad_prefix(&f, &[valuation(["ask"])]));
        assert!(!is_bad_prefix(&f, &[valuation(["ask", "person", "backpack"])]));
    }

    #[test]
    fn empty_word_of_satisfiable_formula_is_not_bad() {
        let f = parse_spec(r#"G(!"a")"#).unwrap();
        assert!(!is_bad_prefix(&f, &[]));
    }

    #[test]
    fn badness_is_monotone_under_extension() {
        let f = parse_spec(r#"G("a" -> X "b")"#).unwrap();
        let bad = vec![valuation(["a"]), Valuation::new()];
        assert!(is_bad_prefix(&f, &bad));
        for extra in [Valuation::new(), valuation(["a"]), valuation(["b"])] {
            let mut w = bad.clone();
            w.push(extra);
            assert!(is_bad_prefix(&f, &w));
        }
    }
}
