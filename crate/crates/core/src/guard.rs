//! Transition guards: propositional formulas over sensor propositions.
//!
//! Transition labels are generalized from plain valuations to formulas so a
//! single edge can say `!pedestrian` or `backpack & person`. A guard `g`
//! matches a valuation `v` when `v ⊨ g`, which subsumes the subset reading.

use std::collections::BTreeSet;
use std::fmt;

use crate::props::{Prop, Valuation};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Guard {
    True,
    False,
    Prop(Prop),
    Not(Box<Guard>),
    And(Vec<Guard>),
    Or(Vec<Guard>),
}

impl Guard {
    pub fn prop(name: impl AsRef<str>) -> Self {
        Guard::Prop(Prop::new(name))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(g: Guard) -> Self {
        match g {
            Guard::True => Guard::False,
            Guard::False => Guard::True,
            Guard::Not(inner) => *inner,
            other => Guard::Not(Box::new(other)),
        }
    }

    pub fn and(items: Vec<Guard>) -> Self {
        let mut flat = Vec::new();
        for g in items {
            match g {
                Guard::True => {}
                Guard::False => return Guard::False,
                Guard::And(inner) => flat.extend(inner),
                other => flat.push(other),
            }
        }
        flat.sort();
        flat.dedup();
        match flat.len() {
            0 => Guard::True,
            1 => flat.pop().unwrap(),
            _ => Guard::And(flat),
        }
    }

    pub fn or(items: Vec<Guard>) -> Self {
        let mut flat = Vec::new();
        for g in items {
            match g {
                Guard::False => {}
                Guard::True => return Guard::True,
                Guard::Or(inner) => flat.extend(inner),
                other => flat.push(other),
            }
        }
        flat.sort();
        flat.dedup();
        match flat.len() {
            0 => Guard::False,
            1 => flat.pop().unwrap(),
            _ => Guard::Or(flat),
        }
    }

    /// Evaluates the guard against a valuation. Total: unknown props are false.
    pub fn eval(&self, v: &Valuation) -> bool {
        match self {
            Guard::True => true,
            Guard::False => false,
            Guard::Prop(p) => v.contains(p),
            Guard::Not(g) => !g.eval(v),
            Guard::And(gs) => gs.iter().all(|g| g.eval(v)),
            Guard::Or(gs) => gs.iter().any(|g| g.eval(v)),
        }
    }

    /// Props mentioned anywhere in the guard.
    pub fn props(&self) -> BTreeSet<Prop> {
        let mut out = BTreeSet::new();
        self.collect_props(&mut out);
        out
    }

    fn collect_props(&self, out: &mut BTreeSet<Prop>) {
        match self {
            Guard::True | Guard::False => {}
            Guard::Prop(p) => {
                out.insert(p.clone());
            }
            Guard::Not(g) => g.collect_props(out),
            Guard::And(gs) | Guard::Or(gs) => {
                for g in gs {
                    g.collect_props(out);
                }
            }
        }
    }

    /// True when no valuation satisfies the guard. Decided by enumeration
    /// over the guard's own props; guards are small by construction.
    pub fn is_unsatisfiable(&self) -> bool {
        let props: Vec<Prop> = self.props().into_iter().collect();
        let n = props.len();
        assert!(n <= 16, "guard over too many props");
        for bits in 0..(1u32 << n) {
            let v: Valuation = props
                .iter()
                .enumerate()
                .filter(|(i, _)| bits & (1 << i) != 0)
                .map(|(_, p)| p.clone())
                .collect();
            if self.eval(&v) {
                return false;
            }
        }
        true
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, parent: u8) -> fmt::Result {
        let prec = match self {
            Guard::True | Guard::False | Guard::Prop(_) => 3,
            Guard::Not(_) => 3,
            Guard::And(_) => 2,
            Guard::Or(_) => 1,
        };
        let paren = prec < parent;
        if paren {
            f.write_str("(")?;
        }
        match self {
            Guard::True => f.write_str("true")?,
            Guard::False => f.write_str("false")?,
            Guard::Prop(p) => write_atom(f, p)?,
            Guard::Not(g) => {
                f.write_str("!")?;
                g.fmt_prec(f, 3)?;
            }
            Guard::And(gs) => {
                for (i, g) in gs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" & ")?;
                    }
                    g.fmt_prec(f, 2)?;
                }
            }
            Guard::Or(gs) => {
                for (i, g) in gs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" | ")?;
                    }
                    g.fmt_prec(f, 1)?;
                }
            }
        }
        if paren {
            f.write_str(")")?;
        }
        Ok(())
    }
}

/// Atoms print bare when the name is a plain identifier, quoted otherwise.
pub(crate) fn write_atom(f: &mut fmt::Formatter<'_>, p: &Prop) -> fmt::Result {
    if p.as_str().contains(' ') {
        write!(f, "\"{}\"", p.as_str())
    } else {
        f.write_str(p.as_str())
    }
}

impl fmt::Display for Guard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::props::valuation;

    #[test]
    fn eval_and_display() {
        let g = Guard::and(vec![Guard::prop("backpack"), Guard::prop("person")]);
        assert!(g.eval(&valuation(["backpack", "person"])));
        assert!(!g.eval(&valuation(["backpack"])));
        assert_eq!(g.to_string(), "backpack & person");

        let g = Guard::not(Guard::prop("publish velocity"));
        assert_eq!(g.to_string(), "!\"publish velocity\"");
        assert!(g.eval(&Valuation::new()));
    }

    #[test]
    fn constructors_fold_constants() {
        assert_eq!(Guard::and(vec![Guard::True, Guard::prop("a")]), Guard::prop("a"));
        assert_eq!(Guard::and(vec![Guard::False, Guard::prop("a")]), Guard::False);
        assert_eq!(Guard::or(vec![]), Guard::False);
        assert_eq!(Guard::not(Guard::not(Guard::prop("a"))), Guard::prop("a"));
    }

    #[test]
    fn unsatisfiable_detection() {
        let contradiction = Guard::and(vec![Guard::prop("a"), Guard::not(Guard::prop("a"))]);
        assert!(contradiction.is_unsatisfiable());
        assert!(!Guard::prop("a").is_unsatisfiable());
        assert!(Guard::False.is_unsatisfiable());
    }
}
