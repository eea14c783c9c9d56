//! Atomic propositions and valuations.
//!
//! A proposition is a named boolean fact. Sensor propositions describe the
//! environment (the return values of subscribing functions), execution
//! propositions describe the actions the system performs. A valuation is the
//! set of propositions that are true at one instant.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

/// Interned proposition name. Names may contain internal spaces
/// (e.g. `publish velocity`), so formulas quote them.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Prop(Arc<str>);

impl Prop {
    pub fn new(name: impl AsRef<str>) -> Self {
        Prop(Arc::from(name.as_ref()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Prop {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Prop {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Prop({})", self.0)
    }
}

impl From<&str> for Prop {
    fn from(s: &str) -> Self {
        Prop::new(s)
    }
}

impl Serialize for Prop {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for Prop {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        Ok(Prop::new(String::deserialize(d)?))
    }
}

/// Whether a proposition describes a sensed condition or an executed action.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PropKind {
    Sensor,
    Exec,
}

/// The set of propositions true at one instant.
pub type Valuation = BTreeSet<Prop>;

/// Builds a valuation from string names.
pub fn valuation<I, S>(props: I) -> Valuation
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    props.into_iter().map(Prop::new).collect()
}

/// Renders a valuation as `{a, b}`, sorted, `{}` when empty.
pub fn fmt_valuation(v: &Valuation) -> String {
    let mut out = String::from("{");
    for (i, p) in v.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        out.push_str(p.as_str());
    }
    out.push('}');
    out
}

/// Checks a proposition name: identifier start, then identifier characters
/// with single internal spaces allowed.
pub fn valid_prop_name(name: &str) -> bool {
    let mut chars = name.chars();
    let Some(first) = chars.next() else {
        return false;
    };
    if !(first.is_ascii_alphabetic() || first == '_') {
        return false;
    }
    let mut prev_space = false;
    for c in chars {
        if c == ' ' {
            if prev_space {
                return false;
            }
            prev_space = true;
        } else if c.is_ascii_alphanumeric() || c == '_' {
            prev_space = false;
        } else {
            return false;
        }
    }
    !prev_space
}

/// Trims and collapses runs of internal whitespace to single spaces.
pub fn normalize_prop_name(raw: &str) -> String {
    raw.split_whitespace().collect::<Vec<_>>().join(" ")
}
