//! Export of a product automaton to the SMV textual format for optional
//! cross-checking with an external model checker. Verdicts produced by this
//! crate never depend on the export.

use std::collections::BTreeMap;

use crate::formula::SafetyFormula;
use crate::product::ProductAutomaton;
use crate::props::Prop;

/// SMV identifiers cannot contain spaces; collisions after sanitization get
/// numeric suffixes deterministically.
fn sanitize_props(props: impl Iterator<Item = Prop>) -> BTreeMap<Prop, String> {
    let mut used: BTreeMap<String, usize> = BTreeMap::new();
    let mut out = BTreeMap::new();
    for p in props {
        let base: String = p
            .as_str()
            .chars()
            .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
            .collect();
        let n = used.entry(base.clone()).or_insert(0);
        let name = if *n == 0 { base.clone() } else { format!("{base}_{n}") };
        *n += 1;
        out.insert(p, name);
    }
    out
}

fn formula_to_smv(f: &SafetyFormula, names: &BTreeMap<Prop, String>) -> String {
    match f {
        SafetyFormula::True => "TRUE".to_string(),
        SafetyFormula::False => "FALSE".to_string(),
        SafetyFormula::Atom(p) => names
            .get(p)
            .cloned()
            // Atoms outside the system are constantly false.
            .unwrap_or_else(|| "FALSE".to_string()),
        SafetyFormula::Not(g) => format!("!({})", formula_to_smv(g, names)),
        SafetyFormula::And(gs) => {
            let parts: Vec<String> = gs.iter().map(|g| formula_to_smv(g, names)).collect();
            format!("({})", parts.join(" & "))
        }
        SafetyFormula::Or(gs) => {
            let parts: Vec<String> = gs.iter().map(|g| formula_to_smv(g, names)).collect();
            format!("({})", parts.join(" | "))
        }
        SafetyFormula::Implies(a, b) => format!(
            "({} -> {})",
            formula_to_smv(a, names),
            formula_to_smv(b, names)
        ),
        SafetyFormula::Next(g) => format!("X ({})", formula_to_smv(g, names)),
        SafetyFormula::Globally(g) => format!("G ({})", formula_to_smv(g, names)),
    }
}

/// Renders the product as an SMV module: a state variable over the product
/// states, the transition relation, one DEFINE per proposition, and one
/// LTLSPEC per specification.
pub fn to_smv(p: &ProductAutomaton, specs: &[SafetyFormula]) -> String {
    let names = sanitize_props(
        p.sensor_props
            .iter()
            .chain(p.exec_props.iter())
            .cloned(),
    );

    let mut out = String::new();
    out.push_str("MODULE main\n");
    out.push_str("VAR\n");
    let state_list: Vec<String> = (0..p.state_count()).map(|i| format!("s{i}")).collect();
    out.push_str(&format!("  state : {{{}}};\n", state_list.join(", ")));

    let mut initials = p.initials.clone();
    initials.sort_unstable();
    let init_list: Vec<String> = initials.iter().map(|i| format!("s{i}")).collect();
    out.push_str(&format!("INIT state in {{{}}};\n", init_list.join(", ")));

    let succs = p.successors();
    out.push_str("TRANS\n  case\n");
    for (i, list) in succs.iter().enumerate() {
        if list.is_empty() {
            // Dead ends stay put so the relation is total.
            out.push_str(&format!("    state = s{i} : next(state) = s{i};\n"));
        } else {
            let targets: Vec<String> = list.iter().map(|t| format!("s{t}")).collect();
            out.push_str(&format!(
                "    state = s{i} : next(state) in {{{}}};\n",
                targets.join(", ")
            ));
        }
    }
    out.push_str("  esac;\n");

    out.push_str("DEFINE\n");
    for (prop, name) in &names {
        let holding: Vec<String> = (0..p.state_count())
            .filter(|&i| p.labels[i].contains(prop))
            .map(|i| format!("state = s{i}"))
            .collect();
        if holding.is_empty() {
            out.push_str(&format!("  {name} := FALSE;\n"));
        } else {
            out.push_str(&format!("  {name} := {};\n", holding.join(" | ")));
        }
    }

    for f in specs {
        out.push_str(&format!("LTLSPEC {};\n", formula_to_smv(f, &names)));
    }
    out
}
