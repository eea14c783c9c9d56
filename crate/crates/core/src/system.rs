//! The autonomous-system description: declared functions, atomic
//! propositions, the call-to-proposition mapping, and the safety
//! specifications, plus the clique transition system over sensor
//! propositions.
//!
//! The mapping is keyed by (function name, argument pattern) because the
//! same function called with different literal arguments can denote
//! different propositions (`is_in_room("person")` vs `is_in_room("backpack")`).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formula::{self, SafetyFormula};
use crate::props::{normalize_prop_name, valid_prop_name, Prop, PropKind, Valuation};

/// Default cap on |AP_S|; the transition system is materialized explicitly.
pub const DEFAULT_SENSOR_PROP_CAP: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FunctionKind {
    /// Boolean-returning API call that reads the environment.
    Subscribing,
    /// Action-publishing API call.
    Execution,
}

/// A declared robot API function. `doc` is the textual description sent to
/// plan generators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionDecl {
    pub name: String,
    pub kind: FunctionKind,
    #[serde(default)]
    pub doc: String,
}

/// One element of an argument pattern: a literal string or a wildcard.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ArgMatcher {
    Literal(String),
    Wildcard,
}

impl Serialize for ArgMatcher {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            ArgMatcher::Literal(lit) => s.serialize_str(lit),
            ArgMatcher::Wildcard => s.serialize_str("*"),
        }
    }
}

impl<'de> Deserialize<'de> for ArgMatcher {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(d)?;
        Ok(if raw == "*" {
            ArgMatcher::Wildcard
        } else {
            ArgMatcher::Literal(raw)
        })
    }
}

/// Maps calls of `function` whose arguments match `args` to `prop`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CallMapping {
    pub function: String,
    pub args: Vec<ArgMatcher>,
    pub prop: Prop,
}

impl CallMapping {
    /// A fallback pattern is nonempty and all-wildcard; it matches any
    /// argument list of any arity. Other patterns match positionally.
    pub fn is_fallback(&self) -> bool {
        !self.args.is_empty() && self.args.iter().all(|m| matches!(m, ArgMatcher::Wildcard))
    }

    fn matches(&self, args: &[CallArg]) -> bool {
        if self.is_fallback() {
            return true;
        }
        if self.args.len() != args.len() {
            return false;
        }
        self.args.iter().zip(args).all(|(m, a)| match (m, a) {
            (ArgMatcher::Wildcard, _) => true,
            // Runtime-unknown arguments (variables) never match a literal:
            // never guess a proposition.
            (ArgMatcher::Literal(_), CallArg::Unknown) => false,
            (ArgMatcher::Literal(lit), CallArg::Literal(v)) => lit == v,
        })
    }

    /// Two non-fallback patterns overlap when some concrete call matches both.
    fn overlaps(&self, other: &CallMapping) -> bool {
        if self.args.len() != other.args.len() {
            return false;
        }
        self.args.iter().zip(&other.args).all(|(a, b)| match (a, b) {
            (ArgMatcher::Literal(x), ArgMatcher::Literal(y)) => x == y,
            _ => true,
        })
    }
}

/// An argument of a call site: a literal known at compile time, or a value
/// only known at runtime (variable, nested call).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CallArg {
    Literal(String),
    Unknown,
}

/// Result of mapping a call site to a proposition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MapOutcome {
    Mapped(Prop),
    NotMapped,
}

#[derive(Debug, Error)]
pub enum SystemError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed system file: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid specification formula {index}: {source}")]
    Spec {
        index: usize,
        source: formula::FormulaError,
    },
    #[error("validation: {0}")]
    Validation(String),
    #[error("ambiguous mapping: call {function}({args:?}) matches more than one pattern")]
    AmbiguousMapping { function: String, args: Vec<String> },
    #[error("{count} sensor propositions exceed the explicit-construction cap of {cap}")]
    TooManyProps { count: usize, cap: usize },
}

fn validation(msg: impl Into<String>) -> SystemError {
    SystemError::Validation(msg.into())
}

/// On-disk shape of a system file.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct SystemFile {
    functions: Vec<FunctionDecl>,
    propositions: Vec<PropDecl>,
    mappings: Vec<CallMapping>,
    specs: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropDecl {
    pub name: Prop,
    pub kind: PropKind,
}

/// The validated system tuple: functions, propositions, call mappings and
/// safety specifications.
#[derive(Debug, Clone)]
pub struct SystemSpec {
    pub functions: Vec<FunctionDecl>,
    pub props: Vec<PropDecl>,
    pub mappings: Vec<CallMapping>,
    /// Parsed specification formulas, paired with their source text.
    pub specs: Vec<(String, SafetyFormula)>,
}

impl SystemSpec {
    pub fn from_json(text: &str) -> Result<SystemSpec, SystemError> {
        let file: SystemFile = serde_json::from_str(text)?;
        let mut specs = Vec::new();
        for (index, raw) in file.specs.iter().enumerate() {
            let f = formula::parse_spec(raw).map_err(|source| SystemError::Spec { index, source })?;
            specs.push((raw.clone(), f));
        }
        let spec = SystemSpec {
            functions: file.functions,
            props: file.propositions,
            mappings: file.mappings,
            specs,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        let file = SystemFile {
            functions: self.functions.clone(),
            propositions: self.props.clone(),
            mappings: self.mappings.clone(),
            specs: self.specs.iter().map(|(raw, _)| raw.clone()).collect(),
        };
        let mut out = serde_json::to_string_pretty(&file).expect("system serialization");
        out.push('\n');
        out
    }

    fn validate(&self) -> Result<(), SystemError> {
        let mut seen = BTreeSet::new();
        for decl in &self.props {
            let name = decl.name.as_str();
            if normalize_prop_name(name) != name || !valid_prop_name(name) {
                return Err(validation(format!("invalid proposition name {name:?}")));
            }
            if !seen.insert(name.to_string()) {
                return Err(validation(format!("duplicate proposition {name:?}")));
            }
        }
        let mut fn_names = BTreeSet::new();
        for f in &self.functions {
            if !fn_names.insert(f.name.clone()) {
                return Err(validation(format!("duplicate function {:?}", f.name)));
            }
        }
        let by_name: BTreeMap<&str, &FunctionDecl> =
            self.functions.iter().map(|f| (f.name.as_str(), f)).collect();
        let prop_kind: BTreeMap<&Prop, PropKind> =
            self.props.iter().map(|d| (&d.name, d.kind)).collect();

        let mut per_function: BTreeMap<&str, Vec<&CallMapping>> = BTreeMap::new();
        for m in &self.mappings {
            let Some(decl) = by_name.get(m.function.as_str()) else {
                return Err(validation(format!(
                    "mapping refers to undeclared function {:?}",
                    m.function
                )));
            };
            let Some(kind) = prop_kind.get(&m.prop) else {
                return Err(validation(format!(
                    "mapping refers to undeclared proposition {:?}",
                    m.prop.as_str()
                )));
            };
            let expected = match decl.kind {
                FunctionKind::Subscribing => PropKind::Sensor,
                FunctionKind::Execution => PropKind::Exec,
            };
            if *kind != expected {
                return Err(validation(format!(
                    "mapping {} -> {}: proposition kind does not agree with function kind",
                    m.function,
                    m.prop.as_str()
                )));
            }
            per_function.entry(m.function.as_str()).or_default().push(m);
        }
        for (name, maps) in &per_function {
            let fallbacks = maps.iter().filter(|m| m.is_fallback()).count();
            if fallbacks > 1 {
                return Err(validation(format!(
                    "function {name:?} has more than one all-wildcard fallback pattern"
                )));
            }
            let concrete: Vec<_> = maps.iter().filter(|m| !m.is_fallback()).collect();
            for i in 0..concrete.len() {
                for j in i + 1..concrete.len() {
                    if concrete[i].overlaps(concrete[j]) {
                        return Err(validation(format!(
                            "function {name:?} has overlapping argument patterns {:?} and {:?}",
                            concrete[i].args, concrete[j].args
                        )));
                    }
                }
            }
        }
        for f in &self.functions {
            if f.kind == FunctionKind::Execution && !per_function.contains_key(f.name.as_str()) {
                return Err(validation(format!(
                    "execution function {:?} has no mapping",
                    f.name
                )));
            }
        }
        let declared: BTreeSet<&Prop> = self.props.iter().map(|d| &d.name).collect();
        for (raw, f) in &self.specs {
            for atom in f.atoms() {
                if !declared.contains(&atom) {
                    return Err(validation(format!(
                        "specification {raw:?} references undeclared proposition {:?}",
                        atom.as_str()
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn sensor_props(&self) -> Vec<Prop> {
        self.props
            .iter()
            .filter(|d| d.kind == PropKind::Sensor)
            .map(|d| d.name.clone())
            .collect()
    }

    pub fn exec_props(&self) -> Vec<Prop> {
        self.props
            .iter()
            .filter(|d| d.kind == PropKind::Exec)
            .map(|d| d.name.clone())
            .collect()
    }

    pub fn prop_kind(&self, p: &Prop) -> Option<PropKind> {
        self.props.iter().find(|d| &d.name == p).map(|d| d.kind)
    }

    pub fn function(&self, name: &str) -> Option<&FunctionDecl> {
        self.functions.iter().find(|f| f.name == name)
    }

    /// Resolves a call site to its proposition. Literal patterns take
    /// precedence over the all-wildcard fallback; `NotMapped` when the callee
    /// is undeclared or nothing matches.
    pub fn map_call(&self, callee: &str, args: &[CallArg]) -> Result<MapOutcome, SystemError> {
        if self.function(callee).is_none() {
            return Ok(MapOutcome::NotMapped);
        }
        let candidates: Vec<&CallMapping> = self
            .mappings
            .iter()
            .filter(|m| m.function == callee && !m.is_fallback() && m.matches(args))
            .collect();
        match candidates.len() {
            0 => {}
            1 => return Ok(MapOutcome::Mapped(candidates[0].prop.clone())),
            _ => {
                return Err(SystemError::AmbiguousMapping {
                    function: callee.to_string(),
                    args: args
                        .iter()
                        .map(|a| match a {
                            CallArg::Literal(s) => s.clone(),
                            CallArg::Unknown => "<unknown>".to_string(),
                        })
                        .collect(),
                })
            }
        }
        for m in self.mappings.iter().filter(|m| m.function == callee) {
            if m.is_fallback() {
                return Ok(MapOutcome::Mapped(m.prop.clone()));
            }
        }
        Ok(MapOutcome::NotMapped)
    }

    /// The API description block sent to plan generators: one line per
    /// declared function with its doc string.
    pub fn api_description(&self) -> String {
        let mut out = String::from("Available robot API functions:\n");
        for f in &self.functions {
            let kind = match f.kind {
                FunctionKind::Subscribing => "subscribing",
                FunctionKind::Execution => "execution",
            };
            out.push_str(&format!("- {}() [{}]: {}\n", f.name, kind, f.doc));
        }
        out
    }
}

pub fn load_system(path: impl AsRef<Path>) -> Result<SystemSpec, SystemError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| SystemError::Io {
        path: path.display().to_string(),
        source,
    })?;
    SystemSpec::from_json(&text)
}

pub fn save_system(spec: &SystemSpec, path: impl AsRef<Path>) -> Result<(), SystemError> {
    let path = path.as_ref();
    fs::write(path, spec.to_json()).map_err(|source| SystemError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Identifier of a transition-system state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TsStateId(pub usize);

impl fmt::Display for TsStateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "q{}", self.0)
    }
}

/// The clique transition system: one state per subset of the sensor
/// propositions, transitions between every pair of states (self-loops
/// included). Models arbitrary environment evolution.
#[derive(Debug, Clone)]
pub struct TransitionSystem {
    labels: Vec<Valuation>,
    sensor_props: Vec<Prop>,
}

impl TransitionSystem {
    pub fn state_count(&self) -> usize {
        self.labels.len()
    }

    pub fn states(&self) -> impl Iterator<Item = TsStateId> {
        (0..self.labels.len()).map(TsStateId)
    }

    pub fn label(&self, q: TsStateId) -> &Valuation {
        &self.labels[q.0]
    }

    pub fn sensor_props(&self) -> &[Prop] {
        &self.sensor_props
    }

    /// The complete transition relation, materialized pairwise.
    pub fn transitions(&self) -> impl Iterator<Item = (TsStateId, TsStateId)> + '_ {
        self.states()
            .flat_map(move |from| self.states().map(move |to| (from, to)))
    }

    pub fn transition_count(&self) -> usize {
        self.state_count() * self.state_count()
    }
}

/// Builds the clique transition system over the system's sensor props.
pub fn build_transition_system(spec: &SystemSpec) -> Result<TransitionSystem, SystemError> {
    build_transition_system_capped(spec, DEFAULT_SENSOR_PROP_CAP)
}

pub fn build_transition_system_capped(
    spec: &SystemSpec,
    cap: usize,
) -> Result<TransitionSystem, SystemError> {
    let props = spec.sensor_props();
    build_ts_from_props(&props, cap)
}

pub fn build_ts_from_props(props: &[Prop], cap: usize) -> Result<TransitionSystem, SystemError> {
    if props.len() > cap {
        return Err(SystemError::TooManyProps {
            count: props.len(),
            cap,
        });
    }
    let n = props.len();
    let mut labels = Vec::with_capacity(1 << n);
    for bits in 0..(1u64 << n) {
        let v: Valuation = props
            .iter()
            .enumerate()
            .filter(|(i, _)| bits & (1 << i) != 0)
            .map(|(_, p)| p.clone())
            .collect();
        labels.push(v);
    }
    Ok(TransitionSystem {
        labels,
        sensor_props: props.to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::props::valuation;

    fn driving_json() -> &'static str {
        r#"{
          "functions": [
            {"name": "pedestrian_observed", "kind": "subscribing", "doc": "True if a pedestrian is ahead."},
            {"name": "velocity_publisher", "kind": "execution", "doc": "Publishes linear and angular velocity."},
            {"name": "stop", "kind": "execution", "doc": "Stops the robot."}
          ],
          "propositions": [
            {"name": "pedestrian", "kind": "sensor"},
            {"name": "publish velocity", "kind": "exec"},
            {"name": "stop", "kind": "exec"}
          ],
          "mappings": [
            {"function": "pedestrian_observed", "args": ["*"], "prop": "pedestrian"},
            {"function": "velocity_publisher", "args": ["*"], "prop": "publish velocity"},
            {"function": "stop", "args": ["*"], "prop": "stop"}
          ],
          "specs": ["G( \"pedestrian\" -> X !\"publish velocity\" )"]
        }"#
    }

    fn codebotler_json() -> &'static str {
        r#"{
          "functions": [
            {"name": "is_in_room", "kind": "subscribing", "doc": "True if the named object is in the room."},
            {"name": "get_current_location", "kind": "subscribing", "doc": "Returns the robot location."},
            {"name": "ask", "kind": "execution", "doc": "Asks a person a question."},
            {"name": "go_to", "kind": "execution", "doc": "Navigates to a location."}
          ],
          "propositions": [
            {"name": "person", "kind": "sensor"},
            {"name": "backpack", "kind": "sensor"},
            {"name": "ask", "kind": "exec"},
            {"name": "go", "kind": "exec"}
          ],
          "mappings": [
            {"function": "is_in_room", "args": ["person"], "prop": "person"},
            {"function": "is_in_room", "args": ["backpack"], "prop": "backpack"},
            {"function": "ask", "args": ["*"], "prop": "ask"},
            {"function": "go_to", "args": ["*"], "prop": "go"}
          ],
          "specs": ["G( !(\"person\" & \"backpack\") -> !\"ask\" )"]
        }"#
    }

    #[test]
    fn loads_driving_system() {
        let spec = SystemSpec::from_json(driving_json()).unwrap();
        assert_eq!(spec.sensor_props(), vec![Prop::new("pedestrian")]);
        assert_eq!(
            spec.exec_props(),
            vec![Prop::new("publish velocity"), Prop::new("stop")]
        );
    }

    #[test]
    fn codebotler_distinguishes_args() {
        let spec = SystemSpec::from_json(codebotler_json()).unwrap();
        let got = spec
            .map_call("is_in_room", &[CallArg::Literal("backpack".into())])
            .unwrap();
        assert_eq!(got, MapOutcome::Mapped(Prop::new("backpack")));
        let got = spec
            .map_call("is_in_room", &[CallArg::Literal("person".into())])
            .unwrap();
        assert_eq!(got, MapOutcome::Mapped(Prop::new("person")));
    }

    #[test]
    fn undeclared_function_is_not_mapped() {
        let spec = SystemSpec::from_json(codebotler_json()).unwrap();
        let got = spec
            .map_call(
                "time",
                &[CallArg::Literal("sleep".into()), CallArg::Unknown],
            )
            .unwrap();
        assert_eq!(got, MapOutcome::NotMapped);
    }

    #[test]
    fn unknown_args_fall_back_to_wildcard() {
        let spec = SystemSpec::from_json(driving_json()).unwrap();
        let got = spec
            .map_call("velocity_publisher", &[CallArg::Unknown, CallArg::Unknown])
            .unwrap();
        assert_eq!(got, MapOutcome::Mapped(Prop::new("publish velocity")));
    }

    #[test]
    fn unknown_args_do_not_match_literals() {
        let spec = SystemSpec::from_json(codebotler_json()).unwrap();
        let got = spec.map_call("is_in_room", &[CallArg::Unknown]).unwrap();
        assert_eq!(got, MapOutcome::NotMapped);
    }

    #[test]
    fn map_call_is_deterministic() {
        let spec = SystemSpec::from_json(codebotler_json()).unwrap();
        let args = [CallArg::Literal("backpack".into())];
        let a = spec.map_call("is_in_room", &args).unwrap();
        let b = spec.map_call("is_in_room", &args).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn ambiguous_mapping_detected_at_runtime() {
        // Bypasses file validation by constructing the spec directly.
        let mut spec = SystemSpec::from_json(codebotler_json()).unwrap();
        spec.mappings.push(CallMapping {
            function: "is_in_room".into(),
            args: vec![ArgMatcher::Wildcard, ArgMatcher::Literal("x".into())],
            prop: Prop::new("person"),
        });
        spec.mappings.push(CallMapping {
            function: "is_in_room".into(),
            args: vec![ArgMatcher::Literal("person".into()), ArgMatcher::Wildcard],
            prop: Prop::new("backpack"),
        });
        let err = spec
            .map_call(
                "is_in_room",
                &[
                    CallArg::Literal("person".into()),
                    CallArg::Literal("x".into()),
                ],
            )
            .unwrap_err();
        assert!(matches!(err, SystemError::AmbiguousMapping { .. }));
    }

    #[test]
    fn rejects_duplicate_prop() {
        let bad = driving_json().replace("\"publish velocity\", \"kind\": \"exec\"", "\"pedestrian\", \"kind\": \"exec\"");
        assert!(SystemSpec::from_json(&bad).is_err());
    }

    #[test]
    fn rejects_execution_function_without_mapping() {
        let mut v: serde_json::Value = serde_json::from_str(driving_json()).unwrap();
        v["mappings"]
            .as_array_mut()
            .unwrap()
            .retain(|m| m["function"] != "stop");
        assert!(SystemSpec::from_json(&v.to_string()).is_err());
    }

    #[test]
    fn rejects_spec_over_undeclared_prop() {
        let mut v: serde_json::Value = serde_json::from_str(driving_json()).unwrap();
        v["specs"] = serde_json::json!(["G( \"car\" -> X !\"stop\" )"]);
        let err = SystemSpec::from_json(&v.to_string()).unwrap_err();
        assert!(matches!(err, SystemError::Validation(_)));
    }

    #[test]
    fn ts_for_one_sensor_prop() {
        let spec = SystemSpec::from_json(driving_json()).unwrap();
        let ts = build_transition_system(&spec).unwrap();
        assert_eq!(ts.state_count(), 2);
        assert_eq!(ts.transition_count(), 4);
        let labels: Vec<_> = ts.states().map(|q| ts.label(q).clone()).collect();
        assert!(labels.contains(&Valuation::new()));
        assert!(labels.contains(&valuation(["pedestrian"])));
    }

    #[test]
    fn ts_for_zero_sensor_props() {
        let ts = build_ts_from_props(&[], DEFAULT_SENSOR_PROP_CAP).unwrap();
        assert_eq!(ts.state_count(), 1);
        assert_eq!(ts.transition_count(), 1);
        assert_eq!(ts.label(TsStateId(0)), &Valuation::new());
    }

    #[test]
    fn ts_for_two_sensor_props() {
        let spec = SystemSpec::from_json(codebotler_json()).unwrap();
        let ts = build_transition_system(&spec).unwrap();
        assert_eq!(ts.state_count(), 4);
        assert_eq!(ts.transition_count(), 16);
    }

    #[test]
    fn system_without_sensors_is_legal() {
        let spec = SystemSpec::from_json(
            r#"{
              "functions": [{"name": "beep", "kind": "execution", "doc": ""}],
              "propositions": [{"name": "beep", "kind": "exec"}],
              "mappings": [{"function": "beep", "args": ["*"], "prop": "beep"}],
              "specs": []
            }"#,
        )
        .unwrap();
        assert!(spec.sensor_props().is_empty());
        let ts = build_transition_system(&spec).unwrap();
        assert_eq!(ts.state_count(), 1);
    }

    #[test]
    fn ts_invariants_hold_for_small_prop_counts() {
        for n in 0..=5usize {
            let props: Vec<Prop> = (0..n).map(|i| Prop::new(format!("p{i}"))).collect();
            let ts = build_ts_from_props(&props, 16).unwrap();
            assert_eq!(ts.state_count(), 1 << n);
            assert_eq!(ts.transition_count(), 1 << (2 * n));
            // Labels enumerate all subsets, pairwise distinct.
            let labels: BTreeSet<Valuation> =
                ts.states().map(|q| ts.label(q).clone()).collect();
            assert_eq!(labels.len(), 1 << n);
            // Every state reaches every state in one step.
            let mut count = 0usize;
            for (from, to) in ts.transitions() {
                assert!(from.0 < ts.state_count() && to.0 < ts.state_count());
                count += 1;
            }
            assert_eq!(count, ts.transition_count());
        }
    }

    #[test]
    fn ts_cap_enforced() {
        let props: Vec<Prop> = (0..20).map(|i| Prop::new(format!("p{i}"))).collect();
        let err = build_ts_from_props(&props, 16).unwrap_err();
        assert!(matches!(err, SystemError::TooManyProps { count: 20, cap: 16 }));
    }

    #[test]
    fn roundtrip_preserves_structure() {
        let spec = SystemSpec::from_json(codebotler_json()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sys.json");
        save_system(&spec, &path).unwrap();
        let back = load_system(&path).unwrap();
        assert_eq!(back.functions, spec.functions);
        assert_eq!(back.props, spec.props);
        assert_eq!(back.mappings, spec.mappings);
        assert_eq!(
            back.specs.iter().map(|(s, _)| s).collect::<Vec<_>>(),
            spec.specs.iter().map(|(s, _)| s).collect::<Vec<_>>()
        );
    }
}
