//! Shared fixture loading and expected-automaton builders.
#![allow(dead_code)] // each test binary uses a different subset

use plancheck::compile::{exe2fsa, CompileOutput};
use plancheck::fsa::Fsa;
use plancheck::guard::Guard;
use plancheck::props::{valuation, Valuation};
use plancheck::system::SystemSpec;

pub fn fixture_path(rel: &str) -> String {
    format!("{}/../../fixtures/{rel}", env!("CARGO_MANIFEST_DIR"))
}

pub fn fixture(rel: &str) -> String {
    std::fs::read_to_string(fixture_path(rel))
        .unwrap_or_else(|e| panic!("fixture {rel}: {e}"))
}

pub fn system(name: &str) -> SystemSpec {
    SystemSpec::from_json(&fixture(&format!("systems/{name}.json"))).unwrap()
}

pub fn compile_fixture(system: &SystemSpec, plan: &str) -> CompileOutput {
    exe2fsa(system, &fixture(&format!("plans/{plan}"))).unwrap()
}

pub fn golden_path(name: &str) -> String {
    format!("{}/tests/golden/{name}", env!("CARGO_MANIFEST_DIR"))
}

/// Compares rendered output against a golden file. Set
/// `PLANCHECK_BLESS_GOLDEN=1` to rewrite goldens.
pub fn assert_golden(name: &str, actual: &str) {
    let path = golden_path(name);
    if std::env::var("PLANCHECK_BLESS_GOLDEN").is_ok() {
        std::fs::create_dir_all(format!("{}/tests/golden", env!("CARGO_MANIFEST_DIR"))).unwrap();
        std::fs::write(&path, actual).unwrap();
        return;
    }
    let expected = std::fs::read_to_string(&path)
        .unwrap_or_else(|e| panic!("golden {name} missing ({e}); bless with PLANCHECK_BLESS_GOLDEN=1"));
    assert_eq!(actual, expected, "output differs from golden {name}");
}

fn ped() -> Guard {
    Guard::prop("pedestrian")
}

/// The one-shot-conditional driving automaton: a preamble state, a decision
/// state falling through to the publish state, sealed by a restart edge.
pub fn expected_turn_right_1() -> Fsa {
    let mut fsa = Fsa::new();
    let d = fsa.add_state(Valuation::new(), None);
    let stop = fsa.add_state(valuation(["stop"]), None);
    let pv = fsa.add_state(valuation(["publish velocity"]), None);
    fsa.add_transition(fsa.initial, Guard::True, d);
    fsa.add_transition(d, ped(), stop);
    fsa.add_transition(d, Guard::not(ped()), pv);
    fsa.add_transition(stop, Guard::True, pv);
    fsa.add_transition(pv, Guard::True, fsa.initial);
    fsa
}

/// The re-checking driving loop: the initial state is the loop head.
pub fn expected_turn_right_2() -> Fsa {
    let mut fsa = Fsa::new();
    let stop = fsa.add_state(valuation(["stop"]), None);
    let pv = fsa.add_state(valuation(["publish velocity"]), None);
    fsa.add_transition(fsa.initial, ped(), stop);
    fsa.add_transition(fsa.initial, Guard::not(ped()), pv);
    fsa.add_transition(stop, Guard::True, fsa.initial);
    fsa.add_transition(pv, Guard::True, fsa.initial);
    fsa
}

/// Nested fetch plan: backpack gate, then a person-waiting loop around ask.
pub fn expected_bring_backpack_1() -> Fsa {
    let mut fsa = Fsa::new();
    let wait = fsa.add_state(Valuation::new(), None);
    let ask = fsa.add_state(valuation(["ask"]), None);
    let backpack = Guard::prop("backpack");
    let person = Guard::prop("person");
    fsa.add_transition(fsa.initial, Guard::not(backpack.clone()), fsa.initial);
    fsa.add_transition(fsa.initial, backpack, wait);
    fsa.add_transition(wait, Guard::not(person.clone()), wait);
    fsa.add_transition(wait, person, ask);
    fsa.add_transition(ask, Guard::True, wait);
    fsa
}

/// Conjunction-guarded fetch plan: ask only when both are present. The
/// negated branch is in disjunctive form, matching the compiler's output.
pub fn expected_bring_backpack_2() -> Fsa {
    let mut fsa = Fsa::new();
    let ask = fsa.add_state(valuation(["ask"]), None);
    let both = Guard::and(vec![Guard::prop("backpack"), Guard::prop("person")]);
    let neither = Guard::or(vec![
        Guard::not(Guard::prop("backpack")),
        Guard::not(Guard::prop("person")),
    ]);
    fsa.add_transition(fsa.initial, both, ask);
    fsa.add_transition(fsa.initial, neither, fsa.initial);
    fsa.add_transition(ask, Guard::True, fsa.initial);
    fsa
}
