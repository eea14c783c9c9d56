//! Compiles executable robot plans into finite-state automata, verifies
//! them against LTL safety specifications by product-automaton model
//! checking, certifies sequential compositions of verified plans, and
//! harvests verified plans into a supervised fine-tuning dataset.
//!
//! The pipeline: [`plan::parse_plan`] parses a plan, [`plan::resolve_plan`]
//! grounds its calls in a [`system::SystemSpec`], [`compile::tree2fsa`]
//! builds the automaton, and [`checker::verify`] model-checks it against
//! the system's specifications, returning a source-mapped counterexample
//! on failure. [`compose`] certifies sequential compositions without
//! re-checking the whole, and [`harvest`] drives a plan generator and
//! filters its output into training data.

pub mod checker;
pub mod compile;
pub mod compose;
pub mod formula;
pub mod fsa;
pub mod guard;
pub mod harvest;
pub mod monitor;
pub mod plan;
pub mod product;
pub mod props;
pub mod semantics;
pub mod smv;
pub mod span;
pub mod system;

pub use checker::{verify, verify_all, Verdict, VerdictResult};
pub use compile::{exe2fsa, tree2fsa, CompileOutput};
pub use formula::{parse_spec, SafetyFormula};
pub use fsa::Fsa;
pub use plan::{parse_plan, resolve_plan};
pub use product::{bounded_traces, join, product, ProductAutomaton};
pub use props::{Prop, PropKind, Valuation};
pub use span::SourceSpan;
pub use system::{build_transition_system, load_system, save_system, SystemSpec, TransitionSystem};
