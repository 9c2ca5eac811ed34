//! Proof checker for the dynamic logic of common knowledge, with a
//! generator for the muddy-children proofs and a Kripke-model oracle.
//!
//! Only [`kernel`] can produce a [`Judgment`]; everything else builds proofs
//! by calling it.

pub mod derived;
pub mod formula;
pub mod kernel;
pub mod muddy;
pub mod script;
pub mod semantics;
pub mod syntax;

pub use formula::{iter_box, iter_e, Agent, AtomKind, EventKind, EventSym, Formula, Group};
pub use kernel::{check_tree, Judgment, KernelError, Param, ProofTree, RuleKind, Theory};
pub use muddy::{muddy_theory, prove_concl, MuddyProver, Scenario};
pub use script::{load_script, save_proof, save_script, ProofScript, TheorySpec};
pub use semantics::{validate_judgment_trace, validate_theory, KripkeModel, World};
pub use syntax::{parse_formula, print_formula};
