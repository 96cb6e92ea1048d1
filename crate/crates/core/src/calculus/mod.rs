//! Symbolic resource calculus: entropy-coefficient expressions, resource
//! inequalities, an axiom database and a proof-script replayer.

pub mod axioms;
pub mod derivation;
pub mod entexpr;
pub mod inequality;
pub mod parse;
pub mod resource;

pub use axioms::{Axiom, AxiomDb};
pub use derivation::{parse_script, verify_script, Derivation, ProofReport, Rule, StepReport};
pub use entexpr::{labelset, EntExpr, Label, LabelSet, Rat};
pub use inequality::{Inequality, Relation};
pub use parse::{parse_inequality, parse_term_at};
pub use resource::{Direction, ResourceExpr, ResourceTerm};
