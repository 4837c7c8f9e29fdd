//! Modal formula toolkit.
//!
//! The crate is organized around one currency type, [`Formula`], and five
//! subsystems:
//!
//! - [`formula`] — the modal language: parsing, printing, substitution,
//!   structural metrics.
//! - [`families`] — the indexed formula families δ/α/β (plain, strict and
//!   variable-free flavors) and the substitution-based reductions from
//!   classical propositional formulas into two-variable, one-variable and
//!   variable-free modal fragments.
//! - [`kripke`] — finite Kripke frames and models, a bitset model checker,
//!   frame-validity search and the chain frames the reductions are evaluated
//!   on.
//! - [`neighborhood`] — neighborhood (minimal-model) semantics and
//!   satisfiability decision procedures for the non-normal logics E, EM, EN
//!   and EMN, cross-checked by a brute-force enumerator.
//! - [`classical`] — a classical tautology oracle, exhaustive small-scope
//!   formula enumeration and seeded random corpora for sweeps.

pub mod classical;
pub mod families;
pub mod formula;
pub mod kripke;
pub mod neighborhood;
mod rng;

pub use formula::{Formula, Metrics, ParseError, Substitution};
