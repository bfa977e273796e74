//! Multi-tape two-level morphology toolkit.
//!
//! A grammar maps between several lexical tapes (for Semitic-style morphology:
//! pattern, root, and vocalism) and a single surface string, using two-level
//! rules of the form
//!
//! ```text
//! LSC - SURF - RSC => LLC - LEX - RLC
//! ```
//!
//! where the right-hand side constrains the lexical tapes (tuples of symbols,
//! one cell per tape) and the left-hand side constrains the surface. `=>`
//! licenses a correspondence; `<=>` additionally coerces it wherever the
//! lexical side matches.
//!
//! The crate provides two execution backends over the same grammar:
//!
//! * [`interpreter`]: a direct backtracking matcher over the rules, and
//! * [`afst`]: compiled auxiliary finite-state transducers with a one-symbol
//!   storage register per machine,
//!
//! plus a [`lexicon`] of morpheme entries stored as per-tape tries, and an
//! [`engine`] layer that ties everything together for synthesis (morpheme ids
//! to surface forms) and recognition (surface forms to morpheme ids).

pub mod afst;
pub mod engine;
pub mod error;
pub mod fixtures;
pub mod grammar;
pub mod interpreter;
pub mod lexicon;
pub mod model;

pub use engine::{Analysis, EngineKind, Generated, Mode, Toolkit};
pub use error::{Error, Result};
pub use grammar::{compute_feasible_pairs, parse_grammar, validate_grammar, Grammar, Rule};
pub use model::{Bindings, Symbol, SymbolTuple, TapeConfig, Term, TuplePair, TuplePattern};
