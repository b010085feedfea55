//! A laboratory for the reduction chain
//!
//! ```text
//! PCP  ->  rational-relation inclusion  ->  Z-transducer inclusion
//!      ->  defense-system reliability   ->  finite-substitution equivalence
//! ```
//!
//! Each stage of the chain is undecidable in general; this crate builds the
//! constructions behind the reductions and pairs them with the decision
//! procedures, bounded searches and brute-force oracles that make every
//! concrete desk-scale instance checkable end to end.
//!
//! The main pieces:
//!
//! * [`relation`] — finite transducers with unary (counted) output, the
//!   union/concatenation/star combinators, and exact membership testing.
//! * [`pcp`] — PCP instances and the layered relations `L1..L5`, `Lu`, `Lv`,
//!   `L0` whose inclusion encodes solvability, plus witness builders and a
//!   bounded solver.
//! * [`zt`] — Z-transducers (binary input, one or two `c`'s out per symbol),
//!   the block coding of the PCP alphabet, and compilers from coded
//!   relations to Z-transducers.
//! * [`nds`] — nondeterministic defense systems with exact rational
//!   probabilities, support dynamics, and critical-word search.
//! * [`product`] — the product defense system simulating a deterministic
//!   and a complete Z-transducer side by side, with a bidirectional
//!   correspondence checker.
//! * [`regular`] — an NFA engine: inclusion with antichain pruning,
//!   enumeration, and finite-substitution images of regular languages.
//! * [`subs`] — the word system and block families that turn a defense
//!   system into a pair of finite substitutions equivalent on `b{0,1}*c`
//!   exactly when the system is reliable.

pub mod alphabet;
pub mod nds;
pub mod pcp;
pub mod product;
pub mod regular;
pub mod relation;
pub mod samples;
pub mod subs;
pub mod textfmt;
pub mod zt;

pub use alphabet::{Bit, Letter};
pub use relation::{Relation, Sigma, Transducer, UnaryPair};
