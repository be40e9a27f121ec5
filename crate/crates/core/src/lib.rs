//! Analysis toolkit for primitive substitutions on finite alphabets.
//!
//! Given a substitution `H` (a map sending each letter to a nonempty word),
//! the crate builds the language of the associated subshift, measures how far
//! orbit points sit from the attractor (the `delta` statistics), desubstitutes
//! words to certify recognizability, renormalizes potentials along the
//! substitution, and produces numerical certificates for the freezing phase
//! transition of lexicographic-gap potentials.
//!
//! The layering is strictly bottom up:
//!
//! * [`substitution`]: parsing, incidence data, primitivity, Perron root.
//! * [`language`]: exact factor sets up to a cutoff, special/bispecial words.
//! * [`recognize`]: desubstitution and recognizability lengths.
//! * [`attractor`]: delta profiles and accident (renormalization-time) data.
//! * [`renorm`]: the renormalization operator on potentials and its limits.
//! * [`thermo`]: transfer-operator truncations and freezing certificates.
//!
//! Everything numeric is cross-checked against brute-force enumeration in the
//! test suites; tolerances are pinned next to the assertions they guard.

pub mod attractor;
pub mod deep;
pub mod examples;
pub mod language;
pub mod potential;
pub mod recognize;
pub mod renorm;
pub mod report;
pub mod sa;
pub mod substitution;
pub mod tail;
pub mod thermo;

pub use substitution::{
    AperiodicEvidence, ParseError, PerronEstimate, StructureReport, Substitution, Word,
};
