//! Procedural generation and verification of grid-based spatial reasoning data.
//!
//! The pipeline runs spatial graph → natural-language description → ASCII
//! layouts → question/answer pair, and the scoring side checks model output
//! against the same graph semantics.

pub mod ascii;
pub mod dataset;
pub mod generator;
pub mod language;
pub mod spatial;
pub mod verifier;
