//! Verification toolkit for counting extensions of CTL over finite Kripke
//! structures: until modalities carry linear constraints on how often
//! subformulas hold along the strict run prefix.
//!
//! The crate provides model checking engines (a capped-counter product
//! engine, a polynomial weighted-graph engine for unit coefficients, a
//! freeze-variable engine), formula translations into plain CTL,
//! satisfiability via a CTL tableau, and generators plus brute-force oracles
//! for hardness instances.

pub mod cost;
pub mod counting;
pub mod ctl;
pub mod formula;
pub mod harness;
pub mod model;
mod par;
pub mod sat;
pub mod translate;
pub mod vars;
pub mod weighted;
