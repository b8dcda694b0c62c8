//! Wrapper/TAM co-optimization for system-on-chip core tests.
//!
//! Each core gets a set of test rectangles (TAM wires used × test cycles)
//! from the wrapper designer; the scheduler then packs one rectangle per
//! core into a bin whose height is the SOC's total TAM width, minimizing the
//! filled width (the SOC test time).

pub mod bench;
pub mod cli;
pub mod model;
pub mod oracle;
pub mod parse;
pub mod scheduler;
pub mod wrapper;
