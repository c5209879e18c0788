//! Experiment harness for quasi-linear sparse recovery: configuration,
//! registered experiments, CSV/SVG output and the `quasilin` CLI.

// NaN-rejecting checks are written as negated comparisons on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod grid;
pub mod output;
pub mod registry;
pub mod runs;
pub mod signals;
pub mod stats;
