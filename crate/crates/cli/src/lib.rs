//! Scenario runner: named experiments, config handling, CSV/JSON/SVG output
//! and the acceptance suite.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod output;
pub mod physics;
pub mod plot;
pub mod scenarios;
pub mod verify;
