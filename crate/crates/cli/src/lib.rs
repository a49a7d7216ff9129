//! Experiment harness for phantom-edge QAOA: sweeps, campaigns, landscapes
//! and oracle checks, with CSV/JSON/SVG output.

pub mod campaign;
pub mod charts;
pub mod commands;
pub mod config;
pub mod output;
