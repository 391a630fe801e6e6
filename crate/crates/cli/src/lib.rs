//! Scenario-driven front end for the `tsirelson` crate: scenario files,
//! built-in scenarios, regime test batteries and CSV output.

pub mod builtins;
pub mod commands;
pub mod plot;
pub mod scenario;
pub mod suite;

pub use scenario::{load_scenario, Scenario};
pub use suite::{run_suite, RunOptions, RunReport};
