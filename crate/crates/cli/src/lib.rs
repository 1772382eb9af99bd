//! Scenario files, verification reports, the demo gallery and the command
//! implementations behind the `jmarkov` binary.

pub mod checks;
pub mod commands;
pub mod demos;
pub mod json;
pub mod report;
pub mod scenario;

pub use checks::run_checks;
pub use report::{CheckRecord, Outcome, Report};
pub use scenario::{emit, parse_scenario, parse_str, InputError, Model, Overrides, Scenario};
