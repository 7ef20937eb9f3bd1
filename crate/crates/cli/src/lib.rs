//! Scenario files for the densalg engine: parsing, running and reporting.

pub mod report;
pub mod run;
pub mod scenario;

pub use report::{CommandReport, Outcome, Report};
pub use run::run_scenario;
pub use scenario::{parse_scenario, Scenario, ScenarioError};
