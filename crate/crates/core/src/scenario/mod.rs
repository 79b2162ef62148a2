//! Scenario documents, initial data, persistence and drivers.

pub mod config;
pub mod driver;
pub mod initial;
pub mod snapshot;

pub use config::{
    parse_config, render_config, ConfigError, InitialData, InitialKind, Outputs, ScenarioConfig,
};
pub use driver::{
    resume, run_convergence, run_from_state, run_lemma_suite, run_simulation, ConvergenceReport,
    RunOutcome, ScenarioError, SpatialStudy, TemporalStudy,
};
pub use initial::{make_initial, InitialError};
pub use snapshot::{read_snapshot, write_snapshot, Snapshot, SnapshotError};
