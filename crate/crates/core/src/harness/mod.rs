//! Experiment harness: scenarios, runs, metrics, comparisons and CSV output.

pub mod metrics;
pub mod output;
pub mod report;
pub mod run;
pub mod scenario;
pub mod sweep;

pub use metrics::{MetricsBundle, Phase, PhaseDrops};
pub use output::write_csvs;
pub use report::{compare, ComparisonReport, Expectation};
pub use run::{run_scenario, HarnessError, ScenarioRun};
pub use scenario::{ConfigError, PolicyKind, QueueMode, Scenario};
pub use sweep::{run_pair, sweep, PairResult};
