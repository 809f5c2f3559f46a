//! Scenario construction, the integrated simulation world, metrics, sweeps
//! and CSV emission.

mod config;
mod metrics;
mod sweep;
mod world;

pub use config::{
    config_hash, BufferMode, Config, ConfigError, ControllerParams, MacMode, ScenarioConfig,
    ShortFlowCfg,
};
pub use metrics::{
    efficiency, short_flow_stats, write_flows_csv, write_limits_csv, write_summary_csv,
    FlowMetrics, MetricsReport, ShortFlowBucket, SummaryRow,
};
pub use sweep::{replicate_seed, sweep, SweepRow, SweepSpec};
pub use world::{run_scenario, run_scenario_traced, World};
