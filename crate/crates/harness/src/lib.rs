//! Command-line runner, benchmark driver and line-delimited JSON server for
//! the crop-management environment.

pub mod commands;
pub mod serve;
pub mod settings;

pub use commands::{
    aggregate, bench_baseline, cmd_bench, cmd_run, cmd_train, max_average, train_agent, AgentKind, AgentResult,
    BenchReport, AGENT_NAMES,
};
pub use serve::serve;
pub use settings::{Overrides, Settings};
