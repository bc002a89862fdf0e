//! Closed-loop three-vehicle episodes and their metrics.

mod episode;
mod metrics;
mod oracle;
mod scenario;
mod traffic;

pub use episode::{run_episode, run_with_traffic, AssessMode, EpisodeConfig, EpisodeResult, Planner, StepRecord};
pub use metrics::{aggregate, EpisodeSummary, Metrics, MetricsAccumulator};
pub use oracle::worst_case_rollout_safe;
pub use scenario::{Scenario, ScenarioClass};
pub use traffic::{illustrative, IdmTraffic, ScriptedTraffic, Traffic};
