//! Run orchestration: configuration, baseline policies, reports,
//! cross-coverage, statistics, the benchmark suite, and corpus tooling.

pub mod bench;
pub mod config;
pub mod corpus;
pub mod policies;
pub mod report;
pub mod runner;
pub mod stats;

pub use bench::{run_bench, BenchSuite, BenchSummary};
pub use config::{PolicyKind, RunConfig};
pub use policies::{MonkeyPolicy, RandomPolicy};
pub use report::{
    action_distribution, build_report, cross_coverage, intersection_coverage, CoverageSet, Report,
    UniverseKind,
};
pub use runner::{run, RunArtifacts};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error at {path}: {message}")]
    Config { path: String, message: String },
    #[error("empty episode log")]
    EmptyLog,
    #[error("coverage sets belong to different universes: {a} vs {b}")]
    UniverseMismatch { a: String, b: String },
    #[error("benchmark needs both dqn and random runs for the comparison")]
    IncomparableBench,
    #[error(transparent)]
    Agent(#[from] crate::agent::AgentError),
    #[error(transparent)]
    Sim(#[from] crate::simenv::SimError),
    #[error(transparent)]
    Embed(#[from] crate::embedding::EmbedError),
    #[error(transparent)]
    Weights(#[from] crate::weights::WeightsError),
    #[error(transparent)]
    Vision(#[from] crate::vision::VisionError),
    #[error("serialization: {0}")]
    Serde(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}
