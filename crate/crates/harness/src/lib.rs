//! Experiment harness for the ZP-OFDM impulsive-noise receiver:
//! configuration schema, seeded paired Monte-Carlo runs over analog and
//! digital front-ends, waveform ingestion, and CSV result emission.

pub mod config;
pub mod experiment;
pub mod ingest;

pub use config::{ExperimentConfig, FrontendConfig};
pub use experiment::{
    run_experiment, score_stream, summarize, write_csv, FrontendSummary, MetricsRow,
};
pub use ingest::ingest_waveform;
