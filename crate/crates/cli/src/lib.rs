//! Configuration, orchestration and reporting for the realization pipeline.

pub mod config;
pub mod pipeline;
pub mod report;

pub use config::{parse_config, ConfigError, RunConfig};
pub use pipeline::{run_pipeline, run_pipeline_with_threads, PipelineError, THREADS_ENV};
pub use report::{emit_report, Format, Report};
