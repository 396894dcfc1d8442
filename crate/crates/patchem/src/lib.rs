//! Workbench for patent core-compound identification and OCSR arbitration:
//! ingestion, configuration, model artifacts, adapters and reports.

pub mod adapter;
pub mod artifact;
pub mod config;
pub mod error;
pub mod ingest;
pub mod ocsr;
pub mod pipeline;
pub mod report;
pub mod synth;

pub use artifact::{ModelArtifact, SCHEMA_VERSION};
pub use config::PipelineConfig;
pub use error::{Error, Result};
pub use ingest::PatentBundle;
