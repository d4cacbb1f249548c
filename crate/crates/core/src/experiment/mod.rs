//! Datasets, experiment configs, parallel sweeps and result reports.

mod config;
mod dataset;
mod report;
mod runner;

pub use config::{ExperimentConfig, GeneratorSpec, OutputFormat, OutputSpec, RGrid, Source, Task};
pub use dataset::{fixtures_root, load_dataset, load_fixture, Dataset};
pub use report::{aggregate, canonical_cmp, mean_stderr, Aggregate, Row, RunReport, CSV_HEADER, SCHEMA_VERSION};
pub use runner::{cell_seed, graph_seed, quick_config, resolve_threads, run_experiment, THREADS_ENV};
