//! Config-driven experiment harness.
//!
//! Everything the `ngc` binary does lives here so it stays scriptable from
//! library code and testable without spawning processes: parsing and
//! validating experiment configs, loading or synthesizing datasets, running
//! the experiment pipeline, and writing seeded, byte-reproducible results.

pub mod config;
pub mod dataset;
pub mod experiments;
pub mod results;
pub mod synth;

pub use config::{parse_seed_spec, ExperimentConfig, ExperimentKind, FilterKind, GraphSource};
pub use dataset::{load_dataset, LoadedData};
pub use experiments::{execute, run_experiment, CheckItem, CheckOutcome, ExperimentOutput};
pub use results::{
    results_csv_string, write_manifest, write_results, write_trace_csv, ResultRow, RESULTS_HEADER,
};
pub use synth::{per_class_split, synthesize_dataset, FeatureFamily, SynthData, SynthSpec};
