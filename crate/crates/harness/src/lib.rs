//! Seeded experiment runner for the mixed-variable optimizers: multi-trial
//! runs, median and inter-quartile statistics, CSV and SVG output.

pub mod config;
pub mod error;
pub mod experiment;
pub mod plot;
pub mod runner;
pub mod stats;
pub mod suite;
pub mod table;

pub use config::{ExperimentConfig, MarginModeName, VariantName};
pub use error::{HarnessError, Result};
pub use experiment::{run_and_write, write_experiment};
pub use plot::{emit_plot, render_svg, PlotStyle};
pub use runner::{
    run_experiment, run_experiment_with, ExperimentRecords, IterationRecord, Measure, TrialTiming,
};
pub use stats::{aggregate, percentile, StatRow};
