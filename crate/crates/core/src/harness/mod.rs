//! Seeded multi-trial experiments: configuration, execution, CSV/JSON
//! output, log-log fits and SVG charts.

pub mod builtin;
pub mod config;
pub mod fit;
pub mod instance;
pub mod plot;
pub mod run;

pub use builtin::{builtin, BUILTIN_NAMES};
pub use config::{trial_seed, Algorithm, ExperimentConfig, LearnerOptions, DEFAULT_TRIALS};
pub use fit::{fit_loglog_slope, LogLogFit};
pub use instance::{StaticInstance, StaticSolution, SynthesisInstance, SynthesisResult};
pub use plot::{emit_plot, render_svg, PlotOptions};
pub use run::{
    records_to_csv, run_experiment, run_trial, trial_csv_path, ExperimentSummary, FitRecord,
    HorizonStats, CSV_HEADER,
};
