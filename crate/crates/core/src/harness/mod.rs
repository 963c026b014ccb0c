//! Replicated experiments: random streams, configuration, statistics and file output.

pub mod config;
pub mod export;
pub mod replicate;
pub mod rng;
pub mod stats;
pub mod study;

pub use config::{BandwidthSpec, ExperimentConfig, PayoffKind};
pub use export::{export_results, ResultBundle, RunManifest};
pub use replicate::{
    kernel_sample, pilot_estimates, plan, reference_value, run_replications, run_replications_with_workers,
    ReferenceSource, ReplicationRun, RunPlan,
};
pub use stats::{fit_rate, kde_grid, kde_of_estimates, summarize, summarize_with_source, ExperimentSummary, RateFit};
pub use study::{compare, convergence_rate_fit, run_against, run_study, RateStudy, StudyOutput, SummaryRow};
