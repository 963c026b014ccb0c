//! Replicated runs turned into summaries, comparisons and rate studies.

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::replicate::{reference_value, run_replications, ReferenceSource, ReplicationRun};
use super::stats::{fit_rate, summarize_with_source, ExperimentSummary, RateFit};
use crate::error::{Error, Result};
use crate::estimators::EstimatorId;

/// One line of the summary table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub estimator: String,
    pub payoff: String,
    pub n: usize,
    pub h: Option<f64>,
    pub theta: Option<f64>,
    pub epsilon: Option<f64>,
    pub seed: u64,
    pub replications: usize,
    pub mean: f64,
    pub bias: f64,
    pub variance: f64,
    pub mse: f64,
    pub stderr: f64,
    pub reference: f64,
    pub reference_source: ReferenceSource,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyOutput {
    pub run: ReplicationRun,
    pub summary: ExperimentSummary,
    pub row: SummaryRow,
}

fn payoff_label(cfg: &ExperimentConfig) -> String {
    let base = cfg.payoff().name();
    match cfg.asian {
        Some(a) => format!("asian-{base}-{}", a.steps),
        None => base.to_string(),
    }
}

fn row_of(cfg: &ExperimentConfig, run: &ReplicationRun, s: &ExperimentSummary) -> SummaryRow {
    let kernel = cfg.estimator.is_kernel();
    SummaryRow {
        estimator: cfg.estimator.as_str().to_string(),
        payoff: payoff_label(cfg),
        n: cfg.n,
        h: run.plan.h,
        theta: kernel.then_some(run.plan.theta),
        epsilon: match cfg.estimator {
            EstimatorId::FiniteDifference => Some(cfg.fd_eps),
            _ => run.plan.epsilon,
        },
        seed: cfg.seed,
        replications: cfg.reps,
        mean: s.mean,
        bias: s.bias,
        variance: s.variance,
        mse: s.mse,
        stderr: s.stderr,
        reference: s.reference,
        reference_source: s.reference_source,
    }
}

/// Runs the configuration against a precomputed reference.
pub fn run_against(cfg: &ExperimentConfig, reference: (f64, ReferenceSource)) -> Result<StudyOutput> {
    let run = run_replications(cfg)?;
    let summary = match run.estimates.as_slice() {
        // a single replication has no spread to report
        &[v] => ExperimentSummary {
            estimates: vec![v],
            mean: v,
            bias: v - reference.0,
            variance: f64::NAN,
            mse: (v - reference.0).powi(2),
            stderr: f64::NAN,
            reference: reference.0,
            reference_source: reference.1,
        },
        all => summarize_with_source(all, reference.0, reference.1)?,
    };
    let row = row_of(cfg, &run, &summary);
    Ok(StudyOutput { run, summary, row })
}

pub fn run_study(cfg: &ExperimentConfig) -> Result<StudyOutput> {
    let reference = reference_value(cfg)?;
    run_against(cfg, reference)
}

/// The same draws' configuration evaluated for several estimators.
pub fn compare(cfg: &ExperimentConfig, estimators: &[EstimatorId]) -> Result<Vec<StudyOutput>> {
    let reference = reference_value(cfg)?;
    estimators
        .iter()
        .map(|&id| run_against(&cfg.with_estimator(id), reference))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateStudy {
    pub fit: RateFit,
    pub rows: Vec<SummaryRow>,
}

/// MSE at each `N` of `grid_n` (bandwidth re-selected per `N`) and the fitted log-log slope.
pub fn convergence_rate_fit(template: &ExperimentConfig, grid_n: &[usize], reps: usize) -> Result<RateStudy> {
    if grid_n.len() < 4 {
        return Err(Error::InvalidArgument(format!("rate grid needs ≥ 4 points, got {}", grid_n.len())));
    }
    if grid_n.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("rate grid must be strictly increasing".into()));
    }
    if (grid_n[grid_n.len() - 1] as f64) < 100.0 * grid_n[0] as f64 {
        return Err(Error::InvalidArgument("rate grid must span at least two decades".into()));
    }
    let reference = reference_value(template)?;
    let mut rows = Vec::with_capacity(grid_n.len());
    for &n in grid_n {
        let cfg = ExperimentConfig {
            n,
            reps,
            ..template.clone()
        };
        rows.push(run_against(&cfg, reference)?.row);
    }
    let mse: Vec<f64> = rows.iter().map(|r| r.mse).collect();
    let fit = fit_rate(grid_n, &mse)?;
    Ok(RateStudy { fit, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rate_grid_preconditions() {
        let cfg = ExperimentConfig::default();
        assert!(convergence_rate_fit(&cfg, &[100, 1000, 10_000], 2).is_err());
        assert!(convergence_rate_fit(&cfg, &[100, 200, 300, 400], 2).is_err());
        assert!(convergence_rate_fit(&cfg, &[100, 50, 1000, 10_000], 2).is_err());
    }
}
