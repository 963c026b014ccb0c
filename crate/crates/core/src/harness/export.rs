//! CSV and JSON output.
//!
//! Files written into the output directory:
//!
//! - `summary.csv`: one row per estimator run.
//! - `raw_<estimator>.csv`: replication estimates and wall-clock times.
//! - `rate_<estimator>.csv`: MSE over the `N` grid with the fitted slope in a trailing comment.
//! - `kde_<estimator>.csv`: density of the replication estimates.
//! - `config.json`: the run manifest; `--config` accepts it back.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::replicate::ReplicationRun;
use super::study::{RateStudy, SummaryRow};
use crate::error::Result;
use crate::estimators::EstimatorId;

pub const SUMMARY_HEADER: &str =
    "estimator,payoff,N,h,theta,epsilon,seed,replications,mean,bias,variance,mse,stderr,reference,reference_source";
pub const RAW_HEADER: &str = "replication,estimate,runtime_ms";
pub const RATE_HEADER: &str = "N,h,mse,log_n,log_mse";
pub const KDE_HEADER: &str = "grid_point,density";

/// Everything needed to repeat a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config: ExperimentConfig,
    #[serde(default)]
    pub estimators: Vec<EstimatorId>,
    #[serde(default)]
    pub grid: Vec<usize>,
    #[serde(default)]
    pub kde_points: usize,
}

#[derive(Debug, Clone, Default)]
pub struct ResultBundle {
    pub rows: Vec<SummaryRow>,
    pub raw: Vec<(EstimatorId, ReplicationRun)>,
    pub rates: Vec<(EstimatorId, RateStudy)>,
    pub kde: Vec<(EstimatorId, Vec<f64>, Vec<f64>)>,
}

/// 17 significant digits; `NaN`/`inf` spelled out.
pub fn fmt_real(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_real).unwrap_or_default()
}

pub fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.estimator,
            r.payoff,
            r.n,
            fmt_opt(r.h),
            fmt_opt(r.theta),
            fmt_opt(r.epsilon),
            r.seed,
            r.replications,
            fmt_real(r.mean),
            fmt_real(r.bias),
            fmt_real(r.variance),
            fmt_real(r.mse),
            fmt_real(r.stderr),
            fmt_real(r.reference),
            r.reference_source.as_str(),
        );
    }
    out
}

pub fn raw_csv(run: &ReplicationRun) -> String {
    let mut out = String::from(RAW_HEADER);
    out.push('\n');
    for (j, (v, t)) in run.estimates.iter().zip(&run.runtimes_ms).enumerate() {
        let _ = writeln!(out, "{j},{},{}", fmt_real(*v), fmt_real(*t));
    }
    out
}

pub fn rate_csv(study: &RateStudy) -> String {
    let mut out = String::from(RATE_HEADER);
    out.push('\n');
    for (r, log_mse) in study.rows.iter().zip(&study.fit.log_mse) {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.n,
            fmt_opt(r.h),
            fmt_real(r.mse),
            fmt_real((r.n as f64).ln()),
            fmt_real(*log_mse)
        );
    }
    let _ = writeln!(out, "# slope={} r2={}", fmt_real(study.fit.slope), fmt_real(study.fit.r_squared));
    out
}

pub fn kde_csv(grid: &[f64], density: &[f64]) -> String {
    let mut out = String::from(KDE_HEADER);
    out.push('\n');
    for (x, d) in grid.iter().zip(density) {
        let _ = writeln!(out, "{},{}", fmt_real(*x), fmt_real(*d));
    }
    out
}

/// Writes the bundle and the manifest into `dir`, returning the paths written.
pub fn export_results(dir: &Path, manifest: &RunManifest, bundle: &ResultBundle) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let mut put = |name: String, body: String| -> Result<()> {
        let path = dir.join(name);
        fs::write(&path, body)?;
        written.push(path);
        Ok(())
    };
    put("summary.csv".into(), summary_csv(&bundle.rows))?;
    for (id, run) in &bundle.raw {
        put(format!("raw_{}.csv", id.as_str()), raw_csv(run))?;
    }
    for (id, study) in &bundle.rates {
        put(format!("rate_{}.csv", id.as_str()), rate_csv(study))?;
    }
    for (id, grid, density) in &bundle.kde {
        put(format!("kde_{}.csv", id.as_str()), kde_csv(grid, density))?;
    }
    put("config.json".into(), serde_json::to_string_pretty(manifest)? + "\n")?;
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reals_have_seventeen_digits() {
        assert_eq!(fmt_real(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_real(f64::NAN), "NaN");
        let x = 0.016_539_689_478_2_f64;
        assert_eq!(fmt_real(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn summary_only_export() {
        let dir = tempfile::tempdir().unwrap();
        let manifest = RunManifest {
            command: "estimate".into(),
            config: ExperimentConfig::default(),
            estimators: vec![],
            grid: vec![],
            kde_points: 0,
        };
        let written = export_results(dir.path(), &manifest, &ResultBundle::default()).unwrap();
        let names: Vec<String> = written
            .iter()
            .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
            .collect();
        assert_eq!(names, ["summary.csv", "config.json"]);
        let summary = fs::read_to_string(dir.path().join("summary.csv")).unwrap();
        assert_eq!(summary.lines().next().unwrap(), SUMMARY_HEADER);
        let back: RunManifest = serde_json::from_str(&fs::read_to_string(dir.path().join("config.json")).unwrap()).unwrap();
        assert_eq!(back, manifest);
    }
}
