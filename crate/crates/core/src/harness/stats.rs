//! Replication statistics, density of the estimates and log-log rate fits.

use serde::{Deserialize, Serialize};

use super::replicate::ReferenceSource;
use crate::error::{Error, Result};
use crate::scalar::{normal_pdf, stable_sum};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub estimates: Vec<f64>,
    pub mean: f64,
    pub bias: f64,
    /// Unbiased sample variance.
    pub variance: f64,
    /// `(1/R) Σ (βⱼ − reference)²`.
    pub mse: f64,
    pub stderr: f64,
    pub reference: f64,
    pub reference_source: ReferenceSource,
}

pub fn summarize(estimates: &[f64], reference: f64) -> Result<ExperimentSummary> {
    summarize_with_source(estimates, reference, ReferenceSource::ClosedForm)
}

pub fn summarize_with_source(estimates: &[f64], reference: f64, source: ReferenceSource) -> Result<ExperimentSummary> {
    let r = estimates.len();
    if r < 2 {
        return Err(Error::InsufficientReplications { needed: 2, got: r });
    }
    let rf = r as f64;
    let mean = stable_sum(estimates) / rf;
    let centered: Vec<f64> = estimates.iter().map(|&b| (b - mean) * (b - mean)).collect();
    let variance = stable_sum(&centered) / (rf - 1.0);
    let errors: Vec<f64> = estimates.iter().map(|&b| (b - reference) * (b - reference)).collect();
    Ok(ExperimentSummary {
        estimates: estimates.to_vec(),
        mean,
        bias: mean - reference,
        variance,
        mse: stable_sum(&errors) / rf,
        stderr: (variance / rf).sqrt(),
        reference,
        reference_source: source,
    })
}

/// Sample skewness and excess kurtosis (moment estimators).
pub fn shape(estimates: &[f64]) -> Result<(f64, f64)> {
    let r = estimates.len();
    if r < 3 {
        return Err(Error::InsufficientReplications { needed: 3, got: r });
    }
    let rf = r as f64;
    let mean = stable_sum(estimates) / rf;
    let moment = |k: i32| stable_sum(&estimates.iter().map(|&b| (b - mean).powi(k)).collect::<Vec<_>>()) / rf;
    let m2 = moment(2);
    if m2 == 0.0 {
        return Err(Error::DegenerateVariance);
    }
    Ok((moment(3) / m2.powf(1.5), moment(4) / (m2 * m2) - 3.0))
}

/// Silverman's rule `1.06 σ̂ R^{−1/5}`.
pub fn silverman_bandwidth(estimates: &[f64]) -> Result<f64> {
    let s = summarize_with_source(estimates, 0.0, ReferenceSource::None)?;
    let h = 1.06 * s.variance.sqrt() * (estimates.len() as f64).powf(-0.2);
    if h > 0.0 {
        Ok(h)
    } else {
        Err(Error::DegenerateVariance)
    }
}

/// Gaussian kernel density of the replication estimates on `grid`.
pub fn kde_of_estimates(estimates: &[f64], grid: &[f64]) -> Result<Vec<f64>> {
    if estimates.len() < 10 {
        return Err(Error::InsufficientReplications {
            needed: 10,
            got: estimates.len(),
        });
    }
    let h = silverman_bandwidth(estimates)?;
    let scale = 1.0 / (estimates.len() as f64 * h);
    Ok(grid
        .iter()
        .map(|&x| {
            let terms: Vec<f64> = estimates.iter().map(|&b| normal_pdf((x - b) / h)).collect();
            stable_sum(&terms) * scale
        })
        .collect())
}

/// `points` equally spaced values spanning the mean ± 4 standard deviations.
pub fn kde_grid(estimates: &[f64], points: usize) -> Result<Vec<f64>> {
    let s = summarize_with_source(estimates, 0.0, ReferenceSource::None)?;
    let sd = s.variance.sqrt();
    let points = points.max(2);
    let (lo, hi) = (s.mean - 4.0 * sd, s.mean + 4.0 * sd);
    Ok((0..points)
        .map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub grid_n: Vec<usize>,
    pub log_mse: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Ordinary least squares of `ln mse` on `ln N`.
pub fn fit_rate(grid_n: &[usize], mse: &[f64]) -> Result<RateFit> {
    if grid_n.len() != mse.len() {
        return Err(Error::DimensionMismatch {
            expected: grid_n.len(),
            got: mse.len(),
        });
    }
    if grid_n.len() < 2 || grid_n.windows(2).any(|w| w[0] >= w[1]) || grid_n[0] == 0 {
        return Err(Error::InvalidArgument("rate grid must be strictly increasing with ≥ 2 positive points".into()));
    }
    if let Some(bad) = mse.iter().find(|&&m| !(m > 0.0) || !m.is_finite()) {
        return Err(Error::InvalidArgument(format!("mse values must be positive, got {bad}")));
    }
    let x: Vec<f64> = grid_n.iter().map(|&n| (n as f64).ln()).collect();
    let y: Vec<f64> = mse.iter().map(|m| m.ln()).collect();
    let k = x.len() as f64;
    let mx = x.iter().sum::<f64>() / k;
    let my = y.iter().sum::<f64>() / k;
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let syy: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(RateFit {
        grid_n: grid_n.to_vec(),
        log_mse: y,
        slope,
        intercept,
        r_squared,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summarize_examples() {
        let s = summarize(&[1.0, 2.0, 3.0], 2.0).unwrap();
        assert_eq!((s.mean, s.bias, s.variance), (2.0, 0.0, 1.0));
        assert!((s.mse - 2.0 / 3.0).abs() < 1e-15);
        let c = summarize(&[0.7; 5], 0.7).unwrap();
        assert_eq!((c.bias, c.variance, c.mse, c.stderr), (0.0, 0.0, 0.0, 0.0));
        assert!(matches!(summarize(&[1.0], 1.0), Err(Error::InsufficientReplications { .. })));
    }

    #[test]
    fn rate_fit_on_exact_power_law() {
        let grid = [10_000, 30_000, 100_000, 300_000, 1_000_000];
        let mse: Vec<f64> = grid.iter().map(|&n| (n as f64).powf(-2.0 / 3.0)).collect();
        let fit = fit_rate(&grid, &mse).unwrap();
        assert!((fit.slope + 2.0 / 3.0).abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
        assert!(fit.intercept.abs() < 1e-10);
        assert!(fit_rate(&[10, 10], &[1.0, 1.0]).is_err());
    }

    #[test]
    fn two_point_kde_is_a_sum_of_gaussians() {
        let data: Vec<f64> = (0..10).map(|i| if i % 2 == 0 { -1.0 } else { 1.0 }).collect();
        let h = silverman_bandwidth(&data).unwrap();
        let d = kde_of_estimates(&data, &[0.0, 0.5, -0.5]).unwrap();
        let expected = normal_pdf(1.0 / h) / h;
        assert!((d[0] - expected).abs() < 1e-15);
        assert!((d[1] - d[2]).abs() < 1e-15);
        assert!(kde_of_estimates(&data[..5], &[0.0]).is_err());
    }

    #[test]
    fn shape_of_symmetric_data() {
        let (skew, kurt) = shape(&[-1.0, 0.0, 1.0]).unwrap();
        assert_eq!(skew, 0.0);
        assert!((kurt + 1.5).abs() < 1e-12);
    }
}
