//! Seeded replications of one estimator configuration.

use std::time::Instant;

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{BandwidthSpec, ExperimentConfig};
use super::rng::{chunk_count, chunk_rng, gaussian, uniform, Purpose, CHUNK};
use crate::bandwidth::{optimize_theta, select_bandwidth_at, theta_bracket, BandwidthChoice, BandwidthMode, PilotEstimates};
use crate::error::{Error, Result};
use crate::estimators::{
    double_kernel, exponential_opt, finite_difference, likelihood_ratio, oracle_localized, single_kernel_check,
    single_kernel_hat, uniform_opt, EstimatorConfig, EstimatorId, FdConfig, SamplePoint, SampleSet, StateKind,
};
use crate::market::{european_delta, simulate_asian, AsianConfig, GbmParams};
use crate::randomization::{Randomizer, RandomizerKind};
use crate::scalar::stable_sum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ReferenceSource {
    ClosedForm,
    #[serde(rename = "HighN_FD")]
    HighNFd,
    None,
}

impl ReferenceSource {
    pub fn as_str(self) -> &'static str {
        match self {
            ReferenceSource::ClosedForm => "ClosedForm",
            ReferenceSource::HighNFd => "HighN_FD",
            ReferenceSource::None => "None",
        }
    }
}

/// Smoothing parameters resolved for a configuration before the main run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunPlan {
    pub estimator: EstimatorId,
    pub h: Option<f64>,
    pub theta: f64,
    pub epsilon: Option<f64>,
    pub choice: Option<BandwidthChoice<f64>>,
    pub pilot: Option<PilotEstimates<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationRun {
    pub plan: RunPlan,
    pub estimates: Vec<f64>,
    pub runtimes_ms: Vec<f64>,
}

/// `Z(x) / x` for one sample: the state is linear in the spot under these dynamics.
fn unit_state(model: &GbmParams<f64>, asian: Option<&AsianConfig>, rng: &mut ChaCha8Rng, path: &mut Vec<f64>) -> f64 {
    let unit = model.with_spot(1.0);
    match asian {
        None => unit.terminal(gaussian(rng)),
        Some(a) => {
            path.clear();
            path.extend((0..a.steps).map(|_| gaussian(rng)));
            simulate_asian(&unit, a, path).expect("path length matches the step count")
        }
    }
}

/// `n` pairs `(uᵢ, wᵢ)`: a uniform for the randomized parameter (when `with_offset`) and the
/// unit state multiplier, drawn from chunked streams of `(seed, purpose, replication)`.
fn draws(cfg: &ExperimentConfig, purpose: Purpose, replication: usize, n: usize, with_offset: bool) -> Vec<(f64, f64)> {
    (0..chunk_count(n))
        .into_par_iter()
        .map(|c| {
            let mut rng = chunk_rng(cfg.seed, purpose, replication, c);
            let mut path = Vec::new();
            let len = CHUNK.min(n - c * CHUNK);
            (0..len)
                .map(|_| {
                    let u = if with_offset { uniform(&mut rng) } else { 0.0 };
                    (u, unit_state(&cfg.model, cfg.asian.as_ref(), &mut rng, &mut path))
                })
                .collect::<Vec<_>>()
        })
        .collect::<Vec<_>>()
        .concat()
}

fn state_kind(cfg: &ExperimentConfig) -> StateKind {
    if cfg.asian.is_some() {
        StateKind::AsianAverage
    } else {
        StateKind::Terminal
    }
}

/// Pilot constants from `pilot_n` states at the spot, independent of the main sample size.
pub fn pilot_estimates(cfg: &ExperimentConfig) -> Result<PilotEstimates<f64>> {
    let spot = cfg.model.spot;
    let states: Vec<f64> = draws(cfg, Purpose::Pilot, 0, cfg.pilot_n, false)
        .into_iter()
        .map(|(_, w)| spot * w)
        .collect();
    let law = (cfg.asian.is_none() && !cfg.plugin_law).then(|| cfg.model.law());
    PilotEstimates::from_states(&states, &cfg.payoff(), spot, &cfg.kernel(), law)
}

/// Resolves bandwidth, tilt and randomizer radius, running the pilot when needed.
pub fn plan(cfg: &ExperimentConfig) -> Result<RunPlan> {
    cfg.validate()?;
    if !cfg.estimator.is_kernel() {
        return Ok(RunPlan {
            estimator: cfg.estimator,
            h: None,
            theta: 0.0,
            epsilon: None,
            choice: None,
            pilot: None,
        });
    }
    let kind = cfg.randomizer_kind();
    let kernel = cfg.kernel();
    let spec = cfg.bandwidth.unwrap_or(BandwidthSpec::Auto);
    let fixed_theta = match kind {
        RandomizerKind::Uniform => Some(0.0),
        RandomizerKind::TruncExp => cfg.theta,
    };
    let pilot = match (spec, fixed_theta) {
        (BandwidthSpec::Fixed(_), Some(_)) => None,
        _ => Some(pilot_estimates(cfg)?),
    };
    let mode = match kind {
        RandomizerKind::Uniform => BandwidthMode::UniformOpt,
        RandomizerKind::TruncExp => BandwidthMode::ExpOpt,
    };
    let (h, theta, choice) = match (spec, &pilot) {
        (BandwidthSpec::Auto, Some(pilot)) => {
            let c = select_bandwidth_at(pilot, &kernel, mode, cfg.n, fixed_theta)?;
            (c.h_star, c.theta_star, Some(c))
        }
        (BandwidthSpec::Fixed(h), _) => {
            let theta = match (fixed_theta, &pilot) {
                (Some(t), _) => t,
                (None, Some(pilot)) => {
                    let p = kernel.order();
                    let bracket = theta_bracket(kernel.support_radius(), p, cfg.n);
                    optimize_theta(&pilot.e, p, kernel.moment(p), bracket)?
                }
                (None, None) => unreachable!("a pilot runs whenever the tilt is free"),
            };
            (h, theta, None)
        }
        (BandwidthSpec::Auto, None) => unreachable!("automatic bandwidth always runs a pilot"),
    };
    let epsilon = cfg.epsilon.unwrap_or(kernel.support_radius() * h);
    if epsilon >= cfg.model.spot {
        return Err(Error::InvalidConfig(format!(
            "randomizer radius {epsilon} would move the spot {} out of (0, ∞)",
            cfg.model.spot
        )));
    }
    Ok(RunPlan {
        estimator: cfg.estimator,
        h: Some(h),
        theta,
        epsilon: Some(epsilon),
        choice,
        pilot,
    })
}

/// The randomized sample of one replication; antithetic runs reflect each fresh offset.
pub fn kernel_sample(cfg: &ExperimentConfig, plan: &RunPlan, replication: usize) -> Result<SampleSet<f64>> {
    let eps = plan
        .epsilon
        .ok_or_else(|| Error::InvalidConfig("kernel sample without a randomizer radius".into()))?;
    let randomizer = Randomizer::new(cfg.randomizer_kind(), eps, plan.theta)?;
    let spot = cfg.model.spot;
    let payoff = cfg.payoff();
    let n = cfg.n;
    let (fresh, paired) = if cfg.antithetic { (n - n / 2, n / 2) } else { (n, 0) };
    let raw = draws(cfg, Purpose::Main, replication, fresh, true);
    let mut points = Vec::with_capacity(n);
    let point = |lambda: f64, w: f64| {
        let state = lambda * w;
        SamplePoint {
            lambda,
            state,
            payoff: payoff.eval(state),
        }
    };
    for (i, &(u, w)) in raw.iter().enumerate() {
        let draw = randomizer.sample_offset(u, spot);
        points.push(point(draw.lambda, w));
        if i < paired {
            points.push(point(draw.antithetic(spot).lambda, w));
        }
    }
    Ok(SampleSet::new(spot, points)
        .with_generating_radius(eps)
        .with_state_kind(state_kind(cfg)))
}

fn evaluate(cfg: &ExperimentConfig, plan: &RunPlan, replication: usize) -> Result<f64> {
    let spot = cfg.model.spot;
    let payoff = cfg.payoff();
    match cfg.estimator {
        EstimatorId::LikelihoodRatio => {
            let points: Vec<SamplePoint<f64>> = draws(cfg, Purpose::Main, replication, cfg.n, false)
                .into_iter()
                .map(|(_, w)| {
                    let state = spot * w;
                    SamplePoint {
                        lambda: spot,
                        state,
                        payoff: payoff.eval(state),
                    }
                })
                .collect();
            let s = SampleSet::new(spot, points).with_state_kind(state_kind(cfg));
            Ok(likelihood_ratio(&s, &cfg.model)?.value)
        }
        EstimatorId::FiniteDifference => {
            let units: Vec<f64> = draws(cfg, Purpose::Main, replication, cfg.n, false)
                .into_iter()
                .map(|(_, w)| w)
                .collect();
            let fd = FdConfig {
                alpha: cfg.fd_alpha,
                bump: cfg.fd_eps,
            };
            Ok(finite_difference(&payoff, &fd, spot, cfg.n, |x, i| x * units[i])?.value)
        }
        id => {
            let s = kernel_sample(cfg, plan, replication)?;
            let kernel = cfg.kernel();
            let h = plan.h.expect("kernel plans carry a bandwidth");
            let eps = plan.epsilon.expect("kernel plans carry a radius");
            let randomizer = Randomizer::new(cfg.randomizer_kind(), eps, plan.theta)?;
            let ec = EstimatorConfig::new(kernel.clone(), h, randomizer);
            let e = match id {
                EstimatorId::Hat => single_kernel_hat(&s, &ec)?,
                EstimatorId::Check => single_kernel_check(&s, &ec)?,
                EstimatorId::UniformOpt => uniform_opt(&s, &kernel, h)?,
                EstimatorId::ExponentialOpt => exponential_opt(&s, &kernel, h, plan.theta)?,
                EstimatorId::DoubleKernel => double_kernel(&s, &ec.with_second_kernel(kernel.clone()))?,
                EstimatorId::OracleLocalized => oracle_localized(&s, &ec, &cfg.model)?,
                EstimatorId::LikelihoodRatio | EstimatorId::FiniteDifference => unreachable!(),
            };
            Ok(e.value)
        }
    }
}

fn run_planned(cfg: &ExperimentConfig, plan: RunPlan) -> Result<ReplicationRun> {
    let results: Vec<Result<(f64, f64)>> = (0..cfg.reps)
        .into_par_iter()
        .map(|j| {
            let start = Instant::now();
            let v = evaluate(cfg, &plan, j).map_err(|e| Error::Replication {
                index: j,
                source: Box::new(e),
            })?;
            Ok((v, start.elapsed().as_secs_f64() * 1e3))
        })
        .collect();
    let mut estimates = Vec::with_capacity(cfg.reps);
    let mut runtimes_ms = Vec::with_capacity(cfg.reps);
    for r in results {
        let (v, t) = r?;
        estimates.push(v);
        runtimes_ms.push(t);
    }
    Ok(ReplicationRun {
        plan,
        estimates,
        runtimes_ms,
    })
}

/// Runs `R` replications on the global thread pool.
pub fn run_replications(cfg: &ExperimentConfig) -> Result<ReplicationRun> {
    let plan = plan(cfg)?;
    run_planned(cfg, plan)
}

/// Runs `R` replications on a dedicated pool of `workers` threads. The estimates do not
/// depend on `workers`.
pub fn run_replications_with_workers(cfg: &ExperimentConfig, workers: usize) -> Result<ReplicationRun> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot start {workers} workers: {e}")))?;
    pool.install(|| run_replications(cfg))
}

/// Closed form for European states, a large centered finite difference for path averages.
pub fn reference_value(cfg: &ExperimentConfig) -> Result<(f64, ReferenceSource)> {
    if cfg.asian.is_none() {
        return Ok((european_delta(&cfg.model, &cfg.payoff()), ReferenceSource::ClosedForm));
    }
    let n = cfg.reference_n;
    let eps = cfg.reference_eps;
    if n == 0 {
        return Ok((f64::NAN, ReferenceSource::None));
    }
    if !(eps > 0.0) || eps >= 2.0 * cfg.model.spot {
        return Err(Error::DegenerateBump(eps));
    }
    let payoff = cfg.payoff();
    let up = cfg.model.spot + 0.5 * eps;
    let down = cfg.model.spot - 0.5 * eps;
    let chunk_sums: Vec<f64> = (0..chunk_count(n))
        .into_par_iter()
        .map(|c| {
            let mut rng = chunk_rng(cfg.seed, Purpose::Reference, 0, c);
            let mut path = Vec::new();
            let len = CHUNK.min(n - c * CHUNK);
            let terms: Vec<f64> = (0..len)
                .map(|_| {
                    let w = unit_state(&cfg.model, cfg.asian.as_ref(), &mut rng, &mut path);
                    payoff.eval(up * w) - payoff.eval(down * w)
                })
                .collect();
            stable_sum(&terms)
        })
        .collect();
    Ok((stable_sum(&chunk_sums) / (n as f64 * eps), ReferenceSource::HighNFd))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::PayoffKind;

    fn small() -> ExperimentConfig {
        ExperimentConfig {
            n: 5000,
            reps: 4,
            pilot_n: 2000,
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn zero_payoff_gives_zero() {
        // digital with an unreachable strike is identically zero
        let cfg = ExperimentConfig {
            reps: 1,
            strike: 1e12,
            bandwidth: Some(BandwidthSpec::Fixed(1.0)),
            ..small()
        };
        assert_eq!(run_replications(&cfg).unwrap().estimates, vec![0.0]);
    }

    #[test]
    fn worker_count_does_not_change_estimates() {
        for id in [EstimatorId::UniformOpt, EstimatorId::LikelihoodRatio, EstimatorId::FiniteDifference] {
            let cfg = small().with_estimator(id);
            let one = run_replications_with_workers(&cfg, 1).unwrap();
            let eight = run_replications_with_workers(&cfg, 8).unwrap();
            assert_eq!(one.estimates, eight.estimates, "{}", id.as_str());
        }
    }

    #[test]
    fn antithetic_sample_is_reflected() {
        let cfg = ExperimentConfig {
            n: 11,
            antithetic: true,
            bandwidth: Some(BandwidthSpec::Fixed(2.0)),
            ..small()
        };
        let plan = plan(&cfg).unwrap();
        let s = kernel_sample(&cfg, &plan, 0).unwrap();
        assert_eq!(s.len(), 11);
        for pair in s.points()[..10].chunks(2) {
            assert!((pair[0].lambda + pair[1].lambda - 240.0).abs() < 1e-12);
        }
        assert!(s.points().iter().all(|p| (p.lambda - 120.0).abs() <= 2.0));
    }

    #[test]
    fn plan_ties_radius_to_bandwidth() {
        let cfg = ExperimentConfig {
            bandwidth: Some(BandwidthSpec::Fixed(3.0)),
            kernel: crate::KernelFamily::Poly4,
            ..small()
        };
        let p = plan(&cfg).unwrap();
        assert_eq!(p.epsilon, Some(3.0));
        assert!(p.pilot.is_none());
        let too_wide = ExperimentConfig {
            bandwidth: Some(BandwidthSpec::Fixed(200.0)),
            ..small()
        };
        assert!(plan(&too_wide).is_err());
    }

    #[test]
    fn replication_errors_carry_the_index() {
        let cfg = ExperimentConfig {
            asian: Some(AsianConfig { steps: 4, ..AsianConfig::default() }),
            estimator: EstimatorId::LikelihoodRatio,
            payoff: PayoffKind::Vanilla,
            ..small()
        };
        match run_replications(&cfg) {
            Err(Error::Replication { index: 0, source }) => assert!(matches!(*source, Error::ScoreUnavailable)),
            other => panic!("unexpected {other:?}"),
        }
    }
}
