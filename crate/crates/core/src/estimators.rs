//! Greek estimators built on a randomized sample `{(Λᵢ, Zᵢ)}` around `λ⁰`.
//!
//! With `uᵢ = (λ⁰ − Λᵢ)/h`, the single-kernel estimators are
//!
//! ```text
//! β̂ = 1/(ℓ(0) N h²) Σ φ(Zᵢ) [K'(uᵢ) + h K(uᵢ) (ℓ'/ℓ)(λ⁰ − Λᵢ)]
//! β̌ = 1/(ℓ(0) N h²) Σ φ(Zᵢ) [K'(uᵢ) + h K(uᵢ) (ℓ'/ℓ)(0)]
//! ```
//!
//! and coincide whenever `ℓ` is truncated exponential. The parameter is one-dimensional
//! (the spot), and so is the state.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::market::{score, GbmParams, Payoff};
use crate::randomization::Randomizer;
use crate::scalar::{stable_sum, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum EstimatorId {
    /// β̂, integration by parts against the randomizer.
    Hat,
    /// β̌, derivative of the kernel price estimator.
    Check,
    /// β̂ᵘ with uniform randomizer of radius `Mh`.
    UniformOpt,
    /// β̂ᵉ with truncated exponential randomizer of radius `Mh`.
    ExponentialOpt,
    /// β̃, leave-one-out kernel score plugged into the kernel regression.
    DoubleKernel,
    /// Kernel regression with the true score.
    OracleLocalized,
    /// `(1/N) Σ φ(Zᵢ) s(λ⁰, Zᵢ)` at fixed `λ⁰`.
    LikelihoodRatio,
    FiniteDifference,
}

impl EstimatorId {
    pub const ALL: [EstimatorId; 8] = [
        EstimatorId::Hat,
        EstimatorId::Check,
        EstimatorId::UniformOpt,
        EstimatorId::ExponentialOpt,
        EstimatorId::DoubleKernel,
        EstimatorId::OracleLocalized,
        EstimatorId::LikelihoodRatio,
        EstimatorId::FiniteDifference,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EstimatorId::Hat => "hat",
            EstimatorId::Check => "check",
            EstimatorId::UniformOpt => "uniform",
            EstimatorId::ExponentialOpt => "exponential",
            EstimatorId::DoubleKernel => "double",
            EstimatorId::OracleLocalized => "oracle",
            EstimatorId::LikelihoodRatio => "lr",
            EstimatorId::FiniteDifference => "fd",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown estimator `{s}`")))
    }

    /// Estimators that sample a randomized parameter and smooth with a kernel.
    pub fn is_kernel(self) -> bool {
        !matches!(self, EstimatorId::LikelihoodRatio | EstimatorId::FiniteDifference)
    }
}

/// What the states `Zᵢ` are; only terminal values have a closed-form score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum StateKind {
    Terminal,
    AsianAverage,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplePoint<F> {
    pub lambda: F,
    pub state: F,
    pub payoff: F,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet<F> {
    lambda0: F,
    epsilon: Option<F>,
    state_kind: StateKind,
    points: Vec<SamplePoint<F>>,
}

impl<F: Real> SampleSet<F> {
    pub fn new(lambda0: F, points: Vec<SamplePoint<F>>) -> Self {
        SampleSet {
            lambda0,
            epsilon: None,
            state_kind: StateKind::Terminal,
            points,
        }
    }

    /// Evaluates `payoff` on each `(Λᵢ, Zᵢ)`.
    pub fn from_draws(lambda0: F, draws: &[(F, F)], payoff: &Payoff<F>) -> Self {
        let points = draws
            .iter()
            .map(|&(lambda, state)| SamplePoint {
                lambda,
                state,
                payoff: payoff.eval(state),
            })
            .collect();
        Self::new(lambda0, points)
    }

    /// Records the support radius of the randomizer that generated `Λᵢ`.
    pub fn with_generating_radius(mut self, epsilon: F) -> Self {
        self.epsilon = Some(epsilon);
        self
    }

    pub fn with_state_kind(mut self, kind: StateKind) -> Self {
        self.state_kind = kind;
        self
    }

    /// Same draws with payoffs recomputed from the states.
    pub fn with_payoff(&self, payoff: impl Fn(F) -> F) -> Self {
        let points = self
            .points
            .iter()
            .map(|p| SamplePoint {
                payoff: payoff(p.state),
                ..*p
            })
            .collect();
        SampleSet { points, ..self.clone() }
    }

    pub fn lambda0(&self) -> F {
        self.lambda0
    }

    pub fn generating_radius(&self) -> Option<F> {
        self.epsilon
    }

    pub fn state_kind(&self) -> StateKind {
        self.state_kind
    }

    pub fn points(&self) -> &[SamplePoint<F>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorConfig<F> {
    pub kernel: Kernel<F>,
    pub bandwidth: F,
    pub randomizer: Randomizer<F>,
    /// Kernel on the state for the double-kernel score estimate.
    pub second_kernel: Option<Kernel<F>>,
}

impl<F: Real> EstimatorConfig<F> {
    pub fn new(kernel: Kernel<F>, bandwidth: F, randomizer: Randomizer<F>) -> Self {
        EstimatorConfig {
            kernel,
            bandwidth,
            randomizer,
            second_kernel: None,
        }
    }

    pub fn with_second_kernel(mut self, kernel: Kernel<F>) -> Self {
        self.second_kernel = Some(kernel);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate<F> {
    pub value: F,
    pub n_samples: usize,
    pub estimator: EstimatorId,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FdConfig<F> {
    /// 0 backward, 0.5 centered, 1 forward.
    pub alpha: F,
    pub bump: F,
}

fn finish<F: Real>(value: F, n_samples: usize, estimator: EstimatorId) -> Result<Estimate<F>> {
    if !value.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "{} produced a non-finite value",
            estimator.as_str()
        )));
    }
    Ok(Estimate {
        value,
        n_samples,
        estimator,
    })
}

fn check_inputs<F: Real>(s: &SampleSet<F>, h: F) -> Result<()> {
    if s.is_empty() {
        return Err(Error::EmptySample);
    }
    if !(h > F::zero()) || !h.is_finite() {
        return Err(Error::DegenerateBandwidth(h.as_f64()));
    }
    Ok(())
}

enum Correction<F> {
    AtOffset(Randomizer<F>),
    Constant(F),
}

/// `Σ φ(Zᵢ) [K'(uᵢ) + h K(uᵢ) c(Lᵢ)]` in a fixed summation order.
fn single_kernel_sum<F: Real>(s: &SampleSet<F>, kernel: &Kernel<F>, h: F, correction: &Correction<F>) -> Result<F> {
    let m = kernel.support_radius();
    let mut terms = Vec::with_capacity(s.len());
    for p in s.points() {
        let offset = s.lambda0 - p.lambda;
        let u = offset / h;
        if u.abs() > m || p.payoff == F::zero() {
            continue;
        }
        let c = match correction {
            Correction::AtOffset(r) => r.grad_log_density(offset)?,
            Correction::Constant(c) => *c,
        };
        let weight = if c == F::zero() {
            kernel.gradient(u)
        } else {
            kernel.gradient(u) + h * kernel.eval(u) * c
        };
        terms.push(p.payoff * weight);
    }
    Ok(stable_sum(&terms))
}

/// β̂: the log-density gradient of `ℓ` is evaluated at each offset `λ⁰ − Λᵢ`.
pub fn single_kernel_hat<F: Real>(s: &SampleSet<F>, c: &EstimatorConfig<F>) -> Result<Estimate<F>> {
    check_inputs(s, c.bandwidth)?;
    let h = c.bandwidth;
    let sum = single_kernel_sum(s, &c.kernel, h, &Correction::AtOffset(c.randomizer))?;
    let n = F::from_usize_lossy(s.len());
    finish(sum / (c.randomizer.density_at_zero() * n * h * h), s.len(), EstimatorId::Hat)
}

/// β̌: the log-density gradient of `ℓ` is frozen at zero.
pub fn single_kernel_check<F: Real>(s: &SampleSet<F>, c: &EstimatorConfig<F>) -> Result<Estimate<F>> {
    check_inputs(s, c.bandwidth)?;
    let h = c.bandwidth;
    let at_zero = c.randomizer.grad_log_density(F::zero())?;
    let sum = single_kernel_sum(s, &c.kernel, h, &Correction::Constant(at_zero))?;
    let n = F::from_usize_lossy(s.len());
    finish(sum / (c.randomizer.density_at_zero() * n * h * h), s.len(), EstimatorId::Check)
}

fn check_tied_radius<F: Real>(s: &SampleSet<F>, kernel: &Kernel<F>, h: F) -> Result<F> {
    let tied = kernel.support_radius() * h;
    let Some(eps) = s.generating_radius() else {
        return Err(Error::RandomizerMismatch(
            "sample set does not record its randomizer radius".into(),
        ));
    };
    if (eps - tied).abs() > F::lit(1e-9) * tied {
        return Err(Error::RandomizerMismatch(format!(
            "samples drawn with radius {eps}, estimator needs M·h = {tied}"
        )));
    }
    Ok(tied)
}

/// β̂ᵘ for samples drawn uniformly on `[λ⁰ − Mh, λ⁰ + Mh]`: `2M/(N h) Σ φ(Zᵢ) K'(uᵢ)`.
pub fn uniform_opt<F: Real>(s: &SampleSet<F>, kernel: &Kernel<F>, h: F) -> Result<Estimate<F>> {
    check_inputs(s, h)?;
    check_tied_radius(s, kernel, h)?;
    let sum = single_kernel_sum(s, kernel, h, &Correction::Constant(F::zero()))?;
    let n = F::from_usize_lossy(s.len());
    let value = F::lit(2.0) * kernel.support_radius() * sum / (n * h);
    finish(value, s.len(), EstimatorId::UniformOpt)
}

/// β̂ᵉ for samples drawn from the truncated exponential density of tilt `θ` on `[−Mh, Mh]`.
///
/// Reduces to [`uniform_opt`] at `θ = 0`.
pub fn exponential_opt<F: Real>(s: &SampleSet<F>, kernel: &Kernel<F>, h: F, theta: F) -> Result<Estimate<F>> {
    check_inputs(s, h)?;
    let eps = check_tied_radius(s, kernel, h)?;
    if theta == F::zero() {
        let mut e = uniform_opt(s, kernel, h)?;
        e.estimator = EstimatorId::ExponentialOpt;
        return Ok(e);
    }
    let randomizer = Randomizer::truncated_exponential(theta, eps)?;
    let sum = single_kernel_sum(s, kernel, h, &Correction::Constant(theta))?;
    let n = F::from_usize_lossy(s.len());
    finish(sum / (randomizer.density_at_zero() * n * h * h), s.len(), EstimatorId::ExponentialOpt)
}

/// β̃: leave-one-out kernel estimate of the score plugged into the kernel regression.
///
/// `ŝ⁻ⁱ = φ̂λ⁻ⁱ/φ̂⁻ⁱ + (ℓ'/ℓ)(λ⁰ − Λᵢ)`, where `φ̂⁻ⁱ` is the product-kernel density estimate of
/// `(Λ, Z)` without point `i`. Terms whose density estimate falls below `1e-12·h⁻²` are dropped.
pub fn double_kernel<F: Real>(s: &SampleSet<F>, c: &EstimatorConfig<F>) -> Result<Estimate<F>> {
    let second = c.second_kernel.as_ref().ok_or(Error::MissingSecondKernel)?;
    check_inputs(s, c.bandwidth)?;
    if s.len() < 2 {
        return Err(Error::InsufficientSamples {
            needed: 2,
            got: s.len(),
        });
    }
    let h = c.bandwidth;
    let k = &c.kernel;
    let mk = k.support_radius();
    let window = second.support_radius() * h;
    let points = s.points();

    let mut by_state: Vec<usize> = (0..points.len()).collect();
    by_state.sort_by(|&a, &b| points[a].state.partial_cmp(&points[b].state).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b)));
    let states: Vec<F> = by_state.iter().map(|&i| points[i].state).collect();

    let n1 = F::from_usize_lossy(points.len() - 1);
    let floor = F::lit(1e-12) / (h * h);
    let lambda0 = s.lambda0;

    let terms: Vec<Result<F>> = (0..points.len())
        .into_par_iter()
        .map(|i| {
            let pi = points[i];
            let u0 = (lambda0 - pi.lambda) / h;
            let weight = k.eval(u0);
            if weight == F::zero() || pi.payoff == F::zero() {
                return Ok(F::zero());
            }
            let lo = states.partition_point(|&z| z < pi.state - window);
            let hi = states.partition_point(|&z| z <= pi.state + window);
            let (mut dens, mut grad) = (F::zero(), F::zero());
            for &j in &by_state[lo..hi] {
                if j == i {
                    continue;
                }
                let pj = points[j];
                let ul = (pi.lambda - pj.lambda) / h;
                if ul.abs() > mk {
                    continue;
                }
                let hz = second.eval((pi.state - pj.state) / h);
                if hz == F::zero() {
                    continue;
                }
                dens += k.eval(ul) * hz;
                grad += k.gradient(ul) * hz;
            }
            let dens = dens / (n1 * h * h);
            if dens < floor {
                return Ok(F::zero());
            }
            let grad = grad / (n1 * h * h * h);
            let correction = c.randomizer.grad_log_density(lambda0 - pi.lambda)?;
            Ok(pi.payoff * (grad / dens + correction) * weight)
        })
        .collect();
    let terms = terms.into_iter().collect::<Result<Vec<F>>>()?;
    let n = F::from_usize_lossy(points.len());
    let value = stable_sum(&terms) / (c.randomizer.density_at_zero() * n * h);
    finish(value, points.len(), EstimatorId::DoubleKernel)
}

fn require_score<F: Real>(s: &SampleSet<F>) -> Result<()> {
    match s.state_kind() {
        StateKind::Terminal => Ok(()),
        StateKind::AsianAverage => Err(Error::ScoreUnavailable),
    }
}

/// Kernel regression with the exact score `s(Λᵢ, Zᵢ)` of the terminal lognormal law.
pub fn oracle_localized<F: Real>(s: &SampleSet<F>, c: &EstimatorConfig<F>, model: &GbmParams<F>) -> Result<Estimate<F>> {
    require_score(s)?;
    check_inputs(s, c.bandwidth)?;
    let h = c.bandwidth;
    let terms: Vec<F> = s
        .points()
        .iter()
        .filter_map(|p| {
            let w = c.kernel.eval((s.lambda0 - p.lambda) / h);
            (w != F::zero() && p.payoff != F::zero())
                .then(|| p.payoff * score(&model.with_spot(p.lambda), p.state) * w)
        })
        .collect();
    let n = F::from_usize_lossy(s.len());
    let value = stable_sum(&terms) / (c.randomizer.density_at_zero() * n * h);
    finish(value, s.len(), EstimatorId::OracleLocalized)
}

/// Likelihood-ratio estimator on states simulated at the fixed spot `λ⁰`.
pub fn likelihood_ratio<F: Real>(s: &SampleSet<F>, model: &GbmParams<F>) -> Result<Estimate<F>> {
    require_score(s)?;
    if s.is_empty() {
        return Err(Error::EmptySample);
    }
    let at = model.with_spot(s.lambda0);
    let terms: Vec<F> = s
        .points()
        .iter()
        .map(|p| p.payoff * score(&at, p.state))
        .collect();
    let value = stable_sum(&terms) / F::from_usize_lossy(s.len());
    finish(value, s.len(), EstimatorId::LikelihoodRatio)
}

/// `(1/(Nε)) Σ [φ(Zⁱ(λ⁰ + αε)) − φ(Zⁱ(λ⁰ − (1−α)ε))]`.
///
/// `simulate(spot, i)` must drive both bumped states of sample `i` with the same randoms.
pub fn finite_difference<F, S>(payoff: &Payoff<F>, fd: &FdConfig<F>, lambda0: F, n: usize, simulate: S) -> Result<Estimate<F>>
where
    F: Real,
    S: Fn(F, usize) -> F,
{
    if !(fd.bump > F::zero()) || !fd.bump.is_finite() {
        return Err(Error::DegenerateBump(fd.bump.as_f64()));
    }
    if !(fd.alpha >= F::zero() && fd.alpha <= F::one()) {
        return Err(Error::InvalidArgument(format!("alpha must lie in [0, 1], got {}", fd.alpha)));
    }
    if n == 0 {
        return Err(Error::EmptySample);
    }
    let up = lambda0 + fd.alpha * fd.bump;
    let down = lambda0 - (F::one() - fd.alpha) * fd.bump;
    let terms: Vec<F> = (0..n)
        .map(|i| payoff.eval(simulate(up, i)) - payoff.eval(simulate(down, i)))
        .collect();
    let value = stable_sum(&terms) / (F::from_usize_lossy(n) * fd.bump);
    finish(value, n, EstimatorId::FiniteDifference)
}

/// Finite differences on terminal values, one standard normal per sample.
pub fn finite_difference_terminal<F: Real>(model: &GbmParams<F>, payoff: &Payoff<F>, fd: &FdConfig<F>, gaussians: &[F]) -> Result<Estimate<F>> {
    finite_difference(payoff, fd, model.spot, gaussians.len(), |spot, i| {
        model.with_spot(spot).terminal(gaussians[i])
    })
}
