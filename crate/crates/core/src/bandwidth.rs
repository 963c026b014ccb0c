//! Pilot estimation of the bias and variance constants and the resulting bandwidth selectors.
//!
//! The pilot estimates `Eₖ = E[φ(Z) ∇ₓᵏf/f (x, Z)]` for `k = 1..=p+1` using the lognormal
//! derivative ratios, either under the true law or under a rule-of-thumb lognormal fit of
//! the pilot states. For the truncated exponential randomizer the leading bias constant is
//!
//! ```text
//! Cₑ(θ) = ((−1)ᵖ/p!) (∫uᵖK) Σₖ C(p, k−1) Eₖ (−θ)^{p−k+1}
//! ```
//!
//! and `θ = 0` gives the uniform constant `Cᵤ = ((−1)ᵖ/p!) (∫uᵖK) E_{p+1}`.

use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::market::{score_coefficients, LognormalLaw, Payoff};
use crate::scalar::{stable_sum, Real};

/// Minimum pilot size accepted by [`PilotEstimates::from_states`].
pub const MIN_PILOT: usize = 100;
/// Default pilot size of the automatic bandwidth pipeline.
pub const DEFAULT_PILOT: usize = 10_000;
/// A bias constant below this fraction of the magnitude of its own terms is treated as zero.
pub const DEGENERATE_BIAS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum BandwidthMode {
    UniformOpt,
    ExpOpt,
    GeneralHat,
    GeneralCheck,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PilotEstimates<F> {
    /// `E[k - 1]` holds `Eₖ`, `k = 1..=p+1`.
    pub e: Vec<F>,
    /// `E[φ²(Z)]`.
    pub second_moment: F,
    /// `2M E[φ²] ∫(K')²`.
    pub sigma_e: F,
    pub m_hat: F,
    pub sigma_hat: F,
    pub pilot_n: usize,
}

/// A bias constant together with the magnitude of the terms it was summed from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiasConstant<F> {
    pub value: F,
    pub scale: F,
}

impl<F: Real> BiasConstant<F> {
    pub fn exact(value: F) -> Self {
        BiasConstant {
            value,
            scale: value.abs(),
        }
    }

    pub fn is_degenerate(&self) -> bool {
        self.value == F::zero() || self.value.abs() < F::lit(DEGENERATE_BIAS) * self.scale
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandwidthValue<F> {
    pub h: F,
    /// The bias constant vanished and `h = N^{−1/(2p+2)}` was used instead of the MSE optimum.
    pub degenerate: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandwidthChoice<F> {
    pub h_star: F,
    pub theta_star: F,
    pub predicted_mse: F,
    pub bias_constant: F,
    pub sigma: F,
    pub mode: BandwidthMode,
    pub degenerate: bool,
}

/// Sample mean and unbiased sample variance of `ln(Zᵢ/x)`.
pub fn rule_of_thumb_moments<F: Real>(states: &[F], x: F) -> Result<LognormalLaw<F>> {
    if states.len() < 2 {
        return Err(Error::InsufficientPilot {
            needed: 2,
            got: states.len(),
        });
    }
    if let Some(&bad) = states.iter().find(|&&z| !(z > F::zero())) {
        return Err(Error::NonPositiveState(bad.as_f64()));
    }
    let logs: Vec<F> = states.iter().map(|&z| (z / x).ln()).collect();
    let n = F::from_usize_lossy(logs.len());
    let mean = stable_sum(&logs) / n;
    let sq: Vec<F> = logs.iter().map(|&y| (y - mean) * (y - mean)).collect();
    let var = stable_sum(&sq) / (n - F::one());
    let noise = F::lit(64.0) * F::epsilon() * mean.abs();
    if !(var > noise * noise) {
        return Err(Error::DegenerateVariance);
    }
    Ok(LognormalLaw { m: mean, sigma2: var })
}

/// Monte Carlo `Eₖ = (1/N) Σ φ(Zᵢ) (Σⱼ aⱼᵏ d(x, Zᵢ)ʲ)/xᵏ` under `law`.
pub fn estimate_ek<F: Real>(states: &[F], payoff: &Payoff<F>, x: F, k: usize, law: &LognormalLaw<F>) -> Result<F> {
    if states.is_empty() {
        return Err(Error::EmptySample);
    }
    let coeffs = score_coefficients(law, k)?;
    let ln_x = x.ln();
    let terms: Vec<F> = states
        .iter()
        .map(|&z| {
            let phi = payoff.eval(z);
            if phi == F::zero() {
                return F::zero();
            }
            let d = (z.ln() - ln_x - law.m) / law.sigma2;
            phi * coeffs.ratio(d, x)
        })
        .collect();
    Ok(stable_sum(&terms) / F::from_usize_lossy(states.len()))
}

impl<F: Real> PilotEstimates<F> {
    /// Runs the pilot on states simulated at `x`.
    ///
    /// With `law = None` the derivative ratios use the rule-of-thumb law fitted to the states.
    pub fn from_states(states: &[F], payoff: &Payoff<F>, x: F, kernel: &Kernel<F>, law: Option<LognormalLaw<F>>) -> Result<Self> {
        if states.len() < MIN_PILOT {
            return Err(Error::InsufficientPilot {
                needed: MIN_PILOT,
                got: states.len(),
            });
        }
        let fitted = rule_of_thumb_moments(states, x)?;
        let law = law.unwrap_or(fitted);
        let p = kernel.order() as usize;
        let e = (1..=p + 1)
            .map(|k| estimate_ek(states, payoff, x, k, &law))
            .collect::<Result<Vec<F>>>()?;
        let squares: Vec<F> = states
            .iter()
            .map(|&z| {
                let v = payoff.eval(z);
                v * v
            })
            .collect();
        let second_moment = stable_sum(&squares) / F::from_usize_lossy(states.len());
        let sigma_e = F::lit(2.0) * kernel.support_radius() * second_moment * kernel.roughness();
        Ok(PilotEstimates {
            e,
            second_moment,
            sigma_e,
            m_hat: fitted.m,
            sigma_hat: fitted.sigma2,
            pilot_n: states.len(),
        })
    }
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

fn binomial(n: u32, k: u32) -> f64 {
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// Coefficients of `Cₑ` as a polynomial in `θ` (index = power of `θ`).
fn ce_polynomial<F: Real>(e: &[F], p: u32, moment_p: F) -> Result<Vec<F>> {
    if e.len() < p as usize + 1 {
        return Err(Error::DimensionMismatch {
            expected: p as usize + 1,
            got: e.len(),
        });
    }
    let sign = if p.is_multiple_of(2) { 1.0 } else { -1.0 };
    let lead = F::lit(sign / factorial(p)) * moment_p;
    // term k has power j = p − k + 1 and coefficient C(p, k−1) Eₖ (−1)^j
    Ok((0..=p)
        .map(|j| {
            let k = p + 1 - j;
            let s = if j % 2 == 0 { F::one() } else { -F::one() };
            lead * F::lit(binomial(p, k - 1)) * e[k as usize - 1] * s
        })
        .collect())
}

fn poly_eval<F: Real>(coeffs: &[F], x: F) -> F {
    coeffs.iter().rev().fold(F::zero(), |acc, &c| acc * x + c)
}

fn poly_derivative<F: Real>(coeffs: &[F]) -> Vec<F> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(j, &c)| c * F::from_usize_lossy(j))
        .collect()
}

pub fn bias_constant_ce<F: Real>(e: &[F], p: u32, moment_p: F, theta: F) -> Result<F> {
    Ok(poly_eval(&ce_polynomial(e, p, moment_p)?, theta))
}

/// `Cₑ(θ)` with the summed magnitude of its terms, for the degeneracy test.
pub fn bias_constant_with_scale<F: Real>(e: &[F], p: u32, moment_p: F, theta: F) -> Result<BiasConstant<F>> {
    let poly = ce_polynomial(e, p, moment_p)?;
    let scale = poly
        .iter()
        .enumerate()
        .fold(F::zero(), |acc, (j, &c)| acc + (c * theta.powi(j as i32)).abs());
    Ok(BiasConstant {
        value: poly_eval(&poly, theta),
        scale,
    })
}

/// `Cᵤ = Cₑ(0)`.
pub fn bias_constant_cu<F: Real>(e: &[F], p: u32, moment_p: F) -> Result<F> {
    bias_constant_ce(e, p, moment_p, F::zero())
}

/// Search bracket `50/(M h_ref)` with `h_ref = N^{−1/(2p+2)}`.
pub fn theta_bracket<F: Real>(support_radius: F, p: u32, n: usize) -> F {
    let h_ref = F::from_usize_lossy(n.max(1)).powf(-F::one() / F::from_usize_lossy(2 * p as usize + 2));
    F::lit(50.0) / (support_radius * h_ref)
}

/// Minimizes `Cₑ(θ)²` over `[−θ_max, θ_max]`.
///
/// Damped Gauss–Newton on `Cₑ` from `θ = 0`; when that stalls away from a root, a grid scan
/// followed by golden-section refinement. Returns 0 when `Cₑ` does not depend on `θ`.
pub fn optimize_theta<F: Real>(e: &[F], p: u32, moment_p: F, theta_max: F) -> Result<F> {
    let poly = ce_polynomial(e, p, moment_p)?;
    let dpoly = poly_derivative(&poly);
    let c0 = poly[0];
    if poly[1..].iter().all(|&c| c == F::zero()) || c0 == F::zero() {
        return Ok(F::zero());
    }
    let ce = |t: F| poly_eval(&poly, t);
    let clamp = |t: F| t.max(-theta_max).min(theta_max);
    let tol = F::lit(1e-14) * c0.abs();

    let mut theta = F::zero();
    for _ in 0..200 {
        let c = ce(theta);
        if c.abs() <= tol {
            break;
        }
        let dc = poly_eval(&dpoly, theta);
        if dc == F::zero() {
            break;
        }
        let step = -c / dc;
        let mut t = F::one();
        let mut moved = false;
        while t > F::lit(1e-12) {
            let cand = clamp(theta + t * step);
            if ce(cand).abs() < c.abs() {
                theta = cand;
                moved = true;
                break;
            }
            t *= F::lit(0.5);
        }
        if !moved {
            break;
        }
    }
    if ce(theta).abs() <= F::lit(1e-12) * c0.abs() {
        return Ok(theta);
    }

    let objective = |t: F| {
        let c = ce(t);
        c * c
    };
    let grid = 4000;
    let width = F::lit(2.0) * theta_max / F::from_usize_lossy(grid);
    let mut best = theta;
    for i in 0..=grid {
        let t = -theta_max + width * F::from_usize_lossy(i);
        if objective(t) < objective(best) {
            best = t;
        }
    }
    let refined = golden_section(&objective, clamp(best - width), clamp(best + width));
    Ok(if objective(refined) < objective(best) { refined } else { best })
}

fn golden_section<F: Real>(f: &impl Fn(F) -> F, mut a: F, mut b: F) -> F {
    let inv_phi = F::lit((5f64.sqrt() - 1.0) / 2.0);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    for _ in 0..200 {
        if f(c) < f(d) {
            b = d;
        } else {
            a = c;
        }
        c = b - inv_phi * (b - a);
        d = a + inv_phi * (b - a);
        if (b - a).abs() <= F::epsilon() * (a.abs() + b.abs()) {
            break;
        }
    }
    (a + b) / F::lit(2.0)
}

/// Asymptotically MSE-optimal bandwidth.
///
/// General modes: `((d+2) Tr Σ / (2p |C|² N))^{1/(d+2p+2)}`; radius tied to `h`:
/// `(Tr Σ / (p |C|² N))^{1/(2p+2)}`. A vanishing bias constant falls back to `N^{−1/(2p+2)}`.
pub fn optimal_bandwidth<F: Real>(mode: BandwidthMode, sigma: F, bias: BiasConstant<F>, p: u32, d: u32, n: usize) -> Result<BandwidthValue<F>> {
    if !(sigma > F::zero()) || !sigma.is_finite() {
        return Err(Error::NonPositiveVariance(sigma.as_f64()));
    }
    if p < 2 || n == 0 {
        return Err(Error::InvalidArgument(format!("need p ≥ 2 and N ≥ 1, got p = {p}, N = {n}")));
    }
    let nf = F::from_usize_lossy(n);
    let pf = F::from_usize_lossy(p as usize);
    if bias.is_degenerate() {
        return Ok(BandwidthValue {
            h: nf.powf(-F::one() / (F::lit(2.0) * pf + F::lit(2.0))),
            degenerate: true,
        });
    }
    // d = 1 throughout, so Tr Σ is the scalar Σ
    let trace = sigma;
    let c2 = bias.value * bias.value;
    let h = match mode {
        BandwidthMode::GeneralHat | BandwidthMode::GeneralCheck => {
            let df = F::from_usize_lossy(d as usize);
            let base = (df + F::lit(2.0)) * trace / (F::lit(2.0) * pf * c2 * nf);
            base.powf(F::one() / (df + F::lit(2.0) * pf + F::lit(2.0)))
        }
        BandwidthMode::UniformOpt | BandwidthMode::ExpOpt => {
            (trace / (pf * c2 * nf)).powf(F::one() / (F::lit(2.0) * pf + F::lit(2.0)))
        }
    };
    Ok(BandwidthValue { h, degenerate: false })
}

/// Asymptotic MSE `Σ/(N h²) + C² h²ᵖ` of the radius-tied estimators.
pub fn mse_objective<F: Real>(sigma: F, bias_c: F, p: u32, n: usize, h: F) -> F {
    sigma / (F::from_usize_lossy(n) * h * h) + bias_c * bias_c * h.powi(2 * p as i32)
}

/// Minimum over `h` of [`mse_objective`]: `(p+1) p^{−p/(p+1)} (|C|² Σᵖ)^{1/(p+1)} N^{−p/(p+1)}`.
pub fn predicted_mse<F: Real>(sigma: F, bias_c: F, p: u32, n: usize) -> F {
    doubled_closed_form_mse(sigma, bias_c, p, n) / F::lit(2.0)
}

/// `2(p+1) p^{−p/(p+1)} (|C|² Σᵖ)^{1/(p+1)} N^{−p/(p+1)}`, twice [`predicted_mse`].
pub fn doubled_closed_form_mse<F: Real>(sigma: F, bias_c: F, p: u32, n: usize) -> F {
    let pf = F::from_usize_lossy(p as usize);
    let q = pf + F::one();
    let nf = F::from_usize_lossy(n);
    F::lit(2.0)
        * q
        * pf.powf(-pf / q)
        * (bias_c * bias_c * sigma.powf(pf)).powf(F::one() / q)
        * nf.powf(-pf / q)
}

/// Full selection for estimators whose randomizer radius is tied to `h` (`ε = Mh`).
///
/// `UniformOpt` uses `θ = 0`; `ExpOpt` first minimizes `Cₑ(θ)²`.
pub fn select_bandwidth<F: Real>(pilot: &PilotEstimates<F>, kernel: &Kernel<F>, mode: BandwidthMode, n: usize) -> Result<BandwidthChoice<F>> {
    select_bandwidth_at(pilot, kernel, mode, n, None)
}

/// As [`select_bandwidth`], with the tilt of `ExpOpt` held at `theta` when given.
pub fn select_bandwidth_at<F: Real>(
    pilot: &PilotEstimates<F>,
    kernel: &Kernel<F>,
    mode: BandwidthMode,
    n: usize,
    theta: Option<F>,
) -> Result<BandwidthChoice<F>> {
    let p = kernel.order();
    let moment_p = kernel.moment(p);
    let theta = match (mode, theta) {
        (BandwidthMode::ExpOpt, Some(t)) => t,
        (BandwidthMode::ExpOpt, None) => {
            let bracket = theta_bracket(kernel.support_radius(), p, n);
            optimize_theta(&pilot.e, p, moment_p, bracket)?
        }
        _ => F::zero(),
    };
    let bias = bias_constant_with_scale(&pilot.e, p, moment_p, theta)?;
    let value = optimal_bandwidth(mode, pilot.sigma_e, bias, p, 1, n)?;
    let predicted = if value.degenerate {
        pilot.sigma_e / (F::from_usize_lossy(n) * value.h * value.h)
    } else {
        predicted_mse(pilot.sigma_e, bias.value, p, n)
    };
    Ok(BandwidthChoice {
        h_star: value.h,
        theta_star: theta,
        predicted_mse: predicted,
        bias_constant: bias.value,
        sigma: pilot.sigma_e,
        mode,
        degenerate: value.degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::GbmParams;
    use proptest::prelude::*;

    #[test]
    fn rule_of_thumb_examples() {
        let x = 100.0;
        let flat = vec![x * 0.1f64.exp(); 200];
        assert!(matches!(rule_of_thumb_moments(&flat, x), Err(Error::DegenerateVariance)));
        let law = rule_of_thumb_moments(&[x, x * std::f64::consts::E], x).unwrap();
        assert!((law.m - 0.5).abs() < 1e-15);
        assert!((law.sigma2 - 0.5).abs() < 1e-15);
        assert!(matches!(rule_of_thumb_moments(&[x], x), Err(Error::InsufficientPilot { .. })));
        assert!(matches!(rule_of_thumb_moments(&[x, -1.0], x), Err(Error::NonPositiveState(_))));
    }

    #[test]
    fn estimate_ek_of_zero_payoff_is_zero() {
        let law = GbmParams::<f64>::reference_setup().law();
        let states = [100.0, 120.0, 150.0];
        assert_eq!(estimate_ek(&states, &Payoff::Constant(0.0), 120.0, 3, &law).unwrap(), 0.0);
    }

    #[test]
    fn pilot_rejects_small_samples() {
        let s = vec![120.0; 50];
        let err = PilotEstimates::from_states(&s, &Payoff::Identity, 120.0, &Kernel::poly2(), None).unwrap_err();
        assert!(matches!(err, Error::InsufficientPilot { needed: 100, got: 50 }));
    }

    #[test]
    fn ce_examples() {
        assert!((bias_constant_ce(&[0.0f64, 0.0, 1.0], 2, 0.2, 0.0).unwrap() - 0.1).abs() < 1e-15);
        for theta in [-2.0f64, 0.5, 3.0] {
            let v = bias_constant_ce(&[0.0, 1.0, 0.0], 2, 0.2, theta).unwrap();
            assert!((v + 0.2 * theta).abs() < 1e-15);
            assert_eq!(bias_constant_ce(&[0.0; 3], 2, 0.2, theta).unwrap(), 0.0);
        }
        assert!(bias_constant_ce(&[1.0, 2.0], 2, 0.2, 0.0).is_err());
    }

    #[test]
    fn ce_quadratic_expansion() {
        // p = 2: Cₑ = 0.1 (E₁θ² − 2E₂θ + E₃)
        let e = [0.7f64, -0.3, 1.9];
        for theta in [-1.5, 0.0, 0.25, 4.0] {
            let expected = 0.1 * (e[0] * theta * theta - 2.0 * e[1] * theta + e[2]);
            assert!((bias_constant_ce(&e, 2, 0.2, theta).unwrap() - expected).abs() < 1e-14);
        }
    }

    #[test]
    fn optimize_theta_examples() {
        assert_eq!(optimize_theta(&[0.0, 1.0, 0.0], 2, 0.2, 100.0).unwrap(), 0.0);
        assert_eq!(optimize_theta(&[0.0, 0.0, 3.0], 2, 0.2, 100.0).unwrap(), 0.0);
        let (e2, e3) = (0.8f64, -1.3);
        let e = [0.0, e2, e3];
        let theta = optimize_theta(&e, 2, 0.2, 100.0).unwrap();
        assert!((theta - e3 / (2.0 * e2)).abs() < 1e-12);
        let c0 = bias_constant_ce(&e, 2, 0.2, 0.0).unwrap();
        assert!(bias_constant_ce(&e, 2, 0.2, theta).unwrap().abs() <= 1e-10 * c0.abs());
    }

    #[test]
    fn optimize_theta_without_real_root_finds_vertex() {
        // 0.1(θ² − 2θ + 3) has its minimum 0.2 at θ = 1
        let theta = optimize_theta(&[1.0f64, 1.0, 3.0], 2, 0.2, 50.0).unwrap();
        assert!((theta - 1.0).abs() < 1e-6, "theta={theta}");
    }

    #[test]
    fn optimal_bandwidth_examples() {
        let h = optimal_bandwidth(BandwidthMode::ExpOpt, 1.5f64, BiasConstant::exact(1.0), 2, 1, 1_000_000).unwrap();
        assert!((h.h - (1.5f64 / 2e6).powf(1.0 / 6.0)).abs() < 1e-15);
        assert!((h.h - 0.0953).abs() < 1e-4);
        let zero = optimal_bandwidth(BandwidthMode::ExpOpt, 1.5f64, BiasConstant::exact(0.0), 2, 1, 1_000_000).unwrap();
        assert!(zero.degenerate);
        assert!((zero.h - 1e6f64.powf(-1.0 / 6.0)).abs() < 1e-15);
        let general = optimal_bandwidth(BandwidthMode::GeneralHat, 1.0f64, BiasConstant::exact(1.0), 2, 1, 1_000_000).unwrap();
        assert!((general.h - (3.0f64 / 4e6).powf(1.0 / 7.0)).abs() < 1e-15);
        assert!(matches!(
            optimal_bandwidth(BandwidthMode::UniformOpt, 0.0, BiasConstant::exact(1.0), 2, 1, 10),
            Err(Error::NonPositiveVariance(_))
        ));
    }

    #[test]
    fn predicted_mse_examples() {
        let n = 1_000_000;
        let closed_form = doubled_closed_form_mse(1.0f64, 1.0, 2, n);
        assert!((closed_form - 6.0 * 2f64.powf(-2.0 / 3.0) * 1e-4).abs() < 1e-15);
        assert!((closed_form - 3.7798e-4).abs() < 1e-8);
        assert_eq!(predicted_mse(1.0, 0.0, 2, n), 0.0);
        for (sigma, c, p) in [(1.0f64, 1.0, 2), (1.38, 2.8e-6, 2), (9.3, 2e-10, 4), (0.5, 3.0, 6)] {
            let h = optimal_bandwidth(BandwidthMode::ExpOpt, sigma, BiasConstant::exact(c), p, 1, n).unwrap().h;
            let at_optimum = mse_objective(sigma, c, p, n, h);
            let predicted = predicted_mse(sigma, c, p, n);
            assert!(((predicted - at_optimum) / at_optimum).abs() < 1e-10);
            assert!((doubled_closed_form_mse(sigma, c, p, n) / predicted - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn degenerate_scale_is_relative() {
        // tiny but genuine constants (high-order kernels) are not degenerate
        assert!(!BiasConstant::exact(1e-15).is_degenerate());
        assert!(BiasConstant { value: 1e-20, scale: 1e-6 }.is_degenerate());
    }

    proptest! {
        #[test]
        fn ce_at_zero_is_cu(e in prop::collection::vec(-1e3f64..1e3, 7), p in prop::sample::select(vec![2u32, 4, 6])) {
            let k = Kernel::<f64>::builtin(match p { 2 => crate::KernelFamily::Poly2, 4 => crate::KernelFamily::Poly4, _ => crate::KernelFamily::Poly6 });
            let mu = k.moment(p);
            let ce = bias_constant_ce(&e, p, mu, 0.0).unwrap();
            let sign = if p % 2 == 0 { 1.0 } else { -1.0 };
            let cu = sign / factorial(p) * mu * e[p as usize];
            prop_assert!((ce - cu).abs() <= 1e-12 * cu.abs().max(1e-300));
            prop_assert_eq!(ce, bias_constant_cu(&e, p, mu).unwrap());
        }

        #[test]
        fn bandwidth_monotone_and_scaling(sigma in 0.1f64..10.0, c in 0.01f64..10.0, n in 100usize..100_000) {
            let b = BiasConstant::exact(c);
            let h = optimal_bandwidth(BandwidthMode::ExpOpt, sigma, b, 2, 1, n).unwrap().h;
            let more = optimal_bandwidth(BandwidthMode::ExpOpt, sigma, b, 2, 1, 2 * n).unwrap().h;
            let bigger_c = optimal_bandwidth(BandwidthMode::ExpOpt, sigma, BiasConstant::exact(2.0 * c), 2, 1, n).unwrap().h;
            prop_assert!(more < h);
            prop_assert!(bigger_c < h);
            let scaled = optimal_bandwidth(BandwidthMode::ExpOpt, sigma, b, 2, 1, n * 64).unwrap().h;
            prop_assert!((scaled / h - 0.5).abs() < 1e-12);
        }

        #[test]
        fn optimum_is_locally_minimal(sigma in 0.1f64..10.0, c in 1e-6f64..10.0, n in 100usize..10_000_000) {
            let h = optimal_bandwidth(BandwidthMode::UniformOpt, sigma, BiasConstant::exact(c), 2, 1, n).unwrap().h;
            let at = mse_objective(sigma, c, 2, n, h);
            prop_assert!(at <= mse_objective(sigma, c, 2, n, 0.5 * h));
            prop_assert!(at <= mse_objective(sigma, c, 2, n, 2.0 * h));
        }
    }
}
